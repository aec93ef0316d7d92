#include "msoc/hjb.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace msoc {

namespace {

constexpr int kMaxHoward = 200;

std::vector<double> slow_nodes(double alpha, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double dx = 2.0 * alpha / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = -alpha + i * dx;
    x.back() = alpha;  // avoid roundoff drift at the right endpoint
    return x;
}

/// Exact minimizer of the discrete slow-direction bracket
///   m(u) * g_upwind(m) + (1/2) a(u) * H + l(u)
/// over the control box.  On each upwind branch the bracket is quadratic in
/// u for the built-in models, so the branch minimizers, the drift kink, the
/// endpoints and a small safety grid enumerate every possible optimum.
template <class MuF, class AF, class LF>
std::pair<double, double> minimize_slow_bracket(MuF&& mu_of_u, AF&& a_of_u, LF&& l_of_u,
                                                const SlowSpec& slow, const ControlBox& box,
                                                double x, double g_fwd, double g_bwd, double Hc) {
    auto bracket = [&](double u) {
        const double m = mu_of_u(u);
        return m * (m >= 0.0 ? g_fwd : g_bwd) + 0.5 * a_of_u(u) * Hc + l_of_u(u);
    };

    double cand[24];
    int nc = 0;
    cand[nc++] = box.lo;
    cand[nc++] = box.hi;
    if (slow.closed_form_f) {
        cand[nc++] = box.clamp(0.5 * slow.closed_form_f(x, g_fwd, Hc));
        cand[nc++] = box.clamp(0.5 * slow.closed_form_f(x, g_bwd, Hc));
    }
    double m_lo = mu_of_u(box.lo), m_hi = mu_of_u(box.hi);
    if (m_lo * m_hi < 0.0) {
        double a = box.lo, b = box.hi, fa = m_lo;
        for (int it = 0; it < 60; ++it) {
            const double c = 0.5 * (a + b);
            const double fc = mu_of_u(c);
            if (fa * fc <= 0.0) {
                b = c;
            } else {
                a = c;
                fa = fc;
            }
        }
        cand[nc++] = 0.5 * (a + b);
    }
    for (int i = 0; i <= 8; ++i) cand[nc++] = box.lo + (box.hi - box.lo) * i / 8.0;

    double best_u = cand[0], best_v = bracket(cand[0]);
    for (int i = 1; i < nc; ++i) {
        const double v = bracket(cand[i]);
        if (v < best_v || (v == best_v && cand[i] < best_u)) {
            best_v = v;
            best_u = cand[i];
        }
    }
    return {best_u, best_v};
}

}  // namespace

std::pair<double, double> minimize_quadratic_control(double f, const ControlBox& control) {
    const double u = control.clamp(0.5 * f);
    return {u, u * u - f * u};
}

std::pair<double, double> minimize_hamiltonian_grid(double x, double g, double H,
                                                    const SlowSpec& slow,
                                                    const std::optional<VectorXd>& y,
                                                    const ControlBox& control, int n_u) {
    double sf = 0.0;
    if (y) {
        const double s = slow.sigma_sf(x, *y);
        sf = slow.mu_sf(x, *y) * g + 0.5 * s * s * H + slow.l_sf(x, *y);
    }
    double best_u = control.lo;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_u; ++i) {
        const double u = control.lo + (control.hi - control.lo) * i / (n_u - 1);
        const double s = slow.sigma_sc(x, u);
        const double v = slow.mu_sc(x, u) * g + 0.5 * s * s * H + slow.l_sc(x, u);
        if (v < best_v) {
            best_v = v;
            best_u = u;
        }
    }
    return {best_u, best_v + sf};
}

ValueField1D solve_effective_hjb(const EffectiveTables& tables, const SlowSpec& slow,
                                 const ControlBox& control, double beta, double theta_e,
                                 int n_slow, double tol) {
    if (n_slow < 4) throw std::invalid_argument("solve_effective_hjb: n_slow must be >= 4");
    const auto x = slow_nodes(slow.alpha, n_slow);
    const int n = n_slow;
    const double dx = 2.0 * slow.alpha / (n - 1);
    const double ghost = 2.0 * dx * theta_e;  // ghost-node offset carrying the Neumann data

    std::vector<double> mu_bar(x.size()), a_bar(x.size()), l_bar(x.size());
    for (int i = 0; i < n; ++i) {
        mu_bar[i] = tables.interp_mu(x[i]);
        a_bar[i] = tables.interp_a(x[i]);
        l_bar[i] = tables.interp_l(x[i]);
    }

    auto node_min = [&](int i, double g_fwd, double g_bwd, double Hc) {
        return minimize_slow_bracket(
            [&](double u) { return mu_bar[i] + slow.mu_sc(x[i], u); },
            [&](double u) {
                const double s = slow.sigma_sc(x[i], u);
                return a_bar[i] + s * s;
            },
            [&](double u) { return l_bar[i] + slow.l_sc(x[i], u); }, slow, control, x[i], g_fwd,
            g_bwd, Hc);
    };

    // quotients with the ghost values substituted at the endpoints
    auto quotients = [&](const std::vector<double>& v, int i, double& g_fwd, double& g_bwd,
                         double& Hc) {
        const double vm = (i == 0) ? v[1] + ghost : v[i - 1];
        const double vp = (i == n - 1) ? v[n - 2] + ghost : v[i + 1];
        g_fwd = (vp - v[i]) / dx;
        g_bwd = (v[i] - vm) / dx;
        Hc = (vp - 2.0 * v[i] + vm) / (dx * dx);
    };

    std::vector<double> u(x.size()), v(x.size(), 0.0);
    for (int i = 0; i < n; ++i) u[i] = node_min(i, 0.0, 0.0, 0.0).first;

    Eigen::SparseLU<SparseMat> lu;
    int iterations = 0;
    for (int it = 1; it <= kMaxHoward; ++it) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(3 * n));
        VectorXd rhs(n);
        for (int i = 0; i < n; ++i) {
            const double m = mu_bar[i] + slow.mu_sc(x[i], u[i]);
            const double ssc = slow.sigma_sc(x[i], u[i]);
            const double a = a_bar[i] + ssc * ssc;
            double diag = beta;
            double w_up = a / (2.0 * dx * dx);
            double w_dn = a / (2.0 * dx * dx);
            diag += a / (dx * dx);
            if (m >= 0.0) {
                w_up += m / dx;
                diag += m / dx;
            } else {
                w_dn += -m / dx;
                diag += -m / dx;
            }
            rhs[i] = l_bar[i] + slow.l_sc(x[i], u[i]);
            // fold ghost neighbours onto their mirror with the Neumann offset
            if (i == 0) {
                trip.emplace_back(0, 1, -(w_up + w_dn));
                rhs[0] += w_dn * ghost;
            } else if (i == n - 1) {
                trip.emplace_back(n - 1, n - 2, -(w_up + w_dn));
                rhs[n - 1] += w_up * ghost;
            } else {
                trip.emplace_back(i, i + 1, -w_up);
                trip.emplace_back(i, i - 1, -w_dn);
            }
            trip.emplace_back(i, i, diag);
        }
        SparseMat A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        if (it == 1) lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("solve_effective_hjb: linear solve failed");
        VectorXd vn = lu.solve(rhs);

        double delta = 0.0;
        for (int i = 0; i < n; ++i) delta = std::max(delta, std::abs(vn[i] - v[i]));
        for (int i = 0; i < n; ++i) v[i] = vn[i];
        bool policy_changed = false;
        for (int i = 0; i < n; ++i) {
            double g_fwd, g_bwd, Hc;
            quotients(v, i, g_fwd, g_bwd, Hc);
            const double ui = node_min(i, g_fwd, g_bwd, Hc).first;
            // tolerance guard: bisection noise must not flip policies forever
            if (std::abs(ui - u[i]) > 1e-9) policy_changed = true;
            u[i] = ui;
        }
        iterations = it;
        if (delta < tol && !policy_changed) break;
    }

    ValueField1D out;
    out.x_nodes = x;
    out.v = v;
    out.policy.u = u;
    out.beta = beta;
    out.iterations = iterations;
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
        double g_fwd, g_bwd, Hc;
        quotients(v, i, g_fwd, g_bwd, Hc);
        res = std::max(res, std::abs(beta * v[i] - node_min(i, g_fwd, g_bwd, Hc).second));
    }
    out.residual = res;
    return out;
}

ValueField3D solve_multiscale_hjb(const SlowSpec& slow, const FastSpec& fast,
                                  const ControlBox& control, double epsilon, double beta,
                                  double theta_e, int n_slow, const TorusGrid& torus, double tol) {
    if (epsilon <= 0.0) throw std::invalid_argument("solve_multiscale_hjb: epsilon must be > 0");
    const auto x = slow_nodes(slow.alpha, n_slow);
    const int nx = n_slow;
    const long nt = torus.size();
    const long N = static_cast<long>(nx) * nt;
    const double dx = 2.0 * slow.alpha / (nx - 1);
    const double h = torus.h();
    const double ghost = 2.0 * dx * theta_e;
    auto node = [&](int i, long t) { return static_cast<long>(i) * nt + t; };

    // control-independent part: fast generator / eps and the mixed x-y term
    // / sqrt(eps).  The mixed stencil cancels exactly at the x-endpoints
    // under the ghost substitution, so it is only assembled in the interior.
    std::vector<Eigen::Triplet<double>> fixed;
    fixed.reserve(static_cast<std::size_t>(N) * 12);
    double cross_ratio = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (long t = 0; t < nt; ++t) {
            const long row = node(i, t);
            const VectorXd y = torus.coordinate(t);
            const VectorXd mu = fast.mu_y(x[i], y) / epsilon;
            const MatrixXd a = fast.a_y(x[i], y) / epsilon;
            double diag = 0.0;
            for (int d = 0; d < torus.d_y; ++d) {
                const long up = node(i, torus.neighbor(t, d, +1));
                const long dn = node(i, torus.neighbor(t, d, -1));
                const double m = mu[d];
                if (m >= 0.0) {
                    fixed.emplace_back(row, up, m / h);
                    diag -= m / h;
                } else {
                    fixed.emplace_back(row, dn, -m / h);
                    diag += m / h;
                }
                const double w = 0.5 * a(d, d) / (h * h);
                fixed.emplace_back(row, up, w);
                fixed.emplace_back(row, dn, w);
                diag -= 2.0 * w;
                for (int e = d + 1; e < torus.d_y; ++e) {
                    const double c = a(d, e) / (4.0 * h * h);
                    if (c == 0.0) continue;
                    fixed.emplace_back(row, node(i, torus.neighbor(torus.neighbor(t, d, +1), e, +1)), c);
                    fixed.emplace_back(row, node(i, torus.neighbor(torus.neighbor(t, d, -1), e, -1)), c);
                    fixed.emplace_back(row, node(i, torus.neighbor(torus.neighbor(t, d, +1), e, -1)), -c);
                    fixed.emplace_back(row, node(i, torus.neighbor(torus.neighbor(t, d, -1), e, +1)), -c);
                }
            }
            if (i > 0 && i < nx - 1) {
                const double s_sf = slow.sigma_sf(x[i], y);
                const VectorXd c_vec =
                    s_sf * (fast.disp_y(x[i], y) * fast.slow_noise_loading) / std::sqrt(epsilon);
                for (int d = 0; d < torus.d_y; ++d) {
                    const double w = c_vec[d] / (4.0 * dx * h);
                    if (w == 0.0) continue;
                    const long tp = torus.neighbor(t, d, +1);
                    const long tm = torus.neighbor(t, d, -1);
                    fixed.emplace_back(row, node(i + 1, tp), w);
                    fixed.emplace_back(row, node(i - 1, tm), w);
                    fixed.emplace_back(row, node(i + 1, tm), -w);
                    fixed.emplace_back(row, node(i - 1, tp), -w);
                    const double diag_scale =
                        std::min(s_sf * s_sf / (dx * dx), a(d, d) / (h * h));
                    cross_ratio =
                        std::max(cross_ratio, diag_scale > 0.0
                                                  ? std::abs(c_vec[d]) / (dx * h) / diag_scale
                                                  : std::numeric_limits<double>::infinity());
                }
            }
            fixed.emplace_back(row, row, diag);
        }
    }

    auto node_min = [&](int i, const VectorXd& y, double g_fwd, double g_bwd, double Hc) {
        return minimize_slow_bracket(
            [&](double u) { return slow.mu_sf(x[i], y) + slow.mu_sc(x[i], u); },
            [&](double u) {
                const double sf = slow.sigma_sf(x[i], y);
                const double sc = slow.sigma_sc(x[i], u);
                return sf * sf + sc * sc;
            },
            [&](double u) { return slow.l_sf(x[i], y) + slow.l_sc(x[i], u); }, slow, control,
            x[i], g_fwd, g_bwd, Hc);
    };

    auto quotients = [&](const std::vector<double>& v, int i, long t, double& g_fwd,
                         double& g_bwd, double& Hc) {
        const double vc = v[node(i, t)];
        const double vm = (i == 0) ? v[node(1, t)] + ghost : v[node(i - 1, t)];
        const double vp = (i == nx - 1) ? v[node(nx - 2, t)] + ghost : v[node(i + 1, t)];
        g_fwd = (vp - vc) / dx;
        g_bwd = (vc - vm) / dx;
        Hc = (vp - 2.0 * vc + vm) / (dx * dx);
    };

    std::vector<double> u(static_cast<std::size_t>(N)), v(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < nx; ++i)
        for (long t = 0; t < nt; ++t)
            u[node(i, t)] = node_min(i, torus.coordinate(t), 0.0, 0.0, 0.0).first;

    // Preconditioned BiCGSTAB: direct factorization of the 3D operator is
    // far too expensive at the default grids, while ILUT handles the fast
    // 1/eps stiffness well.  Deterministic: serial, fixed setup.  The ILUT
    // factorization is itself costly, so it is frozen after the first Howard
    // iteration: only the O(1) slow-direction coefficients change between
    // iterations while the preconditioner mainly has to capture the O(1/eps)
    // fast block, and the stencil pattern never changes (zero-valued slow
    // couplings are still inserted).  Coefficients are refreshed in place so
    // the solver's reference to A stays valid.
    Eigen::BiCGSTAB<SparseMat, Eigen::IncompleteLUT<double>> krylov;
    krylov.preconditioner().setDroptol(1e-4);
    krylov.preconditioner().setFillfactor(12);
    krylov.setTolerance(1e-13);
    krylov.setMaxIterations(4000);
    const bool trace = std::getenv("MSOC_TRACE") != nullptr;
    SparseMat A(N, N);
    bool pattern_set = false;
    int iterations = 0;
    for (int it = 1; it <= kMaxHoward; ++it) {
        const auto it_t0 = std::chrono::steady_clock::now();
        std::vector<Eigen::Triplet<double>> trip = fixed;
        VectorXd rhs(N);
        for (int i = 0; i < nx; ++i) {
            for (long t = 0; t < nt; ++t) {
                const long row = node(i, t);
                const VectorXd y = torus.coordinate(t);
                const double ui = u[row];
                const double m = slow.mu_sf(x[i], y) + slow.mu_sc(x[i], ui);
                const double sf = slow.sigma_sf(x[i], y);
                const double sc = slow.sigma_sc(x[i], ui);
                const double a = sf * sf + sc * sc;
                double diag = 0.0;
                double w_up = a / (2.0 * dx * dx);
                double w_dn = a / (2.0 * dx * dx);
                diag -= a / (dx * dx);
                if (m >= 0.0) {
                    w_up += m / dx;
                    diag -= m / dx;
                } else {
                    w_dn += -m / dx;
                    diag -= -m / dx;
                }
                rhs[row] = slow.l_sf(x[i], y) + slow.l_sc(x[i], ui);
                if (i == 0) {
                    trip.emplace_back(row, node(1, t), w_up + w_dn);
                    rhs[row] += w_dn * ghost;
                } else if (i == nx - 1) {
                    trip.emplace_back(row, node(nx - 2, t), w_up + w_dn);
                    rhs[row] += w_up * ghost;
                } else {
                    trip.emplace_back(row, node(i + 1, t), w_up);
                    trip.emplace_back(row, node(i - 1, t), w_dn);
                }
                trip.emplace_back(row, row, diag);
            }
        }
        // system matrix beta I - L with L = fixed + slow parts
        for (long q = 0; q < N; ++q) trip.emplace_back(q, q, -beta);
        SparseMat negA(N, N);
        negA.setFromTriplets(trip.begin(), trip.end());
        const auto it_t1 = std::chrono::steady_clock::now();
        if (!pattern_set) {
            A = -negA;
            A.makeCompressed();
            krylov.compute(A);  // ILUT factorization, reused afterwards
            pattern_set = true;
        } else {
            negA.makeCompressed();
            // identical pattern by construction: overwrite values in place
            for (long q = 0; q < A.nonZeros(); ++q) A.valuePtr()[q] = -negA.valuePtr()[q];
        }
        const auto it_t2 = std::chrono::steady_clock::now();
        Eigen::Map<const VectorXd> guess(v.data(), N);
        VectorXd vn = krylov.solveWithGuess(rhs, guess);
        double lin_res = (A * vn - rhs).cwiseAbs().maxCoeff();
        if (krylov.info() != Eigen::Success || !vn.allFinite() || lin_res > 1e-9) {
            krylov.compute(A);  // refresh the frozen preconditioner and retry
            vn = krylov.solveWithGuess(rhs, guess);
            lin_res = (A * vn - rhs).cwiseAbs().maxCoeff();
        }
        if (krylov.info() != Eigen::Success || !vn.allFinite() || lin_res > 1e-9) {
            Eigen::SparseLU<SparseMat> lu(A);  // robust fallback
            if (lu.info() != Eigen::Success)
                throw std::runtime_error("solve_multiscale_hjb: linear solve failed");
            vn = lu.solve(rhs);
            lin_res = (A * vn - rhs).cwiseAbs().maxCoeff();
            if (lin_res > 1e-8)
                throw std::runtime_error("solve_multiscale_hjb: linear residual too large");
        }

        double delta = 0.0;
        for (long q = 0; q < N; ++q) delta = std::max(delta, std::abs(vn[q] - v[q]));
        for (long q = 0; q < N; ++q) v[q] = vn[q];
        bool policy_changed = false;
        for (int i = 0; i < nx; ++i) {
            for (long t = 0; t < nt; ++t) {
                double g_fwd, g_bwd, Hc;
                quotients(v, i, t, g_fwd, g_bwd, Hc);
                const double ui = node_min(i, torus.coordinate(t), g_fwd, g_bwd, Hc).first;
                if (std::abs(ui - u[node(i, t)]) > 1e-9) policy_changed = true;
                u[node(i, t)] = ui;
            }
        }
        iterations = it;
        if (trace) {
            const auto it_t3 = std::chrono::steady_clock::now();
            const auto ms = [](auto a, auto b) {
                return std::chrono::duration<double, std::milli>(b - a).count();
            };
            std::fprintf(stderr,
                         "howard3d it=%d assemble=%.0fms precond=%.0fms solve=%.0fms "
                         "delta=%.3e lin_res=%.3e policy_changed=%d\n",
                         it, ms(it_t0, it_t1), ms(it_t1, it_t2), ms(it_t2, it_t3), delta,
                         lin_res, static_cast<int>(policy_changed));
        }
        if (delta < tol && !policy_changed) break;
    }

    ValueField3D out{x, torus, std::move(v), PolicyField{std::move(u)}, epsilon, beta,
                     0.0, iterations, cross_ratio};

    // residual of the full discrete equation at the converged pair; the
    // control-independent part is applied through the assembled operator
    SparseMat Lfix(N, N);
    Lfix.setFromTriplets(fixed.begin(), fixed.end());
    Eigen::Map<const VectorXd> vv(out.v.data(), N);
    VectorXd fixed_part = Lfix * vv;
    double res = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (long t = 0; t < nt; ++t) {
            double g_fwd, g_bwd, Hc;
            quotients(out.v, i, t, g_fwd, g_bwd, Hc);
            const double mn = node_min(i, torus.coordinate(t), g_fwd, g_bwd, Hc).second;
            res = std::max(res,
                           std::abs(beta * out.v[node(i, t)] - fixed_part[node(i, t)] - mn));
        }
    }
    out.residual = res;
    return out;
}

ConvergenceStudy convergence_study(const ScenarioConfig& cfg) {
    auto [slow, fast] = build_example(cfg);
    const ControlBox box{cfg.u_lo, cfg.u_hi};
    const auto x = slow_nodes(cfg.alpha, cfg.n_slow);
    const TorusGrid torus(cfg.d_y, cfg.n_torus);

    const auto densities = density_sweep(fast, x, torus, cfg.tol_density);
    const auto tables = effective_tables(slow, densities, x);

    ConvergenceStudy study;
    study.effective =
        solve_effective_hjb(tables, slow, box, cfg.beta, cfg.theta_e, cfg.n_slow, cfg.tol_policy);

    std::vector<double> eps = cfg.epsilon_list;
    std::sort(eps.begin(), eps.end(), std::greater<double>());
    for (double e : eps) {
        const auto t0 = std::chrono::steady_clock::now();
        const ValueField3D vf = solve_multiscale_hjb(slow, fast, box, e, cfg.beta, cfg.theta_e,
                                                     cfg.n_slow, torus, cfg.tol_policy);
        const auto t1 = std::chrono::steady_clock::now();
        ConvergenceRow row;
        row.epsilon = e;
        row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
        const long nt = torus.size();
        for (int i = 0; i < cfg.n_slow; ++i) {
            double vmin = std::numeric_limits<double>::infinity();
            double vmax = -vmin;
            for (long t = 0; t < nt; ++t) {
                const double val = vf.v[vf.index(i, t / torus.n, t % torus.n)];
                vmin = std::min(vmin, val);
                vmax = std::max(vmax, val);
            }
            row.err_inf = std::max(row.err_inf, std::abs(vmin - study.effective.v[i]));
            row.err_sup = std::max(row.err_sup, std::abs(vmax - study.effective.v[i]));
        }
        study.rows.push_back(row);
    }
    return study;
}

double check_neumann(const ValueField1D& v, double theta_e) {
    const int n = static_cast<int>(v.v.size());
    const double dx = v.x_nodes[1] - v.x_nodes[0];
    const double left = (-3.0 * v.v[0] + 4.0 * v.v[1] - v.v[2]) / (2.0 * dx);
    const double right = (3.0 * v.v[n - 1] - 4.0 * v.v[n - 2] + v.v[n - 3]) / (2.0 * dx);
    return std::max(std::abs(left + theta_e), std::abs(right - theta_e));
}

double check_neumann(const ValueField3D& v, double theta_e) {
    const int n = static_cast<int>(v.x_nodes.size());
    const double dx = v.x_nodes[1] - v.x_nodes[0];
    const long nt = v.torus.size();
    double worst = 0.0;
    for (long t = 0; t < nt; ++t) {
        const std::size_t j = static_cast<std::size_t>(t / v.torus.n);
        const std::size_t k = static_cast<std::size_t>(t % v.torus.n);
        const double left =
            (-3.0 * v.v[v.index(0, j, k)] + 4.0 * v.v[v.index(1, j, k)] - v.v[v.index(2, j, k)]) /
            (2.0 * dx);
        const double right = (3.0 * v.v[v.index(n - 1, j, k)] - 4.0 * v.v[v.index(n - 2, j, k)] +
                              v.v[v.index(n - 3, j, k)]) /
                             (2.0 * dx);
        worst = std::max(worst, std::max(std::abs(left + theta_e), std::abs(right - theta_e)));
    }
    return worst;
}

namespace {

double policy_from_quotients(const SlowSpec& slow, const ControlBox& control, double x, double g,
                             double H) {
    if (slow.closed_form_f) return control.clamp(0.5 * slow.closed_form_f(x, g, H));
    return minimize_hamiltonian_grid(x, g, H, slow, std::nullopt, control, 4001).first;
}

}  // namespace

PolicyField markov_policy_from_value(const ValueField1D& v, const SlowSpec& slow,
                                     const ControlBox& control) {
    const int n = static_cast<int>(v.v.size());
    const double dx = v.x_nodes[1] - v.x_nodes[0];
    PolicyField p;
    p.u.resize(v.v.size());
    for (int i = 0; i < n; ++i) {
        const double vm = (i == 0) ? v.v[1] : v.v[i - 1];
        const double vp = (i == n - 1) ? v.v[n - 2] : v.v[i + 1];
        const double g = (vp - vm) / (2.0 * dx);
        const double H = (vp - 2.0 * v.v[i] + vm) / (dx * dx);
        p.u[i] = policy_from_quotients(slow, control, v.x_nodes[i], g, H);
    }
    return p;
}

PolicyField markov_policy_from_value(const ValueField3D& v, const SlowSpec& slow,
                                     const ControlBox& control) {
    const int n = static_cast<int>(v.x_nodes.size());
    const double dx = v.x_nodes[1] - v.x_nodes[0];
    const long nt = v.torus.size();
    PolicyField p;
    p.u.resize(v.v.size());
    for (int i = 0; i < n; ++i) {
        for (long t = 0; t < nt; ++t) {
            const std::size_t j = static_cast<std::size_t>(t / v.torus.n);
            const std::size_t k = static_cast<std::size_t>(t % v.torus.n);
            const double vc = v.v[v.index(i, j, k)];
            const double vm = (i == 0) ? v.v[v.index(1, j, k)] : v.v[v.index(i - 1, j, k)];
            const double vp =
                (i == n - 1) ? v.v[v.index(n - 2, j, k)] : v.v[v.index(i + 1, j, k)];
            const double g = (vp - vm) / (2.0 * dx);
            const double H = (vp - 2.0 * vc + vm) / (dx * dx);
            p.u[v.index(i, j, k)] = policy_from_quotients(slow, control, v.x_nodes[i], g, H);
        }
    }
    return p;
}

}  // namespace msoc

#include "msoc/cell.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msoc/rng.hpp"

namespace msoc {

double frozen_running_hamiltonian(const HamiltonianPoint& p, const SlowSpec& slow,
                                  const ControlBox& control, const VectorXd& y) {
    const double x = p.x_bar;
    const double s_sf = slow.sigma_sf(x, y);
    const double sf_part = slow.mu_sf(x, y) * p.g + 0.5 * s_sf * s_sf * p.H + slow.l_sf(x, y);

    auto bracket = [&](double u) {
        const double s = slow.sigma_sc(x, u);
        return slow.mu_sc(x, u) * p.g + 0.5 * s * s * p.H + slow.l_sc(x, u);
    };
    double sc_part;
    if (slow.closed_form_f) {
        sc_part = bracket(control.clamp(0.5 * slow.closed_form_f(x, p.g, p.H)));
    } else {
        sc_part = bracket(control.lo);
        const int n = 2001;
        for (int i = 1; i < n; ++i)
            sc_part = std::min(sc_part,
                               bracket(control.lo + (control.hi - control.lo) * i / (n - 1)));
    }
    return sf_part + sc_part;
}

CellSolution solve_cell_t(const HamiltonianPoint& p, const FastSpec& fast, const SlowSpec& slow,
                          const ControlBox& control, const TorusGrid& grid, double T, double dt) {
    if (T < 0.0 || dt <= 0.0) throw std::invalid_argument("solve_cell_t: need T >= 0, dt > 0");
    const long N = grid.size();
    if (T == 0.0) return CellSolution{grid, {0.0}, {VectorXd::Zero(N)}, p};
    const GeneratorMatrix gen = assemble_generator(fast, p.x_bar, grid);

    SparseMat sys(N, N);
    sys.setIdentity();
    sys -= dt * gen.L;
    Eigen::SparseLU<SparseMat> lu(sys);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_cell_t: implicit-Euler factorization failed");

    VectorXd source(N);
    for (long i = 0; i < N; ++i)
        source[i] = frozen_running_hamiltonian(p, slow, control, grid.coordinate(i));

    CellSolution sol{grid, {}, {}, p};
    VectorXd w = VectorXd::Zero(N);
    const long steps = static_cast<long>(std::llround(T / dt));
    const long record_every = std::max<long>(1, static_cast<long>(std::llround(1.0 / dt)));
    VectorXd rhs(N);
    for (long k = 1; k <= steps; ++k) {
        rhs = w + dt * source;  // materialized: lu.solve must not alias its rhs
        w = lu.solve(rhs);
        if (k % record_every == 0 || k == steps) {
            sol.times.push_back(k * dt);
            sol.w.push_back(w);
        }
    }
    return sol;
}

LongTimeEstimate effective_hamiltonian_longtime(const HamiltonianPoint& p, const FastSpec& fast,
                                                const SlowSpec& slow, const ControlBox& control,
                                                const TorusGrid& grid, double T, double dt) {
    CellSolution sol = solve_cell_t(p, fast, slow, control, grid, T, dt);
    LongTimeEstimate est;
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double t = sol.times[k];
        const VectorXd& w = sol.w[k];
        est.times.push_back(t);
        est.mean_w_over_t.push_back(w.mean() / t);
        est.spread_over_t.push_back((w.maxCoeff() - w.minCoeff()) / t);
    }
    est.estimate = est.mean_w_over_t.back();
    est.spread = est.spread_over_t.back();
    return est;
}

std::pair<double, double> feynman_kac_mc(const HamiltonianPoint& p, const FastSpec& fast,
                                         const SlowSpec& slow, const ControlBox& control,
                                         const VectorXd& y0, double T, double dt, long n_paths,
                                         std::uint64_t seed) {
    const long steps = static_cast<long>(std::llround(T / dt));
    const double sqdt = std::sqrt(dt);
    std::vector<double> costs(static_cast<std::size_t>(n_paths));

    for (long path = 0; path < n_paths; ++path) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(path)));
        std::normal_distribution<double> normal(0.0, 1.0);
        VectorXd y = y0;
        VectorXd xi(fast.d_y);
        double acc = 0.0;
        for (long s = 0; s < steps; ++s) {
            acc += frozen_running_hamiltonian(p, slow, control, y) * dt;
            const VectorXd mu = fast.mu_y(p.x_bar, y);
            const MatrixXd disp = fast.disp_y(p.x_bar, y);
            for (int i = 0; i < fast.d_y; ++i) xi[i] = normal(rng);
            y += mu * dt + disp * (sqdt * xi);
            for (int i = 0; i < fast.d_y; ++i) y[i] -= std::floor(y[i]);
        }
        costs[static_cast<std::size_t>(path)] = acc;
    }

    const double mean = pairwise_sum(costs.data(), costs.size()) / static_cast<double>(n_paths);
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    var /= std::max<long>(1, n_paths - 1);
    return {mean, std::sqrt(var / static_cast<double>(n_paths))};
}

}  // namespace msoc

#include "msoc/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "msoc/rng.hpp"

namespace msoc {

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

ReflectedStep step_reflected_slow(double x, double drift, double dispersion, double dt, double dW,
                                  double alpha) {
    const double proposal = x + drift * dt + dispersion * dW;
    ReflectedStep s;
    if (proposal > alpha) {
        s.x_new = alpha;
        s.dl = proposal - alpha;
        s.reflected = true;
    } else if (proposal < -alpha) {
        s.x_new = -alpha;
        s.dl = -alpha - proposal;
        s.reflected = true;
    } else {
        s.x_new = proposal;
    }
    return s;
}

ControlLaw1D constant_control(double u) {
    return [u](double) { return u; };
}

ControlLaw1D policy_interpolant(const ValueField1D& field) {
    if (field.x_nodes.size() < 2 || field.policy.u.size() != field.x_nodes.size())
        throw std::invalid_argument("policy_interpolant: malformed 1D field");
    const std::vector<double> xs = field.x_nodes;
    const std::vector<double> us = field.policy.u;
    return [xs, us](double x) {
        if (x <= xs.front()) return us.front();
        if (x >= xs.back()) return us.back();
        const std::size_t n = xs.size();
        const double dx = (xs.back() - xs.front()) / static_cast<double>(n - 1);
        std::size_t i = static_cast<std::size_t>((x - xs.front()) / dx);
        if (i >= n - 1) i = n - 2;
        const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return (1.0 - t) * us[i] + t * us[i + 1];
    };
}

ControlLaw3D policy_interpolant(const ValueField3D& field) {
    if (field.x_nodes.size() < 2 || field.policy.u.size() != field.v.size())
        throw std::invalid_argument("policy_interpolant: malformed 3D field");
    // copies keep the law valid after the field goes out of scope
    const std::vector<double> xs = field.x_nodes;
    const std::vector<double> us = field.policy.u;
    const int n = field.torus.n;
    return [xs, us, n](double x, const VectorXd& y) {
        const std::size_t nx = xs.size();
        const double dx = (xs.back() - xs.front()) / static_cast<double>(nx - 1);
        double tx = (x - xs.front()) / dx;
        tx = std::clamp(tx, 0.0, static_cast<double>(nx - 1));
        std::size_t i = std::min(static_cast<std::size_t>(tx), nx - 2);
        const double wx = tx - static_cast<double>(i);

        double y0 = y[0] - std::floor(y[0]);
        double y1 = y[1] - std::floor(y[1]);
        const double h = 1.0 / n;
        const std::size_t j = std::min(static_cast<std::size_t>(y0 / h),
                                       static_cast<std::size_t>(n - 1));
        const std::size_t k = std::min(static_cast<std::size_t>(y1 / h),
                                       static_cast<std::size_t>(n - 1));
        const double wj = y0 / h - static_cast<double>(j);
        const double wk = y1 / h - static_cast<double>(k);
        const std::size_t jp = (j + 1) % static_cast<std::size_t>(n);
        const std::size_t kp = (k + 1) % static_cast<std::size_t>(n);
        auto at = [&](std::size_t ii, std::size_t jj, std::size_t kk) {
            return us[(ii * static_cast<std::size_t>(n) + jj) * static_cast<std::size_t>(n) + kk];
        };
        double out = 0.0;
        for (int bi = 0; bi <= 1; ++bi)
            for (int bj = 0; bj <= 1; ++bj)
                for (int bk = 0; bk <= 1; ++bk)
                    out += (bi ? wx : 1.0 - wx) * (bj ? wj : 1.0 - wj) * (bk ? wk : 1.0 - wk) *
                           at(i + bi, bj ? jp : j, bk ? kp : k);
        return out;
    };
}

namespace {

template <class PathCost>
PathEstimate run_paths(long n_paths, std::uint64_t seed, int threads, double horizon, double dt,
                       PathCost&& path_cost, std::vector<double>* per_path_costs) {
    std::vector<double> costs(static_cast<std::size_t>(n_paths));
    const int nthreads = std::max(1, threads);
    auto worker = [&](long lo, long hi) {
        for (long p = lo; p < hi; ++p)
            costs[static_cast<std::size_t>(p)] = path_cost(derive_seed(seed, static_cast<std::uint64_t>(p)));
    };
    if (nthreads == 1) {
        worker(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_paths + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const long lo = t * chunk;
            const long hi = std::min(n_paths, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    PathEstimate est;
    est.n_paths = n_paths;
    est.horizon = horizon;
    est.dt = dt;
    est.seed = seed;
    est.mean = pairwise_sum(costs.data(), costs.size()) / static_cast<double>(n_paths);
    double var = 0.0;
    for (double c : costs) var += (c - est.mean) * (c - est.mean);
    var /= static_cast<double>(std::max<long>(1, n_paths - 1));
    est.stderr_ = std::sqrt(var / static_cast<double>(n_paths));
    if (per_path_costs) *per_path_costs = std::move(costs);
    return est;
}

}  // namespace

PathEstimate simulate_multiscale_cost(const SlowSpec& slow, const FastSpec& fast,
                                      const ControlLaw3D& policy, double epsilon, double x0,
                                      const VectorXd& y0, double beta, double T, double dt,
                                      long n_paths, std::uint64_t seed, int threads,
                                      std::vector<double>* per_path_costs) {
    if (dt <= 0.0 || T <= 0.0) throw std::invalid_argument("simulate_multiscale_cost: bad T/dt");
    if (dt > epsilon / 10.0) dt = epsilon / 10.0;  // resolve the fast clock
    const long steps = static_cast<long>(std::ceil(T / dt));
    const double sqdt = std::sqrt(dt);
    const double decay = std::exp(-beta * dt);
    const int d_y = fast.d_y;

    auto path_cost = [&, d_y](std::uint64_t path_seed) {
        Rng rng(path_seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        double x = x0;
        VectorXd y = y0;
        VectorXd xi(d_y);
        double disc = 1.0;
        double cost = 0.0;
        for (long s = 0; s < steps; ++s) {
            const double u = policy(x, y);
            cost += disc * (slow.l_sf(x, y) + slow.l_sc(x, u)) * dt;

            for (int i = 0; i < d_y; ++i) xi[i] = normal(rng);
            const double eta = normal(rng);
            const double fast_load = fast.slow_noise_loading.dot(xi);
            const double noise =
                slow.sigma_sf(x, y) * fast_load * sqdt + slow.sigma_sc(x, u) * eta * sqdt;
            const double drift = slow.mu_sf(x, y) + slow.mu_sc(x, u);
            const ReflectedStep rs = step_reflected_slow(x, drift, 1.0, dt, noise, slow.alpha);
            if (rs.reflected)
                cost += disc * (rs.x_new > 0.0 ? slow.h_plus : slow.h_minus) * rs.dl;

            const VectorXd mu_y = fast.mu_y(x, y);
            const MatrixXd disp = fast.disp_y(x, y);
            y += mu_y * (dt / epsilon) + disp * (sqdt / std::sqrt(epsilon) * xi);
            for (int i = 0; i < d_y; ++i) y[i] -= std::floor(y[i]);
            x = rs.x_new;
            disc *= decay;
        }
        return cost;
    };
    return run_paths(n_paths, seed, threads, steps * dt, dt, path_cost, per_path_costs);
}

PathEstimate simulate_effective_cost(const EffectiveTables& tables, const SlowSpec& slow,
                                     const ControlLaw1D& policy, double x0, double beta, double T,
                                     double dt, long n_paths, std::uint64_t seed, int threads,
                                     std::vector<double>* per_path_costs) {
    if (dt <= 0.0 || T <= 0.0) throw std::invalid_argument("simulate_effective_cost: bad T/dt");
    const long steps = static_cast<long>(std::ceil(T / dt));
    const double sqdt = std::sqrt(dt);
    const double decay = std::exp(-beta * dt);

    auto path_cost = [&](std::uint64_t path_seed) {
        Rng rng(path_seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        double x = x0;
        double disc = 1.0;
        double cost = 0.0;
        for (long s = 0; s < steps; ++s) {
            const double u = policy(x);
            cost += disc * (tables.interp_l(x) + slow.l_sc(x, u)) * dt;
            const double sc = slow.sigma_sc(x, u);
            const double a = tables.interp_a(x) + sc * sc;
            const double drift = tables.interp_mu(x) + slow.mu_sc(x, u);
            const ReflectedStep rs = step_reflected_slow(x, drift, std::sqrt(std::max(a, 0.0)),
                                                         dt, sqdt * normal(rng), slow.alpha);
            if (rs.reflected)
                cost += disc * (rs.x_new > 0.0 ? slow.h_plus : slow.h_minus) * rs.dl;
            x = rs.x_new;
            disc *= decay;
        }
        return cost;
    };
    return run_paths(n_paths, seed, threads, steps * dt, dt, path_cost, per_path_costs);
}

double truncation_horizon(double sup_cost, double beta, double tol) {
    if (beta <= 0.0 || tol <= 0.0)
        throw std::invalid_argument("truncation_horizon: beta and tol must be > 0");
    const double level = std::max(sup_cost / beta, 1.0);
    return 2.0 * std::log(level / tol) / beta;
}

}  // namespace msoc

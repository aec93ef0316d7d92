#include "msoc/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msoc {

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty()) throw std::runtime_error("interp: empty table");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - t) * ys[i - 1] + t * ys[i];
}

/// min over the control box of mu_sc g + (1/2) sigma_sc^2 H + l_sc.
double min_sc_bracket(const SlowSpec& slow, const ControlBox& control, double x, double g,
                      double H) {
    auto bracket = [&](double u) {
        const double s = slow.sigma_sc(x, u);
        return slow.mu_sc(x, u) * g + 0.5 * s * s * H + slow.l_sc(x, u);
    };
    if (slow.closed_form_f) {
        const double u_star = control.clamp(0.5 * slow.closed_form_f(x, g, H));
        return bracket(u_star);
    }
    // fallback: dense grid search when no closed form is attached
    const int n = 2001;
    double best = bracket(control.lo);
    for (int i = 1; i < n; ++i) {
        const double u = control.lo + (control.hi - control.lo) * i / (n - 1);
        best = std::min(best, bracket(u));
    }
    return best;
}

}  // namespace

double EffectiveTables::interp_mu(double x) const { return interp(x_nodes, mu_bar, x); }
double EffectiveTables::interp_a(double x) const { return interp(x_nodes, a_bar, x); }
double EffectiveTables::interp_l(double x) const { return interp(x_nodes, l_bar, x); }
double EffectiveTables::interp_kappa(double x) const { return interp(x_nodes, kappa, x); }

EffectiveTables effective_tables(const SlowSpec& slow, const std::vector<DensityField>& densities,
                                 const std::vector<double>& x_nodes) {
    if (densities.size() != x_nodes.size())
        throw std::invalid_argument("effective_tables: node/density count mismatch");
    EffectiveTables t;
    t.x_nodes = x_nodes;
    t.mu_bar.reserve(x_nodes.size());
    t.a_bar.reserve(x_nodes.size());
    t.l_bar.reserve(x_nodes.size());
    t.kappa.reserve(x_nodes.size());
    for (std::size_t i = 0; i < x_nodes.size(); ++i) {
        const double x = x_nodes[i];
        const DensityField& rho = densities[i];
        t.mu_bar.push_back(rho.integrate_against([&](const VectorXd& y) { return slow.mu_sf(x, y); }));
        t.a_bar.push_back(rho.integrate_against([&](const VectorXd& y) {
            const double s = slow.sigma_sf(x, y);
            return s * s;
        }));
        t.l_bar.push_back(rho.integrate_against([&](const VectorXd& y) { return slow.l_sf(x, y); }));
        t.kappa.push_back(rho.integrate_against(slow.kappa_integrand));
    }
    return t;
}

double effective_hamiltonian_quadrature(const HamiltonianPoint& p, const SlowSpec& slow,
                                        const DensityField& density, const ControlBox& control) {
    const double x = p.x_bar;
    const double mu = density.integrate_against([&](const VectorXd& y) { return slow.mu_sf(x, y); });
    const double a = density.integrate_against([&](const VectorXd& y) {
        const double s = slow.sigma_sf(x, y);
        return s * s;
    });
    const double l = density.integrate_against([&](const VectorXd& y) { return slow.l_sf(x, y); });
    return mu * p.g + 0.5 * a * p.H + l + min_sc_bracket(slow, control, x, p.g, p.H);
}

double effective_hamiltonian_from_tables(const EffectiveTables& tables, std::size_t node, double g,
                                         double H, const SlowSpec& slow,
                                         const ControlBox& control) {
    const double x = tables.x_nodes.at(node);
    return tables.mu_bar[node] * g + 0.5 * tables.a_bar[node] * H + tables.l_bar[node] +
           min_sc_bracket(slow, control, x, g, H);
}

LipschitzReport lipschitz_probe(const EffectiveTables& tables) {
    LipschitzReport r;
    for (std::size_t i = 1; i < tables.size(); ++i) {
        const double dx = tables.x_nodes[i] - tables.x_nodes[i - 1];
        r.mu_bar = std::max(r.mu_bar, std::abs(tables.mu_bar[i] - tables.mu_bar[i - 1]) / dx);
        r.a_bar = std::max(r.a_bar, std::abs(tables.a_bar[i] - tables.a_bar[i - 1]) / dx);
        r.l_bar = std::max(r.l_bar, std::abs(tables.l_bar[i] - tables.l_bar[i - 1]) / dx);
        r.kappa = std::max(r.kappa, std::abs(tables.kappa[i] - tables.kappa[i - 1]) / dx);
    }
    return r;
}

}  // namespace msoc

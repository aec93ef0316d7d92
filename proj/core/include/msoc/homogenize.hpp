#pragma once

#include <vector>

#include "msoc/density.hpp"
#include "msoc/model.hpp"

namespace msoc {

/// Effective drift, squared dispersion, running cost and kappa tabulated
/// on the slow grid.  a_bar = sigma_bar sigma_bar^T (scalar in 1D).
struct EffectiveTables {
    std::vector<double> x_nodes;
    std::vector<double> mu_bar;
    std::vector<double> a_bar;
    std::vector<double> l_bar;
    std::vector<double> kappa;

    std::size_t size() const { return x_nodes.size(); }

    /// Piecewise-linear interpolation between nodes (clamped at the ends).
    double interp_mu(double x) const;
    double interp_a(double x) const;
    double interp_l(double x) const;
    double interp_kappa(double x) const;
};

/// Slow-scale arguments of the Hamiltonian: first- and second-derivative
/// values at a point of the slow domain.
struct HamiltonianPoint {
    double x_bar = 0.0;
    double g = 0.0;  // first-derivative argument
    double H = 0.0;  // second-derivative argument
};

/// Rectangle-rule quadrature of the SF fields against each density.
EffectiveTables effective_tables(const SlowSpec& slow, const std::vector<DensityField>& densities,
                                 const std::vector<double>& x_nodes);

/// Effective Hamiltonian by the closed quadrature formula: the SC part is
/// minimized pointwise, the SF parts are averaged against the density.
double effective_hamiltonian_quadrature(const HamiltonianPoint& p, const SlowSpec& slow,
                                        const DensityField& density, const ControlBox& control);

/// Same decomposition evaluated from precomputed tables at a node index.
double effective_hamiltonian_from_tables(const EffectiveTables& tables, std::size_t node,
                                         double g, double H, const SlowSpec& slow,
                                         const ControlBox& control);

struct LipschitzReport {
    double mu_bar = 0.0;
    double a_bar = 0.0;
    double l_bar = 0.0;
    double kappa = 0.0;
};

/// Max |df/dx| finite-difference slope per effective table.
LipschitzReport lipschitz_probe(const EffectiveTables& tables);

}  // namespace msoc

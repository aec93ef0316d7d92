#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "msoc/scenario.hpp"

namespace msoc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Box of admissible controls, one [lo, hi] interval per control dimension.
struct ControlBox {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double u) const { return u >= lo && u <= hi; }
    double clamp(double u) const { return u < lo ? lo : (u > hi ? hi : u); }
};

/// Constraint function of the slow domain [-alpha, alpha] and its derivative:
///   phi(x)  = (1/2a) e^{a^2 - x^2} (x^2 - a^2)
///   phi'(x) = (x/a)  e^{a^2 - x^2} (1 + a^2 - x^2)
/// phi vanishes at +-alpha with |phi'| = 1 there.
std::pair<double, double> constraint_phi(double x, double alpha);

/// Decomposed slow dynamics and costs.  All SF fields are 1-periodic in
/// each fast coordinate; SC fields see only (x, u).
struct SlowSpec {
    double alpha = 1.0;
    std::function<double(double, const VectorXd&)> mu_sf;
    std::function<double(double, double)> mu_sc;
    std::function<double(double, const VectorXd&)> sigma_sf;
    std::function<double(double, double)> sigma_sc;
    std::function<double(double, const VectorXd&)> l_sf;
    std::function<double(double, double)> l_sc;
    double h_minus = 0.0;  // boundary cost at -alpha
    double h_plus = 0.0;   // boundary cost at +alpha
    // y-profile whose density average defines kappa (sin sin for the examples)
    std::function<double(const VectorXd&)> kappa_integrand;
    // f in the closed-form control minimizer u* = clamp(f/2): f(g) for the
    // semilinear example, f(g) - (1/2) sigma_X^2 x^2 H for the fully
    // nonlinear one.  Null when no closed form applies.
    std::function<double(double, double, double)> closed_form_f;  // (x, g, H)

    double phi(double x) const { return constraint_phi(x, alpha).first; }
    double dphi(double x) const { return constraint_phi(x, alpha).second; }
};

/// Frozen fast dynamics on the torus.  a_y = sigma_Y sigma_Y^T; disp_y is a
/// matrix square root of a_y used by path simulation.  slow_noise_loading is
/// the unit vector carrying the slow SF noise onto the fast Brownian
/// components; it determines the mixed x-y diffusion term.
struct FastSpec {
    int d_y = 2;
    std::function<VectorXd(double, const VectorXd&)> mu_y;
    std::function<MatrixXd(double, const VectorXd&)> a_y;
    std::function<MatrixXd(double, const VectorXd&)> disp_y;
    VectorXd slow_noise_loading;
    double ellipticity_floor = 0.0;
};

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    double worst_violation = 0.0;  // magnitude of the worst sampled violation
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_passed() const;
    std::string to_string() const;
};

/// Constructs the built-in example model selected by cfg.example_id.
std::pair<SlowSpec, FastSpec> build_example(const ScenarioConfig& cfg);

/// Samples the structural hypotheses (periodicity, uniform ellipticity,
/// non-correlation of the dispersion parts, the divergence condition, and
/// the constraint-function properties) at n_samples pseudo-random points.
ValidationReport validate_structure(const SlowSpec& slow, const FastSpec& fast,
                                    int n_samples, std::uint64_t seed);

}  // namespace msoc

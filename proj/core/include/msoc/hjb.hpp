#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "msoc/density.hpp"
#include "msoc/homogenize.hpp"
#include "msoc/model.hpp"
#include "msoc/scenario.hpp"

namespace msoc {

/// Control value per node of the owning value field (flat storage).
struct PolicyField {
    std::vector<double> u;
};

/// Effective value function on the slow grid with its extracted policy.
struct ValueField1D {
    std::vector<double> x_nodes;
    std::vector<double> v;
    PolicyField policy;
    double beta = 0.0;
    double residual = 0.0;  // final discrete-scheme residual (sup norm)
    int iterations = 0;
};

/// Multiscale value function on the product grid X x T^2.  Flat layout:
/// node(i, j, k) = (i * n + j) * n + k for slow index i and torus (j, k).
struct ValueField3D {
    std::vector<double> x_nodes;
    TorusGrid torus;
    std::vector<double> v;
    PolicyField policy;
    double epsilon = 0.0;
    double beta = 0.0;
    double residual = 0.0;
    int iterations = 0;
    double cross_to_diagonal_ratio = 0.0;  // monotonicity monitor for the mixed term

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * torus.n + j) * torus.n + k;
    }
};

/// Minimizer of u^2 - f u over the control box:
///   u* = clamp(f/2, lo, hi),  value = u*^2 - f u*.
/// f = 2 theta_d + theta_b g for example 1; example 2 subtracts the
/// second-order term from f.
std::pair<double, double> minimize_quadratic_control(double f, const ControlBox& control);

/// Exhaustive minimum over a uniform control grid of the full Hamiltonian
/// integrand at frozen derivatives; the general fallback when no closed form
/// applies.  With y supplied the SF fields enter; without, only SC terms.
std::pair<double, double> minimize_hamiltonian_grid(double x, double g, double H,
                                                    const SlowSpec& slow,
                                                    const std::optional<VectorXd>& y,
                                                    const ControlBox& control, int n_u);

/// Howard policy iteration on the monotone upwind scheme for the effective
/// 1D HJB with Neumann data -theta_e / +theta_e at the endpoints.
ValueField1D solve_effective_hjb(const EffectiveTables& tables, const SlowSpec& slow,
                                 const ControlBox& control, double beta, double theta_e,
                                 int n_slow, double tol);

/// Same architecture on X x T^2 with the fast generator scaled by 1/epsilon
/// and the mixed x-y term by 1/sqrt(epsilon).
ValueField3D solve_multiscale_hjb(const SlowSpec& slow, const FastSpec& fast,
                                  const ControlBox& control, double epsilon, double beta,
                                  double theta_e, int n_slow, const TorusGrid& torus, double tol);

struct ConvergenceRow {
    double epsilon = 0.0;
    double err_inf = 0.0;  // max_x |min_y v_eps - v_bar|
    double err_sup = 0.0;  // max_x |max_y v_eps - v_bar|
    double runtime_s = 0.0;
};

struct ConvergenceStudy {
    ValueField1D effective;
    std::vector<ConvergenceRow> rows;  // ordered by decreasing epsilon
};

/// Full convergence experiment: density sweep, effective tables, effective
/// solve, one multiscale solve per epsilon, relaxed-semilimit error metrics.
ConvergenceStudy convergence_study(const ScenarioConfig& cfg);

/// Max mismatch of the one-sided second-order boundary derivative vs the
/// Neumann data +-theta_e.
double check_neumann(const ValueField1D& v, double theta_e);
double check_neumann(const ValueField3D& v, double theta_e);

/// Per-node control from the closed-form minimizer applied to difference
/// quotients of the value field (second derivative included for example 2).
PolicyField markov_policy_from_value(const ValueField1D& v, const SlowSpec& slow,
                                     const ControlBox& control);
PolicyField markov_policy_from_value(const ValueField3D& v, const SlowSpec& slow,
                                     const ControlBox& control);

}  // namespace msoc

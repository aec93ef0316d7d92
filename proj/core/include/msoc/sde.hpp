#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "msoc/density.hpp"
#include "msoc/hjb.hpp"
#include "msoc/homogenize.hpp"
#include "msoc/model.hpp"

namespace msoc {

/// Mean +- stderr of a discounted path-cost estimate.
struct PathEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    double horizon = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

/// One projected Euler step of the reflected slow variable.
struct ReflectedStep {
    double x_new = 0.0;
    double dl = 0.0;  // local-time increment, positive only on reflection
    bool reflected = false;
};

/// Euler proposal followed by Skorokhod projection onto [-alpha, alpha];
/// dl is the projection distance (|dphi| = 1 on the boundary).
ReflectedStep step_reflected_slow(double x, double drift, double dispersion, double dt, double dW,
                                  double alpha);

/// Control law used along simulated paths: either a constant or a lookup
/// into a solved policy field.
using ControlLaw1D = std::function<double(double)>;           // u(x)
using ControlLaw3D = std::function<double(double, const VectorXd&)>;  // u(x, y)

ControlLaw1D constant_control(double u);
ControlLaw1D policy_interpolant(const ValueField1D& field);
ControlLaw3D policy_interpolant(const ValueField3D& field);

/// Discounted cost of the multiscale dynamics under the given control law.
/// Fast terms scaled 1/eps and 1/sqrt(eps); slow reflection by projection;
/// cost accumulation sum e^{-beta t_k} [L dt + h dl].
/// per_path_costs, when non-null, receives the n_paths discounted costs in
/// path order (independent of the thread count).
PathEstimate simulate_multiscale_cost(const SlowSpec& slow, const FastSpec& fast,
                                      const ControlLaw3D& policy, double epsilon, double x0,
                                      const VectorXd& y0, double beta, double T, double dt,
                                      long n_paths, std::uint64_t seed, int threads = 1,
                                      std::vector<double>* per_path_costs = nullptr);

/// Discounted cost of the effective dynamics (tables interpolated between
/// slow nodes) under the given control law.
PathEstimate simulate_effective_cost(const EffectiveTables& tables, const SlowSpec& slow,
                                     const ControlLaw1D& policy, double x0, double beta, double T,
                                     double dt, long n_paths, std::uint64_t seed, int threads = 1,
                                     std::vector<double>* per_path_costs = nullptr);

/// Truncation horizon making the discounted tail of the cost <= tol
/// (factor-2 safety margin included).
double truncation_horizon(double sup_cost, double beta, double tol);

}  // namespace msoc

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msoc/density.hpp"
#include "msoc/homogenize.hpp"
#include "msoc/model.hpp"

namespace msoc {

/// Time slices of the parabolic cell problem on the torus; w at t = 0 is
/// identically zero.
struct CellSolution {
    TorusGrid grid;
    std::vector<double> times;
    std::vector<VectorXd> w;  // one field per recorded time
    HamiltonianPoint p;
};

/// Running Hamiltonian of the cell problem at frozen (x_bar, y): the slow
/// generator at the given derivatives plus the running cost, minimized over
/// the control.  Equal to [SF terms](y) + min over u of [SC terms].
double frozen_running_hamiltonian(const HamiltonianPoint& p, const SlowSpec& slow,
                                  const ControlBox& control, const VectorXd& y);

/// Implicit-Euler integration of dw/dt = G_Y w + h_p with w(0) = 0.
/// Records the field roughly every unit of time plus the final time.
CellSolution solve_cell_t(const HamiltonianPoint& p, const FastSpec& fast, const SlowSpec& slow,
                          const ControlBox& control, const TorusGrid& grid, double T, double dt);

struct LongTimeEstimate {
    double estimate = 0.0;  // mean over y of w(T, y)/T
    double spread = 0.0;    // max - min over y of w(T, y)/T
    std::vector<double> times;
    std::vector<double> mean_w_over_t;
    std::vector<double> spread_over_t;
};

/// Long-time average estimate of the effective Hamiltonian with the
/// unique-ergodicity spread diagnostic.
LongTimeEstimate effective_hamiltonian_longtime(const HamiltonianPoint& p, const FastSpec& fast,
                                                const SlowSpec& slow, const ControlBox& control,
                                                const TorusGrid& grid, double T, double dt);

/// Monte Carlo estimate of w(T, y0) = integral of E[h_p(Y(s))] ds along
/// Euler-Maruyama fast paths; the oracle for solve_cell_t.
std::pair<double, double> feynman_kac_mc(const HamiltonianPoint& p, const FastSpec& fast,
                                         const SlowSpec& slow, const ControlBox& control,
                                         const VectorXd& y0, double T, double dt, long n_paths,
                                         std::uint64_t seed);

}  // namespace msoc

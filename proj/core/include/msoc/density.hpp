#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <vector>

#include "msoc/model.hpp"

namespace msoc {

using SparseMat = Eigen::SparseMatrix<double>;

/// Uniform periodic grid on [0,1)^{d_y} with n points per dimension.
struct TorusGrid {
    int d_y = 2;
    int n = 32;

    TorusGrid(int d_y_, int n_);

    double h() const { return 1.0 / n; }
    long size() const;  // n^{d_y}

    /// Flat index of a multi-index (wraps modulo n in every dimension).
    long index(const std::vector<int>& mi) const;
    std::vector<int> multi_index(long idx) const;
    VectorXd coordinate(long idx) const;  // node coordinate in [0,1)^{d_y}

    /// Neighbor of idx shifted by +-1 in dimension dim (periodic).
    long neighbor(long idx, int dim, int step) const;
};

/// Invariant density of the frozen fast dynamics at slow parameter x_bar,
/// positive and normalized to rectangle-rule integral 1.
struct DensityField {
    TorusGrid grid;
    VectorXd values;
    double x_bar = 0.0;
    double residual = 0.0;  // ||L^* rho||_inf of the discrete adjoint

    /// Rectangle-rule integral of f(y) * rho(y) over the torus.
    double integrate_against(const std::function<double(const VectorXd&)>& f) const;
    double mass() const;  // h^{d_y} * sum(values)
};

/// Discrete generator of the frozen fast SDE on the torus and its adjoint.
/// Row convention: (L f)(node i) = sum_j L(i,j) f(node j); the adjoint
/// (Fokker-Planck) operator is the matrix transpose.
struct GeneratorMatrix {
    TorusGrid grid;
    SparseMat L;
    SparseMat adjoint() const { return SparseMat(L.transpose()); }
};

/// Upwind drift + central diffusion discretization of the generator.
/// Cross-derivative terms of a_y use the centered 4-point stencil; the
/// monotone-stencil invariant holds for diagonal a_y.
GeneratorMatrix assemble_generator(const FastSpec& fast, double x_bar, const TorusGrid& grid);

/// Stationary Fokker-Planck solve: nullspace of the adjoint with one row
/// replaced by the normalization constraint, direct sparse factorization,
/// inverse-power fallback if ill-conditioned.
DensityField solve_invariant_density(const FastSpec& fast, double x_bar,
                                     const TorusGrid& grid, double tol);

/// Independent solves over a list of slow nodes, order-deterministic.
std::vector<DensityField> density_sweep(const FastSpec& fast, const std::vector<double>& x_nodes,
                                        const TorusGrid& grid, double tol);

struct ParameterDerivative {
    VectorXd derivative;      // finite-difference quotient of densities
    double residual = 0.0;    // ||L^* drho + f^k||_inf against the derivative PDE
    double integral = 0.0;    // rectangle sum of the quotient (should be 0)
};

/// Central difference quotient of the density in the slow parameter and the
/// residual of the limiting PDE -L^* drho = f^k, where f^k is assembled from
/// the x-derivative of the adjoint operator applied to rho.
ParameterDerivative fd_parameter_derivative(const FastSpec& fast, double x_bar, double step,
                                            const TorusGrid& grid, double tol);

/// Normalized occupation histogram of one long Euler-Maruyama trajectory
/// with periodic wrapping; the Monte Carlo oracle for invariant densities.
DensityField occupation_measure_mc(const FastSpec& fast, double x_bar, double horizon,
                                   double dt, std::uint64_t seed, const TorusGrid& grid);

/// L1 distance between two fields on the same grid (rectangle rule).
double density_l1_distance(const DensityField& a, const DensityField& b);

}  // namespace msoc

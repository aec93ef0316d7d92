#include "msoc/density.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <future>
#include <stdexcept>

#include "msoc/rng.hpp"

namespace msoc {

TorusGrid::TorusGrid(int d_y_, int n_) : d_y(d_y_), n(n_) {
    if (n < 4) throw std::invalid_argument("TorusGrid: n must be >= 4");
    if (d_y < 1) throw std::invalid_argument("TorusGrid: d_y must be >= 1");
}

long TorusGrid::size() const {
    long s = 1;
    for (int i = 0; i < d_y; ++i) s *= n;
    return s;
}

long TorusGrid::index(const std::vector<int>& mi) const {
    long idx = 0;
    for (int i = 0; i < d_y; ++i) {
        int c = mi[i] % n;
        if (c < 0) c += n;
        idx = idx * n + c;
    }
    return idx;
}

std::vector<int> TorusGrid::multi_index(long idx) const {
    std::vector<int> mi(d_y);
    for (int i = d_y - 1; i >= 0; --i) {
        mi[i] = static_cast<int>(idx % n);
        idx /= n;
    }
    return mi;
}

VectorXd TorusGrid::coordinate(long idx) const {
    auto mi = multi_index(idx);
    VectorXd y(d_y);
    for (int i = 0; i < d_y; ++i) y[i] = mi[i] * h();
    return y;
}

long TorusGrid::neighbor(long idx, int dim, int step) const {
    auto mi = multi_index(idx);
    mi[dim] += step;
    return index(mi);
}

double DensityField::integrate_against(const std::function<double(const VectorXd&)>& f) const {
    double s = 0.0;
    for (long i = 0; i < grid.size(); ++i) s += f(grid.coordinate(i)) * values[i];
    return s * std::pow(grid.h(), grid.d_y);
}

double DensityField::mass() const {
    return values.sum() * std::pow(grid.h(), grid.d_y);
}

GeneratorMatrix assemble_generator(const FastSpec& fast, double x_bar, const TorusGrid& grid) {
    const long N = grid.size();
    const double h = grid.h();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(N) * (1 + 4 * grid.d_y));

    for (long row = 0; row < N; ++row) {
        const VectorXd y = grid.coordinate(row);
        const VectorXd mu = fast.mu_y(x_bar, y);
        const MatrixXd a = fast.a_y(x_bar, y);
        for (int i = 0; i < grid.d_y; ++i)
            if (a(i, i) < -1e-14)
                throw std::runtime_error("assemble_generator: negative diagonal diffusion entry");

        double diag = 0.0;
        for (int i = 0; i < grid.d_y; ++i) {
            const long up = grid.neighbor(row, i, +1);
            const long dn = grid.neighbor(row, i, -1);
            // upwind first-order drift
            const double m = mu[i];
            if (m >= 0.0) {
                trip.emplace_back(row, up, m / h);
                diag -= m / h;
            } else {
                trip.emplace_back(row, dn, -m / h);
                diag += m / h;
            }
            // central second-order diffusion
            const double d = 0.5 * a(i, i) / (h * h);
            trip.emplace_back(row, up, d);
            trip.emplace_back(row, dn, d);
            diag -= 2.0 * d;
            // centered 4-point cross terms (monotone only for dominant diagonals)
            for (int j = i + 1; j < grid.d_y; ++j) {
                const double c = a(i, j) / (4.0 * h * h);
                if (c == 0.0) continue;
                trip.emplace_back(row, grid.neighbor(grid.neighbor(row, i, +1), j, +1), c);
                trip.emplace_back(row, grid.neighbor(grid.neighbor(row, i, -1), j, -1), c);
                trip.emplace_back(row, grid.neighbor(grid.neighbor(row, i, +1), j, -1), -c);
                trip.emplace_back(row, grid.neighbor(grid.neighbor(row, i, -1), j, +1), -c);
            }
        }
        trip.emplace_back(row, row, diag);
    }

    GeneratorMatrix gen{grid, SparseMat(N, N)};
    gen.L.setFromTriplets(trip.begin(), trip.end());
    gen.L.makeCompressed();
    return gen;
}

namespace {

double adjoint_residual(const SparseMat& adj, const VectorXd& rho) {
    return (adj * rho).cwiseAbs().maxCoeff();
}

/// Shifted inverse power iteration fallback for ill-conditioned direct solves.
VectorXd inverse_power_density(const SparseMat& adj, double cell_volume, int iters) {
    const long N = adj.rows();
    SparseMat shifted = adj;
    const double shift = 1e-10;
    for (long i = 0; i < N; ++i) shifted.coeffRef(i, i) -= shift;
    Eigen::SparseLU<SparseMat> lu(shifted);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_invariant_density: inverse-power factorization failed");
    VectorXd v = VectorXd::Constant(N, 1.0);
    VectorXd rhs(N);
    for (int k = 0; k < iters; ++k) {
        rhs = v;  // lu.solve must not alias its rhs
        v = lu.solve(rhs);
        v /= v.cwiseAbs().maxCoeff();
    }
    v /= v.sum() * cell_volume;
    return v;
}

}  // namespace

DensityField solve_invariant_density(const FastSpec& fast, double x_bar, const TorusGrid& grid,
                                     double tol) {
    GeneratorMatrix gen = assemble_generator(fast, x_bar, grid);
    SparseMat adj = gen.adjoint();
    const long N = grid.size();
    const double cell = std::pow(grid.h(), grid.d_y);

    // singular adjoint system with the last row replaced by normalization
    SparseMat sys = adj;
    sys = sys.pruned();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.nonZeros() + N);
    for (int k = 0; k < sys.outerSize(); ++k)
        for (SparseMat::InnerIterator it(sys, k); it; ++it)
            if (it.row() != N - 1) trip.emplace_back(it.row(), it.col(), it.value());
    for (long j = 0; j < N; ++j) trip.emplace_back(N - 1, j, cell);
    SparseMat constrained(N, N);
    constrained.setFromTriplets(trip.begin(), trip.end());
    constrained.makeCompressed();

    VectorXd rhs = VectorXd::Zero(N);
    rhs[N - 1] = 1.0;

    Eigen::SparseLU<SparseMat> lu(constrained);
    VectorXd rho;
    if (lu.info() == Eigen::Success) {
        rho = lu.solve(rhs);
    }
    if (lu.info() != Eigen::Success || !rho.allFinite() ||
        adjoint_residual(adj, rho) > std::max(tol, 1e-8)) {
        rho = inverse_power_density(adj, cell, 50);
    }

    DensityField field{grid, rho, x_bar, adjoint_residual(adj, rho)};
    if (field.residual > std::max(tol, 1e-8))
        throw std::runtime_error("solve_invariant_density: residual " +
                                 std::to_string(field.residual) + " exceeds tolerance");
    if (rho.minCoeff() <= 0.0)
        throw std::runtime_error(
            "solve_invariant_density: nonpositive density (non-monotone discretization or grid "
            "too coarse)");
    if (std::abs(field.mass() - 1.0) > std::max(tol, 1e-10))
        throw std::runtime_error("solve_invariant_density: normalization failed");
    return field;
}

std::vector<DensityField> density_sweep(const FastSpec& fast, const std::vector<double>& x_nodes,
                                        const TorusGrid& grid, double tol) {
    std::vector<DensityField> out;
    out.reserve(x_nodes.size());
    for (double x : x_nodes) {
        try {
            out.push_back(solve_invariant_density(fast, x, grid, tol));
        } catch (const std::exception& e) {
            throw std::runtime_error("density_sweep at x_bar=" + std::to_string(x) + ": " +
                                     e.what());
        }
    }
    return out;
}

ParameterDerivative fd_parameter_derivative(const FastSpec& fast, double x_bar, double step,
                                            const TorusGrid& grid, double tol) {
    DensityField plus = solve_invariant_density(fast, x_bar + step, grid, tol);
    DensityField minus = solve_invariant_density(fast, x_bar - step, grid, tol);
    DensityField center = solve_invariant_density(fast, x_bar, grid, tol);
    VectorXd quotient = (plus.values - minus.values) / (2.0 * step);

    // f^k from the x-derivative of the adjoint operator applied to rho;
    // the operator derivative is taken with an independent (small) step
    SparseMat adj0 = assemble_generator(fast, x_bar, grid).adjoint();
    const double dx = 1e-6;
    SparseMat adj_p = assemble_generator(fast, x_bar + dx, grid).adjoint();
    SparseMat adj_m = assemble_generator(fast, x_bar - dx, grid).adjoint();
    VectorXd fk = ((adj_p - adj_m) * center.values) / (2.0 * dx);

    ParameterDerivative out;
    out.derivative = quotient;
    out.residual = (adj0 * quotient + fk).cwiseAbs().maxCoeff();
    out.integral = quotient.sum() * std::pow(grid.h(), grid.d_y);
    return out;
}

DensityField occupation_measure_mc(const FastSpec& fast, double x_bar, double horizon, double dt,
                                   std::uint64_t seed, const TorusGrid& grid) {
    const long steps = static_cast<long>(horizon / dt);
    const long N = grid.size();
    VectorXd counts = VectorXd::Zero(N);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    VectorXd y = VectorXd::Constant(grid.d_y, 0.5);
    const double sqdt = std::sqrt(dt);
    std::vector<int> mi(grid.d_y);
    VectorXd xi(grid.d_y);
    for (long s = 0; s < steps; ++s) {
        const VectorXd mu = fast.mu_y(x_bar, y);
        const MatrixXd disp = fast.disp_y(x_bar, y);
        for (int i = 0; i < grid.d_y; ++i) xi[i] = normal(rng);
        y += mu * dt + disp * (sqdt * xi);
        for (int i = 0; i < grid.d_y; ++i) {
            y[i] -= std::floor(y[i]);
            mi[i] = static_cast<int>(y[i] * grid.n);
            if (mi[i] >= grid.n) mi[i] = grid.n - 1;
        }
        counts[grid.index(mi)] += 1.0;
    }
    counts /= static_cast<double>(steps) * std::pow(grid.h(), grid.d_y);
    return DensityField{grid, counts, x_bar, 0.0};
}

double density_l1_distance(const DensityField& a, const DensityField& b) {
    return (a.values - b.values).cwiseAbs().sum() * std::pow(a.grid.h(), a.grid.d_y);
}

}  // namespace msoc

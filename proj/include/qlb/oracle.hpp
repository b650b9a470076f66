#pragma once

// Brute-force references for the tests. Nothing here calls into the lattice
// or scheme code: shifts are rebuilt as explicit permutation matrices and all
// exponentials use a plain Taylor series.

#include "qlb/algebra.hpp"
#include "qlb/lattice.hpp"
#include "qlb/physics.hpp"
#include "qlb/scheme.hpp"

#include <Eigen/Dense>

#include <vector>

namespace qlb::oracle {

/// Matrix on the flattened field: index 4 * site + component.
using DenseOperator = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxDenseSites = 32;

/// Scaling-and-squaring Taylor series: scale so ||M / 2^s||_1 <= 0.5, sum terms
/// until the term norm drops below 1e-18, square back.
Complex4x4 series_expm(const Complex4x4 &m);

DenseVector flatten(const SpinorField &field);
SpinorField unflatten(const DenseVector &v, const Grid &grid, double dt);

/// Product of (S_a P_a S_a^{-1}) over the axes, rightmost factor first.
DenseOperator dense_streaming(const Grid &grid, const DiracSet &set, const std::vector<Axis> &axes);

/// Block-diagonal per-site collision. For NJL the densities are evaluated on
/// `density_source`; other models ignore it.
DenseOperator dense_collision(const Grid &grid, const DiracSet &set, const CollisionModel &model,
                              double t, double dt, const SpinorField *density_source = nullptr);

/// C (S_z P_z S_z^-1)(S_y P_y S_y^-1)(S_x P_x S_x^-1) restricted to the plan's axes.
/// Throws std::invalid_argument for grids with more than 32 sites.
DenseOperator dense_split_step(const Grid &grid, const DiracSet &set, const CollisionModel &model,
                               const std::vector<Axis> &axes, double t, double dt,
                               const SpinorField *density_source = nullptr);

/// Continuum phase exp(-iET) (particle) or exp(+iET) (antiparticle), E = sqrt(k² + m²).
cplx analytic_free_evolution(double k, double mass, Branch branch, double time);

} // namespace qlb::oracle

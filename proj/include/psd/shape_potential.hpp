#pragma once

#include "psd/shape_space.hpp"

namespace psd {

/// Scale-free shape potential C(q) = V(r) / (beta L^k) for the homogeneous
/// family V = -beta sum_{i<j} mu_i mu_j (r_ij^2 + softening^2 L^2)^(k/2).
/// Negative definite; for Newtonian gravity (k = -1) it deepens toward
/// two-body collisions, so -C measures clustering.
///
/// Throws CollisionSingularity when softening == 0 and the shape is within
/// collision_tol of a two-body collision.
double shape_potential(const ShapePoint& q, const MassProfile& masses,
                       const PotentialSpec& spec);

/// Euclidean-tangential gradient of C on the unit-sphere chart
/// (the metric gradient w.r.t. the radius-1/2 kinematic metric is 4x this).
/// Sphere chart only; general-chart gradients go through
/// shape_potential_cartesian_gradient.
Vec3 shape_potential_gradient(const ShapePoint& q, const MassProfile& masses,
                              const PotentialSpec& spec);

/// C evaluated directly from Cartesian positions (any chart, any N):
/// C = V(r) / (beta L^k).
double shape_potential_cartesian(const Configuration& config, const PotentialSpec& spec);

/// dC/dr_i for a Cartesian configuration. Orthogonal (mass-weighted) to
/// all similarity-gauge directions since C lives on the quotient.
std::vector<Eigen::VectorXd> shape_potential_cartesian_gradient(const Configuration& config,
                                                                const PotentialSpec& spec);

/// Physical potential V(L, q) = beta L^k C(q) of a configuration.
double potential_energy(const Configuration& config, const PotentialSpec& spec);

/// Minimum representative pair distance below which an unsoftened
/// evaluation is treated as a collision singularity.
inline constexpr double collision_tol = 1e-9;

}  // namespace psd

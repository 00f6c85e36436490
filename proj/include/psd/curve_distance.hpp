#pragma once

#include <vector>

#include "psd/types.hpp"

namespace psd {

/// One-sided Hausdorff distance from points of `a` to the polyline `b`,
/// both on the unit-sphere chart, measured in the kinematic metric
/// (radius-1/2 great-circle distance). Parametrization-free: only the
/// point sets and segment structure enter.
double one_sided_hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Kinematic great-circle distance between two unit vectors.
double sphere_distance(const Vec3& a, const Vec3& b);

}  // namespace psd

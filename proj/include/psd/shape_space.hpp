#pragma once

#include <complex>
#include <optional>

#include "psd/types.hpp"

namespace psd {

/// Chart used to represent a point of shape space.
///
/// Sphere3Body: the planar 3-body shape sphere. Coordinates are a unit
/// 3-vector n; the kinematic metric makes it a round sphere of radius 1/2.
/// Binary collisions sit on the equator great circle n3 = 0 together with
/// all collinear shapes; the two equilateral shapes are the poles.
///
/// General: a gauge-fixed normalized representative (centered, L = 1,
/// dominant principal axis aligned with the first coordinate axis, signs
/// fixed by odd moments). Supports projection, potentials and distances
/// for any N >= 3, d in {2,3}; the dynamics modules use the sphere chart.
enum class Chart { Sphere3Body, General };

class ShapePoint {
  public:
    static ShapePoint sphere(const Vec3& n);
    static ShapePoint general(std::vector<Eigen::VectorXd> rep, int dim);

    Chart chart() const { return chart_; }

    /// Sphere-chart coordinates (unit vector). Throws IncompatibleCharts
    /// on a general-chart point.
    const Vec3& sphere_coords() const;

    /// Gauge-fixed L = 1 representative (general chart).
    const std::vector<Eigen::VectorXd>& representative() const;
    int dim() const { return dim_; }

  private:
    Chart chart_ = Chart::Sphere3Body;
    Vec3 n_ = Vec3::UnitZ();
    std::vector<Eigen::VectorXd> rep_;
    int dim_ = 2;
};

/// Mass-weighted planar Jacobi coordinates of a 3-body configuration,
/// packed as two complex numbers. |z1|^2 + |z2|^2 = L^2.
struct JacobiPair {
    std::complex<double> z1;
    std::complex<double> z2;
};

JacobiPair jacobi_coordinates(const Configuration& config);

/// Jacobi velocities for the matching velocity set (same weights).
JacobiPair jacobi_coordinates(const MassProfile& masses,
                              const std::vector<Eigen::VectorXd>& planar_vectors);

/// Hopf point of a planar 3-body configuration:
///   n = (2 Re(z1 conj(z2)), |z1|^2 - |z2|^2, 2 Im(z1 conj(z2))) / L^2.
/// Invariant under translations, rotations and dilations of the input.
Vec3 hopf_point(const JacobiPair& z);

/// Time derivative dn/dt given Jacobi coordinates and velocities.
Vec3 hopf_velocity(const JacobiPair& z, const JacobiPair& zdot);

/// Quotient map. Planar 3-body inputs land on the sphere chart; anything
/// else gets the gauge-fixed general chart.
/// Throws DegenerateInput (N < 3) and TotalCollision (L = 0).
ShapePoint project_to_shape(const Configuration& config);

/// Reconstructs the canonical L = 1 planar representative of a sphere-chart
/// point (inverse Hopf map through a fixed section).
Configuration representative_configuration(const ShapePoint& q, const MassProfile& masses);

/// Kinematic (similarity-invariant) distance between two shapes.
/// Sphere chart: geodesic distance on the radius-1/2 round sphere.
/// General chart: mass-weighted chordal distance after optimal rotation.
double shape_distance(const ShapePoint& a, const ShapePoint& b,
                      const MassProfile& masses);

/// Kinematic metric components at a shape, as a matrix in an explicit
/// chart together with its inverse.
struct KinematicMetric {
    Eigen::MatrixXd g;
    Eigen::MatrixXd g_inv;
};

/// Sphere chart: components in local (theta, phi) spherical coordinates,
/// g = diag(1/4, sin(theta)^2 / 4). The chart is singular at the poles
/// (sin(theta) = 0) although the metric itself is not.
/// Throws CollisionSingularity if q sits on a two-body collision point and
/// spec.softening == 0.
KinematicMetric kinematic_metric_at(const ShapePoint& q, const MassProfile& masses,
                                    const PotentialSpec& spec = {});

/// Spherical angles (theta, phi) of a sphere-chart point, theta from +n3.
Eigen::Vector2d sphere_angles(const Vec3& n);
Vec3 sphere_from_angles(double theta, double phi);

/// Local orthonormal-in-R3 tangent frame at n: (e_theta, e_phi).
/// Undefined at the poles; a deterministic fallback frame is used there.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& n);

/// Squared pair separations of the L = 1 representative as affine
/// functions of the sphere point: r_ij^2(n) = a_ij + b_ij . n.
/// Order: (1,2), (1,3), (2,3).
struct PairSeparations {
    std::array<double, 3> a;
    std::array<Vec3, 3> b;
    std::array<double, 3> value(const Vec3& n) const {
        return {a[0] + b[0].dot(n), a[1] + b[1].dot(n), a[2] + b[2].dot(n)};
    }
};

PairSeparations pair_separations(const MassProfile& masses);

/// Sphere-chart coordinates of the two-body collision shapes (r_ij = 0),
/// order (1,2), (1,3), (2,3).
std::array<Vec3, 3> collision_points(const MassProfile& masses);

}  // namespace psd

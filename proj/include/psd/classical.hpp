#pragma once

#include <vector>

#include "psd/shape_potential.hpp"
#include "psd/ode.hpp"

namespace psd {

/// Unit tangent on the shape sphere. Stored as the embedded R^3 vector u
/// with n.u = 0 and |u| = 2, which is unit length with respect to the
/// radius-1/2 kinematic metric (g(u,u) = |u|^2/4 = 1).
class Direction {
  public:
    Direction() = default;
    /// Projects tangent to n and normalizes to kinematic unit length.
    Direction(const Vec3& n, const Vec3& u_raw);

    const Vec3& embedded() const { return u_; }

    /// Chart angle phi of the direction in the (e_theta, e_phi) frame at n.
    double angle(const Vec3& n) const;

    static Direction from_angle(const Vec3& n, double phi);

  private:
    Vec3 u_ = Vec3::UnitX() * 2.0;
};

/// One integration state of the N-body equation of state: shape, direction,
/// intrinsic acceleration kappa and the branch of epsilon = D/p.
struct ClassicalCurveState {
    ShapePoint q;
    Direction dir;
    double kappa = 1.0;
    int eps_sign = +1;
};

/// One accepted integration step. s is the accumulated arc length in the
/// kinematic metric; it is a computational gauge label only, never part of
/// curve identity (all curve comparisons are parametrization-free).
struct CurveSample {
    double s = 0.0;
    Vec3 n = Vec3::UnitZ();
    Vec3 u = Vec3::UnitX() * 2.0;
    double kappa = 1.0;
    double epsilon = 0.0;         // branch-signed, from the energy constraint
    double C = 0.0;               // shape potential at n
    double dlogp_ds = 0.0;        // -(1/kappa) u^a C_,a, for the ephemeris quadrature
    double residual = 0.0;        // |1 + eps^2 + 2C/kappa| of the shadow epsilon
    bool branch_crossing = false; // marks a located epsilon = 0 (Janus) point
};

/// epsilon = sign * sqrt(-(1 + 2 C / kappa)), the ratio D/p fixed up to
/// sign by the E = 0 constraint.
/// Throws ConstraintViolation when 1 + 2C/kappa > tol (radicand negative
/// beyond tolerance, i.e. the state is off the constraint surface).
double epsilon(double kappa, double C, int sign, double tol = 1e-6);

struct ClassicalRhs {
    Vec3 dn;
    Vec3 du;
    double dkappa;
};

/// Geodesic equation of state on the shape sphere: dn = u, du = -4 n
/// (pure normal component; the tangential part of du vanishes, i.e. u is
/// parallel-transported).
ClassicalRhs geodesic_rhs(const ShapePoint& q, const Direction& dir);

/// Newtonian E = 0 equation of state:
///   dn     = u
///   du     = -4 n - (1/kappa) (4 gradC - (u.gradC) u)
///   dkappa = -(k+2) kappa eps - 2 u.gradC
/// with gradC the Euclidean-tangential gradient of C on the unit-sphere
/// chart (the kinematic-metric gradient is 4 gradC) and eps from the
/// constraint with the state's branch sign.
ClassicalRhs nbody_rhs(const ClassicalCurveState& state, const MassProfile& masses,
                       const PotentialSpec& spec);

struct IntegrationControls {
    OdeControls ode;
    double tol_constraint = 1e-6;
    /// Abort (throw) when the shadow-epsilon residual exceeds tol_constraint.
    bool abort_on_constraint = true;
};

enum class CurveModel { Geodesic, Nbody };

struct CurveResult {
    std::vector<CurveSample> samples;
    double max_residual = 0.0;
    long accepted_steps = 0;
    std::vector<double> crossings;  // arc lengths of located Janus points
};

/// Integrates the equation of state over a signed arc-length span.
///
/// The ODE state is (n, u, kappa, eps_shadow). The dynamics closes epsilon
/// through the constraint each evaluation; eps_shadow integrates the
/// equivalent evolution law d eps = -(k+2) C / kappa + (eps/kappa) u.gradC
/// independently, so |1 + eps_shadow^2 + 2C/kappa| is a genuine drift
/// monitor (it is identically zero for the constraint-closed epsilon).
/// u and n are renormalized after every accepted step. Zero crossings of
/// eps_shadow are located by bisection on the dense interpolant to 1e-10
/// in s; the branch sign flips there and integration restarts from the
/// crossing, which keeps dkappa continuous.
CurveResult integrate_curve(const ClassicalCurveState& initial, double span,
                            const MassProfile& masses, const PotentialSpec& spec,
                            const IntegrationControls& controls,
                            CurveModel model = CurveModel::Nbody);

/// Builds a constraint-consistent state from (q, phi, kappa): epsilon is
/// fixed up to the given sign by the constraint.
ClassicalCurveState seed_from_shape(const ShapePoint& q, const Direction& dir, double kappa,
                                    int eps_sign, const MassProfile& masses,
                                    const PotentialSpec& spec, double tol = 1e-6);

/// Cartesian observables entering the seeding and the oracle comparison.
struct CartesianObservables {
    double L = 0.0;       // mass-weighted scale
    double D = 0.0;       // dilatational momentum sum mu r.v
    double p = 0.0;       // shape momentum length L^2 |dn/dt|_g
    double E = 0.0;       // total energy
    double J = 0.0;       // angular momentum (planar scalar)
    double C = 0.0;       // shape potential
    double kappa = 0.0;   // p^2 / (beta L^{k+2})
    double epsilon = 0.0; // D/p
};

CartesianObservables cartesian_observables(const Configuration& config,
                                           const std::vector<Eigen::VectorXd>& velocities,
                                           const PotentialSpec& spec);

/// Exact seeding of the equation of state from planar 3-body Cartesian
/// data: q from the Hopf map, u from dn/dt, kappa = p^2/(beta L^{k+2}),
/// eps_sign = sign(D). The data should satisfy E = 0, P = 0, J = 0; the
/// constraint residual of the seed reflects any violation.
ClassicalCurveState seed_from_cartesian(const Configuration& config,
                                        const std::vector<Eigen::VectorXd>& velocities,
                                        const PotentialSpec& spec);

}  // namespace psd

#include "psd/classical.hpp"

#include <cmath>

namespace psd {

namespace {

/// Packs (n, u, kappa, eps_shadow) into the ODE state vector.
Eigen::VectorXd pack(const Vec3& n, const Vec3& u, double kappa, double eps) {
    Eigen::VectorXd y(8);
    y << n, u, kappa, eps;
    return y;
}

void renormalize(Eigen::VectorXd& y) {
    Vec3 n = y.segment<3>(0);
    n.normalize();
    Vec3 u = y.segment<3>(3);
    u -= n * u.dot(n);
    u *= 2.0 / u.norm();
    y.segment<3>(0) = n;
    y.segment<3>(3) = u;
}

}  // namespace

Direction::Direction(const Vec3& n, const Vec3& u_raw) {
    Vec3 u = u_raw - n * u_raw.dot(n);
    const double len = u.norm();
    if (len < 1e-14)
        throw DegenerateInput("direction: tangent projection vanishes");
    u_ = u * (2.0 / len);
}

double Direction::angle(const Vec3& n) const {
    const auto [etheta, ephi] = tangent_frame(n);
    return std::atan2(u_.dot(ephi), u_.dot(etheta));
}

Direction Direction::from_angle(const Vec3& n, double phi) {
    const auto [etheta, ephi] = tangent_frame(n);
    return Direction(n, std::cos(phi) * etheta + std::sin(phi) * ephi);
}

double epsilon(double kappa, double C, int sign, double tol) {
    if (kappa < 1e-12) throw KappaUnderflow("epsilon: kappa underflow");
    const double excess = 1.0 + 2.0 * C / kappa;  // must be <= 0 on the constraint
    if (excess > tol)
        throw ConstraintViolation(
            "epsilon: energy constraint unsatisfiable, 1 + 2C/kappa = " + std::to_string(excess),
            excess, 0.0);
    return static_cast<double>(sign) * std::sqrt(std::max(0.0, -excess));
}

ClassicalRhs geodesic_rhs(const ShapePoint& q, const Direction& dir) {
    ClassicalRhs r;
    r.dn = dir.embedded();
    r.du = -4.0 * q.sphere_coords();
    r.dkappa = 0.0;
    return r;
}

ClassicalRhs nbody_rhs(const ClassicalCurveState& state, const MassProfile& masses,
                       const PotentialSpec& spec) {
    const Vec3& n = state.q.sphere_coords();
    const Vec3& u = state.dir.embedded();
    const double C = shape_potential(state.q, masses, spec);
    const Vec3 gC = shape_potential_gradient(state.q, masses, spec);
    const double eps = epsilon(state.kappa, C, state.eps_sign);
    ClassicalRhs r;
    r.dn = u;
    r.du = -4.0 * n - (1.0 / state.kappa) * (4.0 * gC - u.dot(gC) * u);
    r.dkappa = -(spec.k + 2.0) * state.kappa * eps - 2.0 * u.dot(gC);
    return r;
}

CurveResult integrate_curve(const ClassicalCurveState& initial, double span,
                            const MassProfile& masses, const PotentialSpec& spec,
                            const IntegrationControls& controls, CurveModel model) {
    const bool nbody = (model == CurveModel::Nbody);
    const PairSeparations ps = nbody ? pair_separations(masses) : PairSeparations{};
    const double s2 = spec.softening * spec.softening;
    const double gamma = spec.k + 2.0;

    int sign = initial.eps_sign;
    auto eval_potential = [&](const Vec3& n, double& C, Vec3& gC) {
        const auto r2 = ps.value(n);
        if (spec.softening == 0.0)
            for (double v : r2)
                if (v < collision_tol * collision_tol)
                    throw CollisionSingularity("equation of state at an unsoftened collision");
        C = 0.0;
        gC.setZero();
        const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
        for (std::size_t t = 0; t < 3; ++t) {
            const double mm = masses[pairs[t].first] * masses[pairs[t].second];
            const double f = std::pow(r2[t] + s2, 0.5 * spec.k);
            C -= mm * f;
            gC -= mm * (0.5 * spec.k) * f / (r2[t] + s2) * ps.b[t];
        }
        const Vec3 nn = n.normalized();
        gC -= nn * gC.dot(nn);
    };

    auto rhs = [&](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Vec3 n = y.segment<3>(0);
        const Vec3 u = y.segment<3>(3);
        dy.segment<3>(0) = u;
        if (!nbody) {
            dy.segment<3>(3) = -4.0 * n;
            dy[6] = 0.0;
            dy[7] = 0.0;
            return;
        }
        const double kappa = y[6];
        if (kappa < 1e-12) throw KappaUnderflow("equation of state: kappa underflow");
        double C;
        Vec3 gC;
        eval_potential(n, C, gC);
        const double excess = 1.0 + 2.0 * C / kappa;
        if (excess > controls.tol_constraint)
            throw ConstraintViolation(
                "equation of state: constraint radicand negative at s = " + std::to_string(s),
                excess, s);
        const double eps = static_cast<double>(sign) * std::sqrt(std::max(0.0, -excess));
        const double udotg = u.dot(gC);
        dy.segment<3>(3) = -4.0 * n - (1.0 / kappa) * (4.0 * gC - udotg * u);
        dy[6] = -gamma * kappa * eps - 2.0 * udotg;
        dy[7] = -gamma * C / kappa + y[7] / kappa * udotg;  // shadow epsilon
    };

    CurveResult result;
    auto record = [&](double s, const Eigen::VectorXd& y, bool crossing) {
        CurveSample smp;
        smp.s = s;
        smp.n = y.segment<3>(0).normalized();
        smp.u = y.segment<3>(3);
        smp.branch_crossing = crossing;
        if (nbody) {
            smp.kappa = y[6];
            double C;
            Vec3 gC;
            eval_potential(smp.n, C, gC);
            smp.C = C;
            const double excess = 1.0 + 2.0 * C / smp.kappa;
            smp.epsilon = static_cast<double>(sign) * std::sqrt(std::max(0.0, -excess));
            smp.dlogp_ds = -smp.u.dot(gC) / smp.kappa;
            smp.residual = std::abs(1.0 + y[7] * y[7] + 2.0 * C / smp.kappa);
            result.max_residual = std::max(result.max_residual, smp.residual);
            if (controls.abort_on_constraint && smp.residual > controls.tol_constraint)
                throw ConstraintViolation(
                    "equation of state: constraint drift " + std::to_string(smp.residual) +
                        " at s = " + std::to_string(s),
                    smp.residual, s);
        } else {
            smp.kappa = std::numeric_limits<double>::infinity();
            smp.epsilon = 0.0;
            smp.C = 0.0;
            smp.dlogp_ds = 0.0;
            smp.residual = 0.0;
        }
        result.samples.push_back(std::move(smp));
    };

    const Vec3 n0 = initial.q.sphere_coords();
    Eigen::VectorXd y = pack(n0, initial.dir.embedded(), nbody ? initial.kappa : 1.0, 0.0);
    if (nbody) {
        const double C0 = shape_potential(initial.q, masses, spec);
        y[7] = epsilon(initial.kappa, C0, sign, controls.tol_constraint);
    }
    record(0.0, y, false);
    double prev_eps = y[7];

    auto observer = [&](double s_prev, double s_now, Eigen::VectorXd& ynow,
                        const DenseStep& dense) -> StepControl {
        ++result.accepted_steps;
        if (nbody && prev_eps != 0.0 && ynow[7] * prev_eps < 0.0) {
            // Janus point inside this step: bisect the dense interpolant
            double lo = s_prev, hi = s_now;
            double flo = prev_eps;
            while (std::abs(hi - lo) > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const double fmid = dense.eval(mid)[7];
                if (fmid == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((fmid > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                }
            }
            const double s_cross = 0.5 * (lo + hi);
            Eigen::VectorXd ycross = dense.eval(s_cross);
            renormalize(ycross);
            sign = -sign;
            record(s_cross, ycross, true);
            result.crossings.push_back(s_cross);
            prev_eps = ycross[7];
            return StepControl::restart(s_cross, std::move(ycross));
        }
        renormalize(ynow);
        record(s_now, ynow, false);
        prev_eps = ynow[7];
        return StepControl::cont();
    };

    rk45_integrate(rhs, y, 0.0, span, controls.ode, observer);
    return result;
}

ClassicalCurveState seed_from_shape(const ShapePoint& q, const Direction& dir, double kappa,
                                    int eps_sign, const MassProfile& masses,
                                    const PotentialSpec& spec, double tol) {
    const double C = shape_potential(q, masses, spec);
    epsilon(kappa, C, eps_sign, tol);  // validates the constraint
    return ClassicalCurveState{q, dir, kappa, eps_sign};
}

CartesianObservables cartesian_observables(const Configuration& config,
                                           const std::vector<Eigen::VectorXd>& velocities,
                                           const PotentialSpec& spec) {
    if (config.count() != 3 || config.dim() != 2)
        throw IncompatibleCharts("cartesian observables need a planar 3-body system");
    const auto& mu = config.masses();
    CartesianObservables obs;
    double ke = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto& r = config.position(i);
        const auto& v = velocities[static_cast<std::size_t>(i)];
        obs.D += mu[i] * r.dot(v);
        obs.J += mu[i] * (r[0] * v[1] - r[1] * v[0]);
        ke += 0.5 * mu[i] * v.squaredNorm();
    }
    obs.L = config.scale();
    obs.C = shape_potential_cartesian(config, spec);
    obs.E = ke + potential_energy(config, spec);

    const JacobiPair z = jacobi_coordinates(config);
    const JacobiPair zdot = jacobi_coordinates(mu, velocities);
    const Vec3 ndot = hopf_velocity(z, zdot);
    obs.p = obs.L * obs.L * 0.5 * ndot.norm();  // kinematic speed = |dn/dt|/2
    obs.kappa = obs.p * obs.p / (spec.beta * std::pow(obs.L, spec.k + 2.0));
    obs.epsilon = obs.p > 0.0 ? obs.D / obs.p : 0.0;
    return obs;
}

ClassicalCurveState seed_from_cartesian(const Configuration& config,
                                        const std::vector<Eigen::VectorXd>& velocities,
                                        const PotentialSpec& spec) {
    const JacobiPair z = jacobi_coordinates(config);
    const JacobiPair zdot = jacobi_coordinates(config.masses(), velocities);
    const Vec3 n = hopf_point(z);
    const Vec3 ndot = hopf_velocity(z, zdot);
    if (ndot.norm() < 1e-14)
        throw DegenerateInput("seed: shape velocity vanishes, arc-length gauge undefined");
    const CartesianObservables obs = cartesian_observables(config, velocities, spec);
    ClassicalCurveState st;
    st.q = ShapePoint::sphere(n);
    st.dir = Direction(st.q.sphere_coords(), ndot);
    st.kappa = obs.kappa;
    st.eps_sign = obs.D >= 0.0 ? +1 : -1;
    return st;
}

}  // namespace psd

#include "psd/quantum.hpp"

#include <cmath>

namespace psd {

namespace {

/// Precomputed per-grid data shared by the RHS evaluations.
struct PotentialGrid {
    Eigen::VectorXd C;  // classical shape potential at the nodes
    PairSeparations ps;
    double soft2 = 0.0;
    int k = -1;

    PotentialGrid(const SphereGrid& grid, const MassProfile& masses, const PotentialSpec& spec)
        : ps(pair_separations(masses)), soft2(spec.softening * spec.softening), k(spec.k) {
        C.resize(grid.nodes());
        for (int i = 0; i < grid.n_theta(); ++i)
            for (int j = 0; j < grid.n_phi(); ++j) {
                const ShapePoint q = ShapePoint::sphere(grid.node(i, j));
                C[i * grid.n_phi() + j] = shape_potential(q, masses, spec);
            }
    }
};

double interp_floor_checked(const SphereGrid& grid, const SphereGrid::Coeffs& cR, const Vec3& Q,
                            double floor_abs) {
    const double r_at_q = grid.eval(cR, Q);
    if (r_at_q < floor_abs)
        throw AmplitudeFloorBreach("amplitude under floor at the actual configuration");
    return r_at_q;
}

}  // namespace

void normalize_amplitude(QuantumState& psi, const SphereGrid& grid) {
    const double norm2 = grid.integral(psi.R.cwiseProduct(psi.R));
    if (!(norm2 > 0.0)) throw DegenerateInput("quantum state: zero amplitude");
    psi.R /= std::sqrt(norm2);
}

Eigen::VectorXd laplace_beltrami(const Eigen::VectorXd& field, const SphereGrid& grid) {
    return grid.synthesize(grid.laplacian(grid.analyze(field)));
}

QuantumPotentialField quantum_potential(const QuantumState& psi, const SphereGrid& grid,
                                        double amplitude_floor) {
    const Eigen::VectorXd lapR = laplace_beltrami(psi.R, grid);
    const double floor_abs = amplitude_floor * psi.R.maxCoeff();
    QuantumPotentialField out;
    out.v.setZero(grid.nodes());
    for (long i = 0; i < psi.R.size(); ++i) {
        if (psi.R[i] < floor_abs) {
            ++out.masked_nodes;
        } else {
            out.v[i] = -lapR[i] / (2.0 * psi.R[i]);
        }
    }
    return out;
}

QuantumPotentialField total_potential(const QuantumState& psi, const SphereGrid& grid,
                                      const MassProfile& masses, const PotentialSpec& spec,
                                      const QuantumParams& params) {
    QuantumPotentialField vt = quantum_potential(psi, grid, params.amplitude_floor);
    const PotentialGrid pg(grid, masses, spec);
    vt.v = pg.C + params.k_coupling * vt.v;
    return vt;
}

namespace {

/// V_T(Q) and its tangential gradient at Q from spectral field data plus
/// the closed-form classical part. grad V_q uses the quotient rule
///   grad(-LapR/2R) = -(grad LapR) / (2R) + LapR (grad R) / (2R^2).
struct PointPotential {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
};

PointPotential vt_at_point(const SphereGrid& grid, const SphereGrid::Coeffs& cR,
                           const SphereGrid::Coeffs& cLapR, const Vec3& Q,
                           const MassProfile& masses, const QuantumParams& params,
                           double floor_abs, const PotentialSpec& spec) {
    PointPotential out;
    const ShapePoint q = ShapePoint::sphere(Q);
    out.value = shape_potential(q, masses, spec);
    out.grad = shape_potential_gradient(q, masses, spec);
    if (params.k_coupling != 0.0) {
        const double r_q = interp_floor_checked(grid, cR, Q, floor_abs);
        const double lap_q = grid.eval(cLapR, Q);
        const Vec3 grad_r = grid.eval_gradient(cR, Q);
        const Vec3 grad_lap = grid.eval_gradient(cLapR, Q);
        const double vq = -lap_q / (2.0 * r_q);
        const Vec3 gvq = -grad_lap / (2.0 * r_q) + lap_q * grad_r / (2.0 * r_q * r_q);
        out.value += params.k_coupling * vq;
        out.grad += params.k_coupling * gvq;
    }
    return out;
}

}  // namespace

double tilde_K(const QuantumCurveState& state, const SphereGrid& grid, const MassProfile& masses,
               const PotentialSpec& spec, const QuantumParams& params) {
    if (params.force_tilde_k_zero) return 0.0;
    const SphereGrid::Coeffs cR = grid.analyze(state.psi.R);
    const SphereGrid::Coeffs cLapR = grid.laplacian(cR);
    const double floor_abs = params.amplitude_floor * state.psi.R.maxCoeff();
    const PotentialGrid pg(grid, masses, spec);
    const PointPotential vt =
        vt_at_point(grid, cR, cLapR, state.Q, masses, params, floor_abs, spec);
    const double excess = 1.0 + 2.0 * vt.value / state.kappa;
    if (excess > 1e-6)
        throw ConstraintViolation("tilde-K: radicand negative, 1 + 2 V_T/kappa = " +
                                      std::to_string(excess),
                                  excess, 0.0);
    return -static_cast<double>(state.eps_sign) * params.alpha * state.kappa *
           std::sqrt(std::max(0.0, -excess));
}

namespace {

struct RhsWorkspace {
    SphereGrid::Coeffs cR, cS, cLapR, cLapS;
    Eigen::VectorXd lapS, Rth, Rph, Sth, Sph, lapR;
};

QuantumRhs eval_rhs(const QuantumCurveState& state, const SphereGrid& grid,
                    const PotentialGrid& pg, const MassProfile& masses,
                    const PotentialSpec& spec, const QuantumParams& params, RhsWorkspace& ws,
                    double tol_constraint) {
    if (state.kappa < 1e-12) throw KappaUnderflow("quantum equation of state: kappa underflow");
    const double inv_sqrt_kappa = 1.0 / std::sqrt(state.kappa);
    const double floor_abs = params.amplitude_floor * state.psi.R.maxCoeff();

    ws.cR = grid.analyze(state.psi.R);
    ws.cS = grid.analyze(state.psi.S);
    ws.cLapR = grid.laplacian(ws.cR);
    ws.cLapS = grid.laplacian(ws.cS);
    ws.lapR = grid.synthesize(ws.cLapR);
    ws.lapS = grid.synthesize(ws.cLapS);
    ws.Rth = grid.synthesize_dtheta(ws.cR);
    ws.Rph = grid.synthesize_dphi_over_sin(ws.cR);
    ws.Sth = grid.synthesize_dtheta(ws.cS);
    ws.Sph = grid.synthesize_dphi_over_sin(ws.cS);

    QuantumRhs rhs;
    const double inv_r2 = 1.0 / (SphereGrid::radius * SphereGrid::radius);

    // field sector
    rhs.dR = -inv_sqrt_kappa *
             (inv_r2 * (ws.Rth.cwiseProduct(ws.Sth) + ws.Rph.cwiseProduct(ws.Sph)) +
              0.5 * state.psi.R.cwiseProduct(ws.lapS));
    Eigen::VectorXd vq = Eigen::VectorXd::Zero(grid.nodes());
    for (long i = 0; i < vq.size(); ++i) {
        if (state.psi.R[i] < floor_abs)
            ++rhs.masked_nodes;
        else
            vq[i] = -ws.lapR[i] / (2.0 * state.psi.R[i]);
    }
    rhs.dS = -inv_sqrt_kappa *
             (0.5 * inv_r2 * (ws.Sth.cwiseProduct(ws.Sth) + ws.Sph.cwiseProduct(ws.Sph)) +
              pg.C + params.k_coupling * vq);

    // curve sector
    const PointPotential vt =
        vt_at_point(grid, ws.cR, ws.cLapR, state.Q, masses, params, floor_abs, spec);
    rhs.vT_at_Q = vt.value;
    rhs.grad_vT_at_Q = vt.grad;
    const double udotg = state.u.dot(vt.grad);
    rhs.dQ = state.u;
    rhs.du = -4.0 * state.Q - (1.0 / state.kappa) * (4.0 * vt.grad - udotg * state.u);
    double tk = 0.0;
    if (!params.force_tilde_k_zero) {
        const double excess = 1.0 + 2.0 * vt.value / state.kappa;
        if (excess > tol_constraint)
            throw ConstraintViolation(
                "quantum equation of state: radicand negative, 1 + 2 V_T/kappa = " +
                    std::to_string(excess),
                excess, 0.0);
        tk = -static_cast<double>(state.eps_sign) * params.alpha * state.kappa *
             std::sqrt(std::max(0.0, -excess));
    }
    rhs.tilde_k = tk;
    rhs.dkappa = -2.0 * udotg + tk;
    return rhs;
}

}  // namespace

QuantumRhs dbb_rhs(const QuantumCurveState& state, const SphereGrid& grid,
                   const MassProfile& masses, const PotentialSpec& spec,
                   const QuantumParams& params) {
    params.validate();
    const PotentialGrid pg(grid, masses, spec);
    RhsWorkspace ws;
    return eval_rhs(state, grid, pg, masses, spec, params, ws, 1e-6);
}

double guidance_residual(const QuantumCurveState& state, const SphereGrid& grid) {
    const SphereGrid::Coeffs cS = grid.analyze(state.psi.S);
    const Vec3 grad_s = grid.eval_gradient(cS, state.Q);
    // covectors raised with g^{-1} = 4 x tangential identity
    const Vec3 diff = std::sqrt(state.kappa) * state.u - 4.0 * grad_s;
    return 0.5 * diff.norm();
}

QuantumCurveState seed_guided(const Vec3& Q, QuantumState psi, const SphereGrid& grid,
                              const QuantumParams& params, int eps_sign, double L0) {
    const SphereGrid::Coeffs cS = grid.analyze(psi.S);
    const Vec3 grad_s = grid.eval_gradient(cS, Q);
    if (grad_s.norm() < 1e-14)
        throw DegenerateInput("guided seed: phase gradient vanishes at Q");
    QuantumCurveState st;
    st.Q = Q.normalized();
    st.u = 2.0 * grad_s.normalized();
    st.kappa = 4.0 * grad_s.squaredNorm() / std::pow(L0, params.alpha);
    st.eps_sign = eps_sign;
    st.psi = std::move(psi);
    return st;
}

QuantumCurveResult integrate_quantum_curve(const QuantumCurveState& initial, double span,
                                           const SphereGrid& grid, const MassProfile& masses,
                                           const PotentialSpec& spec, const QuantumParams& params,
                                           const QuantumIntegrationControls& controls) {
    params.validate();
    const PotentialGrid pg(grid, masses, spec);
    const long nn = grid.nodes();
    const long dim = 8 + 2 * nn;
    RhsWorkspace ws;

    QuantumCurveState work = initial;
    int sign = initial.eps_sign;
    const double gamma = params.alpha;

    auto unpack = [&](const Eigen::VectorXd& y, QuantumCurveState& st) {
        st.Q = y.segment<3>(0);
        st.u = y.segment<3>(3);
        st.kappa = y[6];
        st.psi.R = y.segment(8, nn);
        st.psi.S = y.segment(8 + nn, nn);
        st.eps_sign = sign;
    };

    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        unpack(y, work);
        const QuantumRhs r = eval_rhs(work, grid, pg, masses, spec, params, ws,
                                      controls.tol_constraint);
        dy.segment<3>(0) = r.dQ;
        dy.segment<3>(3) = r.du;
        dy[6] = r.dkappa;
        // frozen-field shadow epsilon, for drift monitoring and crossing
        // location; exact whenever V_T is stationary along the run
        dy[7] = -gamma * r.vT_at_Q / work.kappa +
                y[7] / work.kappa * work.u.dot(r.grad_vT_at_Q);
        dy.segment(8, nn) = r.dR;
        dy.segment(8 + nn, nn) = r.dS;
    };

    Eigen::VectorXd y(dim);
    y.segment<3>(0) = initial.Q;
    y.segment<3>(3) = initial.u;
    y[6] = initial.kappa;
    y.segment(8, nn) = initial.psi.R;
    y.segment(8 + nn, nn) = initial.psi.S;

    QuantumCurveResult result;
    {
        // seed the shadow from the radicand at s = 0
        unpack(y, work);
        const QuantumRhs r0 = eval_rhs(work, grid, pg, masses, spec, params, ws,
                                       controls.tol_constraint);
        const double excess0 = 1.0 + 2.0 * r0.vT_at_Q / initial.kappa;
        y[7] = params.force_tilde_k_zero
                   ? 0.0
                   : static_cast<double>(sign) * std::sqrt(std::max(0.0, -excess0));
    }

    auto record = [&](double s, const Eigen::VectorXd& yy, bool crossing) {
        unpack(yy, work);
        QuantumSample smp;
        smp.s = s;
        smp.Q = work.Q.normalized();
        smp.u = work.u;
        smp.kappa = work.kappa;
        const QuantumRhs r = eval_rhs(work, grid, pg, masses, spec, params, ws,
                                      controls.tol_constraint);
        smp.vT_at_Q = r.vT_at_Q;
        const double excess = 1.0 + 2.0 * r.vT_at_Q / work.kappa;
        smp.epsilon_t = static_cast<double>(sign) * std::sqrt(std::max(0.0, -excess));
        smp.norm = grid.integral(work.psi.R.cwiseProduct(work.psi.R));
        smp.guidance_residual = guidance_residual(work, grid);
        smp.C = shape_potential(ShapePoint::sphere(smp.Q), masses, spec);
        smp.dlogp_ds = -work.u.dot(r.grad_vT_at_Q) / work.kappa;
        smp.residual = params.force_tilde_k_zero
                           ? 0.0
                           : std::abs(1.0 + yy[7] * yy[7] + 2.0 * r.vT_at_Q / work.kappa);
        smp.branch_crossing = crossing;
        result.max_norm_drift = std::max(result.max_norm_drift, std::abs(smp.norm - 1.0));
        result.samples.push_back(std::move(smp));
    };
    record(0.0, y, false);
    double prev_eps = y[7];

    auto renorm = [&](Eigen::VectorXd& yy) {
        Vec3 q = yy.segment<3>(0);
        q.normalize();
        Vec3 u = yy.segment<3>(3);
        u -= q * u.dot(q);
        u *= 2.0 / u.norm();
        yy.segment<3>(0) = q;
        yy.segment<3>(3) = u;
    };

    auto observer = [&](double s_prev, double s_now, Eigen::VectorXd& ynow,
                        const DenseStep& dense) -> StepControl {
        ++result.accepted_steps;
        if (!params.force_tilde_k_zero && prev_eps != 0.0 && ynow[7] * prev_eps < 0.0) {
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
            renorm(ycross);
            sign = -sign;
            record(s_cross, ycross, true);
            result.crossings.push_back(s_cross);
            prev_eps = ycross[7];
            return StepControl::restart(s_cross, std::move(ycross));
        }
        renorm(ynow);
        record(s_now, ynow, false);
        prev_eps = ynow[7];
        return StepControl::cont();
    };

    rk45_integrate(rhs, y, 0.0, span, controls.ode, observer);
    unpack(y, result.final_state);
    return result;
}

Eigen::VectorXd band_limit(const Eigen::VectorXd& field, const SphereGrid& grid, int lband) {
    if (lband > grid.lmax())
        throw ResolutionExceeded("band limit " + std::to_string(lband) +
                                 " exceeds grid Nyquist " + std::to_string(grid.lmax()));
    SphereGrid::Coeffs c = grid.analyze(field);
    for (int m = 0; m <= grid.lmax(); ++m)
        for (int l = m; l <= grid.lmax(); ++l)
            if (l > lband) c[grid.coeff_index(l, m)] = 0.0;
    return grid.synthesize(c);
}

}  // namespace psd

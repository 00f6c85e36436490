#include "psd/newtonian.hpp"

#include <cmath>

namespace psd {

namespace {

double kinetic_energy(const MassProfile& mu, const std::vector<Eigen::VectorXd>& v) {
    double ke = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) ke += 0.5 * mu[static_cast<int>(i)] * v[i].squaredNorm();
    return ke;
}

double angular_momentum_planar(const MassProfile& mu, const std::vector<Eigen::VectorXd>& r,
                               const std::vector<Eigen::VectorXd>& v) {
    double j = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        j += mu[static_cast<int>(i)] * (r[i][0] * v[i][1] - r[i][1] * v[i][0]);
    return j;
}

}  // namespace

ZeroEnergyData prepare_zero_energy(const Configuration& config,
                                   std::vector<Eigen::VectorXd> velocities,
                                   const PotentialSpec& spec, double angular_momentum,
                                   bool contracting) {
    const int nb = config.count();
    const int d = config.dim();
    const auto& mu = config.masses();
    if (static_cast<int>(velocities.size()) != nb)
        throw DegenerateInput("velocities: count mismatch");
    if (d != 2 && angular_momentum != 0.0)
        throw DegenerateInput("angular momentum control is planar only");

    // remove the center-of-mass drift
    Eigen::VectorXd vcom = Eigen::VectorXd::Zero(d);
    double mu_sum = 0.0;
    for (int i = 0; i < nb; ++i) {
        vcom += mu[i] * velocities[static_cast<std::size_t>(i)];
        mu_sum += mu[i];
    }
    vcom /= mu_sum;
    for (auto& v : velocities) v -= vcom;

    const double V = potential_energy(config, spec);
    if (!(V < 0.0))
        throw DegenerateInput("zero-energy preparation needs a negative potential");

    // alternate the J adjustment (adds a rigid rotation) with the E = 0
    // velocity rescale until both settle; exact in one pass when J = 0
    for (int pass = 0; pass < 200; ++pass) {
        if (d == 2) {
            const double j = angular_momentum_planar(mu, config.positions(), velocities);
            double inertia = 0.0;
            for (int i = 0; i < nb; ++i) inertia += mu[i] * config.position(i).squaredNorm();
            const double om = (angular_momentum - j) / inertia;
            for (int i = 0; i < nb; ++i) {
                velocities[static_cast<std::size_t>(i)][0] += -om * config.position(i)[1];
                velocities[static_cast<std::size_t>(i)][1] += om * config.position(i)[0];
            }
        }
        const double ke = kinetic_energy(mu, velocities);
        if (!(ke > 0.0))
            throw DegenerateInput("zero-energy preparation needs nonzero velocities");
        const double f = std::sqrt(-V / ke);
        for (auto& v : velocities) v *= f;
        if (std::abs(f - 1.0) < 1e-15) break;
    }

    if (contracting) {
        double dil = 0.0;
        for (int i = 0; i < nb; ++i) dil += mu[i] * config.position(i).dot(velocities[static_cast<std::size_t>(i)]);
        if (dil > 0.0)
            for (auto& v : velocities) v = -v;
    }
    return ZeroEnergyData{config, std::move(velocities)};
}

NewtonianResult newtonian_oracle(const Configuration& config,
                                 const std::vector<Eigen::VectorXd>& velocities,
                                 const PotentialSpec& spec, double duration,
                                 const OracleControls& controls) {
    const int nb = config.count();
    const int d = config.dim();
    const auto& mu = config.masses();
    const bool sphere = (nb == 3 && d == 2);
    const double s2 = spec.softening * spec.softening;

    auto unpack = [&](const Eigen::VectorXd& y, std::vector<Eigen::VectorXd>& r,
                      std::vector<Eigen::VectorXd>& v) {
        for (int i = 0; i < nb; ++i) {
            r[static_cast<std::size_t>(i)] = y.segment(i * d, d);
            v[static_cast<std::size_t>(i)] = y.segment(nb * d + i * d, d);
        }
    };

    std::vector<Eigen::VectorXd> r(static_cast<std::size_t>(nb)), v(static_cast<std::size_t>(nb));
    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        unpack(y, r, v);
        double L2 = 0.0;
        for (int i = 0; i < nb; ++i) L2 += mu[i] * r[static_cast<std::size_t>(i)].squaredNorm();
        dy.setZero();
        for (int i = 0; i < nb; ++i) dy.segment(i * d, d) = v[static_cast<std::size_t>(i)];
        // mu_i dv_i/dt = -dV/dr_i with V = -beta sum mu_a mu_b (r_ab^2 + soft^2 L^2)^{k/2}
        for (int a = 0; a < nb; ++a)
            for (int b = a + 1; b < nb; ++b) {
                const Eigen::VectorXd dab =
                    r[static_cast<std::size_t>(a)] - r[static_cast<std::size_t>(b)];
                const double rr = dab.squaredNorm() + s2 * L2;
                const double df =
                    spec.beta * mu[a] * mu[b] * spec.k * std::pow(rr, 0.5 * spec.k - 1.0);
                dy.segment(nb * d + a * d, d) += df * dab / mu[a];
                dy.segment(nb * d + b * d, d) -= df * dab / mu[b];
                if (s2 > 0.0)
                    for (int c = 0; c < nb; ++c)
                        dy.segment(nb * d + c * d, d) +=
                            df * s2 * r[static_cast<std::size_t>(c)];
            }
        // accumulated kinematic arc length of the shape projection
        if (sphere) {
            std::vector<Eigen::VectorXd> rv(r.begin(), r.end()), vv(v.begin(), v.end());
            const JacobiPair z = jacobi_coordinates(mu, rv);
            const JacobiPair zd = jacobi_coordinates(mu, vv);
            dy[2 * nb * d] = 0.5 * hopf_velocity(z, zd).norm();
        } else {
            dy[2 * nb * d] = 0.0;
        }
    };

    Eigen::VectorXd y(2 * nb * d + 1);
    for (int i = 0; i < nb; ++i) {
        y.segment(i * d, d) = config.position(i);
        y.segment(nb * d + i * d, d) = velocities[static_cast<std::size_t>(i)];
    }
    y[2 * nb * d] = 0.0;

    NewtonianResult result;
    auto record = [&](double t, const Eigen::VectorXd& yy) {
        NewtonianSample smp;
        smp.t = t;
        smp.s = yy[2 * nb * d];
        smp.positions.resize(static_cast<std::size_t>(nb));
        smp.velocities.resize(static_cast<std::size_t>(nb));
        unpack(yy, smp.positions, smp.velocities);
        double L2 = 0.0, ke = 0.0;
        for (int i = 0; i < nb; ++i) {
            L2 += mu[i] * smp.positions[static_cast<std::size_t>(i)].squaredNorm();
            smp.D += mu[i] * smp.positions[static_cast<std::size_t>(i)].dot(
                                 smp.velocities[static_cast<std::size_t>(i)]);
            ke += 0.5 * mu[i] * smp.velocities[static_cast<std::size_t>(i)].squaredNorm();
        }
        smp.L = std::sqrt(L2);
        Configuration cfg(smp.positions, mu);
        smp.E = ke + potential_energy(cfg, spec);
        if (sphere) {
            const JacobiPair z = jacobi_coordinates(mu, smp.positions);
            const JacobiPair zd = jacobi_coordinates(mu, smp.velocities);
            smp.n = hopf_point(z);
            smp.p = L2 * 0.5 * hopf_velocity(z, zd).norm();
        }
        result.max_energy_drift = std::max(result.max_energy_drift, std::abs(smp.E));
        result.samples.push_back(std::move(smp));
    };
    record(0.0, y);

    const double span_s = controls.arc_length_span;
    auto observer = [&](double, double t_now, Eigen::VectorXd& ynow,
                        const DenseStep& dense) -> StepControl {
        if (span_s > 0.0 && ynow[2 * nb * d] >= span_s) {
            // stop exactly at the requested arc length
            double lo = dense.s0, hi = t_now;
            for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (dense.eval(mid)[2 * nb * d] < span_s ? lo : hi) = mid;
            }
            record(hi, dense.eval(hi));
            return StepControl::stop();
        }
        record(t_now, ynow);
        return StepControl::cont();
    };

    const double t_end = duration > 0.0 ? duration : 1e9;
    rk45_integrate(rhs, y, 0.0, t_end, controls.ode, observer);
    return result;
}

ZeroEnergyData kepler_pair_fixture(const MassProfile& mu, const PotentialSpec& spec,
                                   double separation, double distance) {
    if (mu.count() != 3) throw DegenerateInput("kepler pair fixture needs 3 bodies");
    if (spec.k != -1 || spec.softening != 0.0)
        throw DegenerateInput("kepler pair fixture needs the unsoftened Newtonian potential");
    const double a = separation;
    const double m12 = mu[0] + mu[1];

    std::vector<Eigen::VectorXd> pos(3, Eigen::VectorXd(2));
    pos[0] << -mu[1] / m12 * a, 0.0;
    pos[1] << mu[0] / m12 * a, 0.0;
    pos[2] << distance, 0.0;
    Configuration config(pos, mu);  // centers the frame

    // intrinsic circular velocities of the pair are momentum-free
    const double v_rel = std::sqrt(spec.beta * m12 / a);
    Eigen::VectorXd w1(2), w2(2);
    w1 << 0.0, -mu[1] / m12 * v_rel;
    w2 << 0.0, mu[0] / m12 * v_rel;

    // total J = mu3 (d x v3) + J_intr, d = pair-com -> body-3 vector
    double j_intr = 0.0;
    j_intr += mu[0] * (config.position(0)[0] * w1[1] - config.position(0)[1] * w1[0]);
    j_intr += mu[1] * (config.position(1)[0] * w2[1] - config.position(1)[1] * w2[0]);
    const Eigen::VectorXd pair_com =
        (mu[0] * config.position(0) + mu[1] * config.position(1)) / m12;
    const Eigen::VectorXd d = config.position(2) - pair_com;
    const double v3y = -j_intr / (mu[2] * d[0]);

    // with P = 0 the pair com velocity is -mu3 v3 / m12, and the kinetic
    // energy splits cleanly; E = 0 then fixes |v3|
    const double V = potential_energy(config, spec);
    const double ke_intr = 0.5 * mu[0] * w1.squaredNorm() + 0.5 * mu[1] * w2.squaredNorm();
    const double coef = 0.5 * mu[2] * (1.0 + mu[2] / m12);
    const double v3sq = (-V - ke_intr) / coef;
    if (v3sq < v3y * v3y)
        throw DegenerateInput("kepler pair fixture: no energy budget for the third body");
    Eigen::VectorXd v3(2);
    v3 << std::sqrt(v3sq - v3y * v3y), v3y;  // outgoing branch
    const Eigen::VectorXd vp = -mu[2] / m12 * v3;
    std::vector<Eigen::VectorXd> vel{w1 + vp, w2 + vp, v3};
    return ZeroEnergyData{std::move(config), std::move(vel)};
}

ZeroEnergyData homothetic_fixture(const MassProfile& mu, const PotentialSpec& spec, double size) {
    if (mu.count() != 3) throw DegenerateInput("homothetic fixture needs 3 bodies");
    std::vector<Eigen::VectorXd> pos(3, Eigen::VectorXd(2));
    for (int i = 0; i < 3; ++i) {
        const double ang = 2.0 * M_PI * i / 3.0;
        pos[static_cast<std::size_t>(i)] << size * std::cos(ang), size * std::sin(ang);
    }
    Configuration config(pos, mu);
    const double V = potential_energy(config, spec);
    const double c = std::sqrt(-2.0 * V) / config.scale();
    std::vector<Eigen::VectorXd> vel;
    for (int i = 0; i < 3; ++i) vel.push_back(c * config.position(i));
    return ZeroEnergyData{std::move(config), std::move(vel)};
}

}  // namespace psd

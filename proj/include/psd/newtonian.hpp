#pragma once

#include "psd/classical.hpp"

namespace psd {

/// One sample of a Cartesian Newtonian trajectory together with the
/// intrinsic observables used by the projection and round-trip checks.
struct NewtonianSample {
    double t = 0.0;
    double s = 0.0;  // accumulated kinematic arc length of the shape projection
    std::vector<Eigen::VectorXd> positions;
    std::vector<Eigen::VectorXd> velocities;
    double L = 0.0;
    double D = 0.0;
    double p = 0.0;
    double E = 0.0;
    Vec3 n = Vec3::UnitZ();  // shape projection (planar 3-body inputs)
};

struct NewtonianResult {
    std::vector<NewtonianSample> samples;
    double max_energy_drift = 0.0;
};

/// Prepared initial data: centered, zero total momentum, total angular
/// momentum set to `angular_momentum` (planar), velocities rescaled so the
/// total energy is exactly zero. If `contracting` and D > 0 the velocities
/// are time-reversed, so the Janus point lies ahead.
struct ZeroEnergyData {
    Configuration config;
    std::vector<Eigen::VectorXd> velocities;
};

ZeroEnergyData prepare_zero_energy(const Configuration& config,
                                   std::vector<Eigen::VectorXd> velocities,
                                   const PotentialSpec& spec,
                                   double angular_momentum = 0.0,
                                   bool contracting = false);

struct OracleControls {
    OdeControls ode{1e-12, 1e-14};
    /// Stop when the accumulated shape arc length reaches this value
    /// (0 = integrate the full duration instead).
    double arc_length_span = 0.0;
    double record_max_ds = 0.0;  // 0 = record every accepted step
};

/// Independent verification oracle: integrates the plain Newtonian
/// equations mu_i d2r_i/dt2 = -dV/dr_i in the center-of-mass frame and
/// exposes L(t), D(t), p(t) and the shape projection. Shares no code path
/// with the shape-space equation of state.
NewtonianResult newtonian_oracle(const Configuration& config,
                                 const std::vector<Eigen::VectorXd>& velocities,
                                 const PotentialSpec& spec, double duration,
                                 const OracleControls& controls = {});

/// Circular binary (bodies 1, 2 at the given separation) plus a distant
/// third body, with P = 0, J = 0 and E = 0 exactly: the canonical
/// Kepler-pair fixture. Unsoftened Newtonian potentials only.
ZeroEnergyData kepler_pair_fixture(const MassProfile& masses, const PotentialSpec& spec,
                                   double separation, double distance);

/// Equilateral triangle with purely radial E = 0 velocities: the shape
/// sits at the critical point of the potential and only the scale moves.
ZeroEnergyData homothetic_fixture(const MassProfile& masses, const PotentialSpec& spec,
                                  double size = 1.0);

}  // namespace psd

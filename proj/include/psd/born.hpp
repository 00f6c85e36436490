#pragma once

#include <cmath>
#include <vector>

#include "psd/errors.hpp"

namespace psd {

/// Born-rule equivariance test on a 1-D reduced chart (the circle).
///
/// The effective wave function evolves by the decoupled subsystem
/// dynamics (guidance preserved, no tilde-K feeding kappa), the ensemble
/// members by the matching equation of state; endpoints are compared
/// against |psi_eff(end)|^2 in total variation.
struct BornConfig {
    int grid_n = 256;          // periodic field grid
    int winding = 1;           // phase winding; keeps dS/dx > 0, no turning points
    double amp_mod = 0.8;      // |psi0|^2 proportional to 1 + amp_mod cos(x - x0)
    double x0 = M_PI;
    double phase_mod = 0.4;    // periodic part of the initial phase
    double potential_cos = 0.3;  // classical part C(x) = potential_cos (cos x - 1)
    double k_coupling = 1.0;
    double t_end = 1.0;
    int ensemble = 10000;
    int bins = 64;
    unsigned long long seed = 12345;
    bool tilde_k_zero = true;      // the decoupled regime; false is rejected
    bool negative_control = false; // seed uniformly instead of from |psi0|^2
};

struct BornReport {
    int bins = 0;
    int ensemble = 0;
    double tv_initial = 0.0;  // draw vs |psi0|^2
    double tv_final = 0.0;    // evolved ensemble vs |psi(end)|^2
    std::vector<double> hist_empirical;  // endpoint bin probabilities
    std::vector<double> hist_model;      // |psi(end)|^2 bin probabilities
    std::vector<double> endpoints;       // member positions at t_end
};

/// Throws RegimeViolation if tilde_k_zero is false: equivariance is a
/// decoupled-subsystem statement.
BornReport born_test(const BornConfig& config);

/// Density snapshot |psi|^2 of the 1-D field evolution, exposed so
/// independent oracles can compare against the same effective wave
/// function.
struct CircleFieldState {
    double t = 0.0;
    std::vector<double> density;
};

/// Evolves the effective wave function alone over [0, t_end]; returns
/// snapshots at roughly uniform spacing (at least `snapshots` of them).
std::vector<CircleFieldState> evolve_circle_field(const BornConfig& config, int snapshots);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace psd

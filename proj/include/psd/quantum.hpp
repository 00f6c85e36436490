#pragma once

#include "psd/classical.hpp"
#include "psd/sphere_harmonics.hpp"

namespace psd {

/// Wave function on the shape sphere in amplitude/phase form,
/// psi = R exp(i S), sampled on a SphereGrid. Normalization is
/// integral(R^2 dA) = 1 with the radius-1/2 area element.
struct QuantumState {
    Eigen::VectorXd R;
    Eigen::VectorXd S;
};

/// Normalizes R in place to unit L2 norm; throws DegenerateInput for an
/// identically zero amplitude.
void normalize_amplitude(QuantumState& psi, const SphereGrid& grid);

struct QuantumParams {
    /// Dimensionless coupling weighting the quantum potential inside
    /// V_T = C + k_coupling V_q (no Planck constant exists in the model).
    double k_coupling = 1.0;
    /// Homogeneity degree of the potential in the scale variable; matching
    /// the classical limit requires alpha = k + 2 (Newtonian: 1).
    double alpha = 1.0;
    /// Nodes with R < amplitude_floor * max(R) are masked in V_q and the
    /// masked count reported.
    double amplitude_floor = 1e-10;
    /// Force tilde-K = 0 (decoupled-subsystem regime; preserves guidance).
    bool force_tilde_k_zero = false;

    void validate() const {
        if (k_coupling < 0.0) throw ConfigError("quantum.k_coupling: must be >= 0");
        if (amplitude_floor <= 0.0) throw ConfigError("quantum.floor: must be > 0");
    }
};

/// The evolving pair: actual configuration Q (with its direction and
/// intrinsic acceleration kappa) plus the wave function over all of shape
/// space. eps_sign tags the branch of the tilde-K square root.
struct QuantumCurveState {
    Vec3 Q = Vec3::UnitZ();
    Vec3 u = 2.0 * Vec3::UnitX();
    double kappa = 1.0;
    int eps_sign = +1;
    QuantumState psi;
};

/// Spectral Laplace-Beltrami operator on the radius-1/2 sphere:
/// degree-l harmonics are eigenfields with eigenvalue -l(l+1)/radius^2.
Eigen::VectorXd laplace_beltrami(const Eigen::VectorXd& field, const SphereGrid& grid);

struct QuantumPotentialField {
    Eigen::VectorXd v;  // -Delta R / (2 R), zero at masked nodes
    int masked_nodes = 0;
};

/// Scale-invariant quantum potential V_q = -Delta R / (2 R) per node.
/// Nodes under the amplitude floor are masked (V_q = 0) and counted.
QuantumPotentialField quantum_potential(const QuantumState& psi, const SphereGrid& grid,
                                        double amplitude_floor = 1e-10);

/// Total potential V_T = C + k_coupling V_q per node.
QuantumPotentialField total_potential(const QuantumState& psi, const SphereGrid& grid,
                                      const MassProfile& masses, const PotentialSpec& spec,
                                      const QuantumParams& params);

/// Branch term in d kappa, fixed by requiring the V_q -> 0 limit to
/// reproduce the classical equation of state:
///   tilde-K = -sign * alpha * kappa * sqrt(-(1 + 2 V_T(Q)/kappa)).
/// Throws ConstraintViolation when the radicand is negative beyond
/// tolerance.
double tilde_K(const QuantumCurveState& state, const SphereGrid& grid,
               const MassProfile& masses, const PotentialSpec& spec,
               const QuantumParams& params);

struct QuantumRhs {
    Vec3 dQ;
    Vec3 du;
    double dkappa = 0.0;
    Eigen::VectorXd dR;
    Eigen::VectorXd dS;
    double vT_at_Q = 0.0;
    Vec3 grad_vT_at_Q = Vec3::Zero();
    double tilde_k = 0.0;
    int masked_nodes = 0;
};

/// Right-hand side of the coupled curve + field equation of state:
///   dQ = u
///   du = -4 Q - (1/kappa)(4 grad V_T - (u.grad V_T) u)   at Q
///   dkappa = -2 u.grad V_T(Q) + tilde-K
///   dR = -(1/sqrt(kappa)) (g^{ab} R_,a S_,b + (1/2) R Lap S)   per node
///   dS = -(1/sqrt(kappa)) ((1/2) g^{ab} S_,a S_,b + V_T)       per node
/// Field derivatives are spectral; values and gradients at Q come from
/// the harmonic series. grad V_q at Q uses the analytic quotient rule on
/// the spectral fields rather than a masked-grid transform.
QuantumRhs dbb_rhs(const QuantumCurveState& state, const SphereGrid& grid,
                   const MassProfile& masses, const PotentialSpec& spec,
                   const QuantumParams& params);

/// Departure from the guidance relation p_a = S_,a at Q, measured in the
/// kinematic metric: || sqrt(kappa) u_a - S_,a(Q) ||_g. Zero when seeded
/// from the phase gradient; grows under the global dynamics once tilde-K
/// feeds the kappa equation.
double guidance_residual(const QuantumCurveState& state, const SphereGrid& grid);

/// Seeds (u, kappa) from the phase: u along grad S(Q), kappa =
/// g^{ab} S_,a S_,b / L0^alpha. The guidance residual of the seed is zero.
QuantumCurveState seed_guided(const Vec3& Q, QuantumState psi, const SphereGrid& grid,
                              const QuantumParams& params, int eps_sign = +1, double L0 = 1.0);

struct QuantumSample {
    double s = 0.0;
    Vec3 Q = Vec3::UnitZ();
    Vec3 u = 2.0 * Vec3::UnitX();
    double kappa = 1.0;
    double epsilon_t = 0.0;  // branch-signed quantum epsilon at Q
    double vT_at_Q = 0.0;
    double norm = 1.0;                // integral R^2 dA (reported, never corrected)
    double guidance_residual = 0.0;
    double C = 0.0;                   // classical shape potential at Q
    double dlogp_ds = 0.0;            // -(1/kappa) u^a V_T,a(Q)
    double residual = 0.0;            // shadow-epsilon constraint monitor
    bool branch_crossing = false;
};

struct QuantumIntegrationControls {
    OdeControls ode{1e-9, 1e-11};
    double tol_constraint = 1e-6;
};

struct QuantumCurveResult {
    std::vector<QuantumSample> samples;
    QuantumCurveState final_state;
    double max_norm_drift = 0.0;
    long accepted_steps = 0;
    std::vector<double> crossings;
};

/// Method-of-lines integration of the coupled system in the arc-length
/// gauge. Q and u are renormalized each accepted step; the field norm is
/// monitored but never corrected. Branch crossings are located on a
/// frozen-field shadow epsilon, exactly as in the classical integrator.
QuantumCurveResult integrate_quantum_curve(const QuantumCurveState& initial, double span,
                                           const SphereGrid& grid, const MassProfile& masses,
                                           const PotentialSpec& spec, const QuantumParams& params,
                                           const QuantumIntegrationControls& controls = {});

/// Band-limits a grid field to degree <= lband.
/// Throws ResolutionExceeded if lband exceeds the grid Nyquist limit.
Eigen::VectorXd band_limit(const Eigen::VectorXd& field, const SphereGrid& grid, int lband);

}  // namespace psd

#pragma once

#include "psd/ephemeris.hpp"

namespace psd {

/// Complexity observable Com(s) = -C(q(s)): positive for the Newtonian
/// spec, minimal on the least clustered shapes, growing toward clusters.
struct ComplexityTrace {
    std::vector<double> s;
    std::vector<double> com;
};

ComplexityTrace complexity(const std::vector<CurveSample>& curve);

enum class ArrowStatus { Ok, Inconclusive };

/// Location of the complexity minimum (Janus-point proxy) and the linear
/// regression slopes of Com vs s on each side of it. Outward growth on
/// both sides (slope_before < 0 < slope_after) is the two-arrow signature.
struct ArrowReport {
    ArrowStatus status = ArrowStatus::Inconclusive;
    std::size_t janus_index = 0;
    double janus_s = 0.0;
    double slope_before = 0.0;
    double slope_after = 0.0;
    bool both_outward = false;
};

/// Inconclusive when either side of the global minimum holds fewer than
/// 10 samples.
ArrowReport arrow_of_time(const ComplexityTrace& trace);

/// One Cartesian frame of a reconstructed (or oracle) trajectory.
struct TrajectoryFrame {
    double t = 0.0;
    std::vector<Eigen::VectorXd> positions;
};

struct SubsystemThresholds {
    double theta_c = 0.2;     // clustering threshold, fraction of L
    double theta_L = 0.05;    // allowed relative drift of the subsystem scale
    double dominance = 10.0;  // required intra/external potential ratio
};

struct ClusterReport {
    std::vector<int> members;
    bool whole_system = false;
    double dominance_ratio = 0.0;  // condition 1: |V_intra| / |V_external|
    double quantum_ratio = 0.0;    // condition 2: quantum contribution / |C_intra|
    double size_drift = 0.0;       // condition 3: (max-min)/mean of L_I
    bool cond_dominance = false;
    bool cond_quantum = false;
    bool cond_stable_size = false;
    bool effective_subsystem = false;
    std::vector<double> scale_trace;  // L_I per frame
};

struct SubsystemReport {
    std::vector<ClusterReport> clusters;
};

/// Detects effectively isolated bounded subsystems over a trajectory
/// window. Single-linkage clustering on window-averaged separations at
/// threshold theta_c * L partitions the bodies; each multi-body cluster is
/// tested for (1) dominance of its internal classical potential over the
/// terms coupling it to the rest, (2) negligible quantum-potential
/// contribution (vq_at_q: per-frame k V_q(Q), empty for classical runs),
/// and (3) near-constant subsystem scale across the window.
SubsystemReport detect_subsystems(const std::vector<TrajectoryFrame>& window,
                                  const MassProfile& masses, const PotentialSpec& spec,
                                  const SubsystemThresholds& thresholds = {},
                                  const std::vector<double>& vq_at_q = {});

}  // namespace psd

#pragma once

#include "psd/classical.hpp"

namespace psd {

/// Emergent scale and duration along a shape-space curve, per sample.
/// logL is anchored to 0 at the chosen unit point; t is normalized so the
/// anchor-pair duration is 1.
struct EphemerisRecord {
    double s = 0.0;
    double logL = 0.0;
    double logp = 0.0;
    double t = 0.0;
};

struct EphemerisSeries {
    std::vector<EphemerisRecord> records;
    std::size_t anchor = 0;
    std::pair<std::size_t, std::size_t> anchor_pair{0, 0};
};

/// Quadrature of d logL / ds = epsilon along the curve, with the stored
/// branch signs; logL(anchor) = 0. Composite trapezoid over accepted
/// steps; cells containing a located branch crossing are split there,
/// which keeps the rule accurate through the Janus point.
/// Throws ConstraintViolation if any sample's radicand is positive beyond
/// tolerance.
std::vector<double> ephemeris_scale(const std::vector<CurveSample>& curve, std::size_t anchor);

/// Quadrature of d logp / ds = -(1/kappa) u^a C_,a, then
/// t(s) = integral of exp(2 logL - logp) ds (since dt/ds = L^2/p),
/// normalized so t(anchor_pair.second) - t(anchor_pair.first) = 1.
EphemerisSeries ephemeris_duration(const std::vector<CurveSample>& curve, std::size_t anchor,
                                   std::pair<std::size_t, std::size_t> anchor_pair);

/// A reconstructed Newtonian snapshot: the canonical representative of the
/// shape, scaled by the ephemeris L and stamped with the ephemeris t.
struct ReconstructedSample {
    double t = 0.0;
    double L = 0.0;
    std::vector<Eigen::VectorXd> positions;
};

/// Embeds each shape at scale L0 exp(logL) and time t. The output is a
/// Newtonian trajectory up to a global similarity and choice of time unit;
/// the reconstruction is bound to one PotentialSpec through the curve that
/// produced the records.
std::vector<ReconstructedSample> reconstruct_newtonian(const std::vector<CurveSample>& curve,
                                                       const EphemerisSeries& series,
                                                       const MassProfile& masses,
                                                       double L0 = 1.0);

}  // namespace psd

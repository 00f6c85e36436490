#include "psd/ephemeris.hpp"

#include <cmath>

namespace psd {

namespace {

void check_radicand(const CurveSample& smp) {
    if (!std::isfinite(smp.kappa)) return;  // geodesic rows: epsilon = 0 identically
    const double excess = 1.0 + 2.0 * smp.C / smp.kappa;
    if (excess > 1e-6)
        throw ConstraintViolation("ephemeris: radicand negative at s = " + std::to_string(smp.s),
                                  excess, smp.s);
}

/// Cumulative trapezoid of a per-sample integrand over s. Branch-crossing
/// rows are ordinary rows, so cells around a Janus point are already split
/// at the bisected location.
std::vector<double> cumtrapz(const std::vector<CurveSample>& curve,
                             const std::vector<double>& f) {
    std::vector<double> out(curve.size(), 0.0);
    for (std::size_t i = 1; i < curve.size(); ++i)
        out[i] = out[i - 1] +
                 0.5 * (f[i] + f[i - 1]) * (curve[i].s - curve[i - 1].s);
    return out;
}

}  // namespace

std::vector<double> ephemeris_scale(const std::vector<CurveSample>& curve, std::size_t anchor) {
    if (curve.size() < 2) throw DegenerateInput("ephemeris: need at least 2 samples");
    if (anchor >= curve.size()) throw DegenerateInput("ephemeris: anchor out of range");
    std::vector<double> eps(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        check_radicand(curve[i]);
        eps[i] = curve[i].epsilon;
    }
    std::vector<double> logL = cumtrapz(curve, eps);
    const double off = logL[anchor];
    for (double& v : logL) v -= off;
    return logL;
}

EphemerisSeries ephemeris_duration(const std::vector<CurveSample>& curve, std::size_t anchor,
                                   std::pair<std::size_t, std::size_t> anchor_pair) {
    if (anchor_pair.first >= curve.size() || anchor_pair.second >= curve.size() ||
        anchor_pair.first == anchor_pair.second)
        throw DegenerateInput("ephemeris: anchor pair out of range");

    const std::vector<double> logL = ephemeris_scale(curve, anchor);
    std::vector<double> dlogp(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) dlogp[i] = curve[i].dlogp_ds;
    std::vector<double> logp = cumtrapz(curve, dlogp);
    const double offp = logp[anchor];
    for (double& v : logp) v -= offp;

    // dt/ds = L^2/p; the constants L0, p0 wash into the anchor-pair unit T
    std::vector<double> integrand(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
        integrand[i] = std::exp(2.0 * logL[i] - logp[i]);
    std::vector<double> t = cumtrapz(curve, integrand);
    const double unit = t[anchor_pair.second] - t[anchor_pair.first];
    if (!(std::abs(unit) > 0.0))
        throw DegenerateInput("ephemeris: degenerate anchor pair");
    const double t0 = t[anchor_pair.first];

    EphemerisSeries series;
    series.anchor = anchor;
    series.anchor_pair = anchor_pair;
    series.records.resize(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
        series.records[i] = EphemerisRecord{curve[i].s, logL[i], logp[i], (t[i] - t0) / unit};
    return series;
}

std::vector<ReconstructedSample> reconstruct_newtonian(const std::vector<CurveSample>& curve,
                                                       const EphemerisSeries& series,
                                                       const MassProfile& masses, double L0) {
    if (curve.size() != series.records.size())
        throw DegenerateInput("reconstruct: curve and ephemeris series disagree in length");
    std::vector<ReconstructedSample> out(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const Configuration rep =
            representative_configuration(ShapePoint::sphere(curve[i].n), masses);
        ReconstructedSample smp;
        smp.t = series.records[i].t;
        smp.L = L0 * std::exp(series.records[i].logL);
        smp.positions = rep.positions();
        for (auto& r : smp.positions) r *= smp.L;
        out[i] = std::move(smp);
    }
    return out;
}

}  // namespace psd

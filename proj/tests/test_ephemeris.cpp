#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <functional>

#include "psd/ephemeris.hpp"
#include "support/test_support.hpp"

using namespace psd;

namespace {

const MassProfile kEqual = MassProfile::equal(3);
const PotentialSpec kNewton{};

/// Cubic Hermite interpolation on a monotone grid.
double hermite(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& dys, double x) {
    std::size_t hi = 1;
    while (hi + 1 < xs.size() && xs[hi] < x) ++hi;
    const double x0 = xs[hi - 1], x1 = xs[hi];
    const double h = x1 - x0;
    const double t = std::clamp((x - x0) / h, 0.0, 1.0);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t),
                 h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * ys[hi - 1] + h10 * h * dys[hi - 1] + h01 * ys[hi] + h11 * h * dys[hi];
}

std::vector<CurveSample> synthetic_curve(int n, double ds,
                                         const std::function<double(double)>& eps,
                                         const std::function<double(double)>& dlogp) {
    std::vector<CurveSample> curve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& smp = curve[static_cast<std::size_t>(i)];
        smp.s = i * ds;
        smp.kappa = 1.0;
        smp.epsilon = eps(smp.s);
        // keep the stored (C, kappa) consistent with the stored epsilon
        smp.C = -0.5 * smp.kappa * (1.0 + smp.epsilon * smp.epsilon);
        smp.dlogp_ds = dlogp(smp.s);
    }
    return curve;
}

}  // namespace

TEST_CASE("zero dilatational momentum freezes the scale") {
    const auto curve = synthetic_curve(50, 0.1, [](double) { return 0.0; },
                                       [](double) { return 0.0; });
    const auto logL = ephemeris_scale(curve, 0);
    for (double v : logL) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("flipping all branch signs negates logL") {
    auto curve = synthetic_curve(80, 0.05, [](double s) { return std::sin(s); },
                                 [](double) { return 0.0; });
    const auto logL = ephemeris_scale(curve, 0);
    for (auto& smp : curve) smp.epsilon = -smp.epsilon;
    const auto neg = ephemeris_scale(curve, 0);
    for (std::size_t i = 0; i < logL.size(); ++i)
        CHECK(neg[i] == doctest::Approx(-logL[i]).epsilon(1e-12));
}

TEST_CASE("geodesic case: p constant, t affine in s") {
    const auto curve = synthetic_curve(60, 0.1, [](double) { return 0.0; },
                                       [](double) { return 0.0; });
    const EphemerisSeries series = ephemeris_duration(curve, 0, {0, 59});
    const double dt = series.records[1].t - series.records[0].t;
    for (std::size_t i = 1; i < series.records.size(); ++i) {
        CHECK(series.records[i].logp == doctest::Approx(0.0));
        CHECK(series.records[i].t - series.records[i - 1].t == doctest::Approx(dt).epsilon(1e-12));
    }
    CHECK(series.records.back().t == doctest::Approx(1.0));
}

TEST_CASE("doubling the anchor-pair separation halves reported times") {
    const auto curve = synthetic_curve(101, 0.1, [](double) { return 0.0; },
                                       [](double) { return 0.0; });
    const EphemerisSeries narrow = ephemeris_duration(curve, 0, {0, 50});
    const EphemerisSeries wide = ephemeris_duration(curve, 0, {0, 100});
    for (std::size_t i = 0; i < curve.size(); ++i)
        CHECK(wide.records[i].t == doctest::Approx(0.5 * narrow.records[i].t).epsilon(1e-12));
}

TEST_CASE("radicand violations are rejected") {
    auto curve = synthetic_curve(20, 0.1, [](double) { return 0.5; }, [](double) { return 0.0; });
    curve[7].C = -0.2;  // 1 + 2C/kappa = 0.6 > 0
    CHECK_THROWS_AS(ephemeris_scale(curve, 0), ConstraintViolation);
}

TEST_CASE("monotonicity of the ephemeris time") {
    const ZeroEnergyData zd = test::seeded_zero_energy(42, kEqual, kNewton);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    const CurveResult res = integrate_curve(st, 6.0, kEqual, kNewton, {});
    const EphemerisSeries series =
        ephemeris_duration(res.samples, 0, {0, res.samples.size() - 1});
    for (std::size_t i = 1; i < series.records.size(); ++i)
        CHECK(series.records[i].t > series.records[i - 1].t);
}

TEST_CASE("oracle round trip: emergent scale and duration") {
    // the same physical solution traced twice: once intrinsically by the
    // equation of state, once by plain Newton in the Cartesian frame
    const ZeroEnergyData zd = test::seeded_zero_energy(42, kEqual, kNewton);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    IntegrationControls controls;
    controls.ode.rel_tol = 1e-11;
    controls.ode.abs_tol = 1e-13;
    const double span = 10.0;
    const CurveResult eos = integrate_curve(st, span, kEqual, kNewton, controls);
    const EphemerisSeries series =
        ephemeris_duration(eos.samples, 0, {0, eos.samples.size() - 1});

    OracleControls oc;
    oc.arc_length_span = span;
    const NewtonianResult oracle = newtonian_oracle(zd.config, zd.velocities, kNewton, 1e9, oc);
    REQUIRE(oracle.samples.back().s >= span * 0.999);

    // Hermite interpolation of the oracle logL(s) and t(s): d logL/ds = D/p,
    // dt/ds = L^2/p along the oracle run
    std::vector<double> s_or, logl_or, dlogl_or, t_or, dt_or;
    for (const auto& smp : oracle.samples) {
        s_or.push_back(smp.s);
        logl_or.push_back(std::log(smp.L / oracle.samples.front().L));
        dlogl_or.push_back(smp.D / smp.p);
        t_or.push_back(smp.t);
        dt_or.push_back(smp.L * smp.L / smp.p);
    }
    const double t_unit = t_or.back() - t_or.front();

    double worst_l = 0.0, worst_t = 0.0;
    for (std::size_t i = 0; i < eos.samples.size(); ++i) {
        const double s = eos.samples[i].s;
        if (s > s_or.back()) break;
        const double l_ratio_or = std::exp(hermite(s_or, logl_or, dlogl_or, s));
        const double l_ratio = std::exp(series.records[i].logL);
        worst_l = std::max(worst_l, std::abs(l_ratio - l_ratio_or) / l_ratio_or);
        const double t_ref = (hermite(s_or, t_or, dt_or, s) - t_or.front()) / t_unit;
        worst_t = std::max(worst_t, std::abs(series.records[i].t - t_ref));
    }
    CHECK(worst_l < 1e-4);
    CHECK(worst_t < 1e-4);
}

TEST_CASE("reconstruction round trip against the oracle") {
    const ZeroEnergyData zd = test::seeded_zero_energy(7, kEqual, kNewton);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    IntegrationControls controls;
    controls.ode.rel_tol = 1e-11;
    controls.ode.abs_tol = 1e-13;
    const double span = 5.0;
    const CurveResult eos = integrate_curve(st, span, kEqual, kNewton, controls);
    const EphemerisSeries series =
        ephemeris_duration(eos.samples, 0, {0, eos.samples.size() - 1});
    const double L0 = zd.config.scale();
    const auto rec = reconstruct_newtonian(eos.samples, series, kEqual, L0);

    OracleControls oc;
    oc.arc_length_span = span;
    const NewtonianResult oracle = newtonian_oracle(zd.config, zd.velocities, kNewton, 1e9, oc);

    // Hermite-interpolate the oracle positions at the sample arc lengths
    // (dr/ds = v L^2 / p), then align by the optimal planar rotation
    std::vector<double> s_or;
    std::vector<std::array<std::vector<double>, 6>> comp(2);  // [val,der][6 components]
    for (auto& c : comp)
        for (auto& v : c) v.reserve(oracle.samples.size());
    for (const auto& smp : oracle.samples) {
        s_or.push_back(smp.s);
        const double dt_ds = smp.L * smp.L / smp.p;
        for (int b = 0; b < 3; ++b)
            for (int a = 0; a < 2; ++a) {
                comp[0][static_cast<std::size_t>(2 * b + a)].push_back(
                    smp.positions[static_cast<std::size_t>(b)][a]);
                comp[1][static_cast<std::size_t>(2 * b + a)].push_back(
                    smp.velocities[static_cast<std::size_t>(b)][a] * dt_ds);
            }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < eos.samples.size(); i += 5) {
        const double s = eos.samples[i].s;
        if (s > s_or.back()) break;
        std::array<std::complex<double>, 3> z_or;
        for (int b = 0; b < 3; ++b)
            z_or[static_cast<std::size_t>(b)] = {
                hermite(s_or, comp[0][static_cast<std::size_t>(2 * b)],
                        comp[1][static_cast<std::size_t>(2 * b)], s),
                hermite(s_or, comp[0][static_cast<std::size_t>(2 * b + 1)],
                        comp[1][static_cast<std::size_t>(2 * b + 1)], s)};
        std::array<std::complex<double>, 3> z_rec;
        for (int b = 0; b < 3; ++b)
            z_rec[static_cast<std::size_t>(b)] = {rec[i].positions[static_cast<std::size_t>(b)][0],
                                                  rec[i].positions[static_cast<std::size_t>(b)][1]};
        std::complex<double> overlap{0.0, 0.0};
        for (int b = 0; b < 3; ++b)
            overlap += kEqual[b] * std::conj(z_rec[static_cast<std::size_t>(b)]) *
                       z_or[static_cast<std::size_t>(b)];
        const std::complex<double> phase = overlap / std::abs(overlap);
        double err2 = 0.0, l_or = 0.0;
        for (int b = 0; b < 3; ++b) {
            err2 += kEqual[b] * std::norm(phase * z_rec[static_cast<std::size_t>(b)] -
                                          z_or[static_cast<std::size_t>(b)]);
            l_or += kEqual[b] * std::norm(z_or[static_cast<std::size_t>(b)]);
        }
        worst = std::max(worst, std::sqrt(err2 / l_or));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("reconstructing a scale-frozen curve gives constant-L motion") {
    auto curve = synthetic_curve(40, 0.05, [](double) { return 0.0; }, [](double) { return 0.0; });
    std::mt19937_64 rng(3);
    Vec3 n = test::random_unit(rng);
    for (auto& smp : curve) smp.n = n;  // shape fixed; only the gauge label moves
    const EphemerisSeries series = ephemeris_duration(curve, 0, {0, 39});
    const auto rec = reconstruct_newtonian(curve, series, kEqual, 2.5);
    for (const auto& smp : rec) CHECK(smp.L == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("anchor changes act as global unit changes") {
    const ZeroEnergyData zd = test::seeded_zero_energy(11, kEqual, kNewton);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    const CurveResult eos = integrate_curve(st, 4.0, kEqual, kNewton, {});
    const std::size_t last = eos.samples.size() - 1;
    const EphemerisSeries a = ephemeris_duration(eos.samples, 0, {0, last});
    const EphemerisSeries b =
        ephemeris_duration(eos.samples, last / 3, {last / 4, (3 * last) / 4});

    // logL differs by a constant (scale ratio), t by an affine map
    const double dlog = a.records[5].logL - b.records[5].logL;
    const double rate = (a.records[last].t - a.records[0].t) / (b.records[last].t - b.records[0].t);
    const double off = a.records[0].t - rate * b.records[0].t;
    for (std::size_t i = 0; i < a.records.size(); i += 13) {
        CHECK(a.records[i].logL - b.records[i].logL == doctest::Approx(dlog).epsilon(1e-10));
        CHECK(a.records[i].t ==
              doctest::Approx(rate * b.records[i].t + off).epsilon(1e-9));
    }
}

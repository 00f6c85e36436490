#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "psd/curve_distance.hpp"
#include "support/test_support.hpp"

using namespace psd;

namespace {

const MassProfile kEqual = MassProfile::equal(3);
const PotentialSpec kNewton{};

std::vector<Vec3> points_of(const CurveResult& result) {
    std::vector<Vec3> pts;
    for (const auto& smp : result.samples) pts.push_back(smp.n);
    return pts;
}

}  // namespace

TEST_CASE("epsilon from the energy constraint") {
    CHECK(epsilon(1.0, -1.0, +1) == doctest::Approx(1.0));
    CHECK(epsilon(1.0, -1.0, -1) == doctest::Approx(-1.0));
    // kappa = -2C is the Janus point, D = 0
    CHECK(epsilon(3.0, -1.5, +1) == doctest::Approx(0.0));
    CHECK_THROWS_AS(epsilon(2.0, -0.5, +1), ConstraintViolation);  // 1 + 2C/kappa = 0.5
    CHECK_THROWS_AS(epsilon(1e-15, -1.0, +1), KappaUnderflow);
}

TEST_CASE("geodesics are great circles") {
    std::mt19937_64 rng(101);
    const Vec3 n0 = test::random_unit(rng);
    const Direction dir(n0, test::random_unit(rng));
    const ClassicalCurveState initial{ShapePoint::sphere(n0), dir, 1.0, +1};
    IntegrationControls controls;
    controls.ode.rel_tol = 1e-11;
    controls.ode.abs_tol = 1e-13;

    // one full revolution of the radius-1/2 sphere is arc length pi
    const CurveResult res =
        integrate_curve(initial, M_PI, kEqual, kNewton, controls, CurveModel::Geodesic);
    const Vec3 plane_normal = n0.cross(dir.embedded()).normalized();
    double worst = 0.0;
    for (const auto& smp : res.samples) worst = std::max(worst, std::abs(smp.n.dot(plane_normal)));
    CHECK(worst < 1e-8);
    CHECK((res.samples.back().n - n0).norm() < 1e-8);

    // closed-form great circle: n(s) = cos(2s) n0 + sin(2s) u0/2
    for (const auto& smp : res.samples) {
        const Vec3 exact = std::cos(2.0 * smp.s) * n0 + std::sin(2.0 * smp.s) * dir.embedded() / 2.0;
        CHECK((smp.n - exact).norm() < 1e-8);
    }
}

TEST_CASE("geodesic acceleration is purely normal") {
    std::mt19937_64 rng(103);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec3 n = test::random_unit(rng);
        const Direction dir(n, test::random_unit(rng));
        const ClassicalRhs rhs = geodesic_rhs(ShapePoint::sphere(n), dir);
        const Vec3 tangential = rhs.du - n * rhs.du.dot(n);
        CHECK(tangential.norm() < 1e-12);
        CHECK(rhs.dkappa == 0.0);
    }
}

TEST_CASE("reversing the direction retraces the geodesic") {
    std::mt19937_64 rng(107);
    const Vec3 n0 = test::random_unit(rng);
    const Direction dir(n0, test::random_unit(rng));
    IntegrationControls controls;
    const ClassicalCurveState fwd{ShapePoint::sphere(n0), dir, 1.0, +1};
    const CurveResult a = integrate_curve(fwd, 0.8, kEqual, kNewton, controls, CurveModel::Geodesic);
    const Vec3 n_end = a.samples.back().n;
    const Direction back(n_end, -a.samples.back().u);
    const ClassicalCurveState rev{ShapePoint::sphere(n_end), back, 1.0, +1};
    const CurveResult b = integrate_curve(rev, 0.8, kEqual, kNewton, controls, CurveModel::Geodesic);
    CHECK((b.samples.back().n - n0).norm() < 1e-9);
    CHECK(one_sided_hausdorff(points_of(b), points_of(a)) < 1e-9);
}

TEST_CASE("nbody rhs at the equilateral critical point") {
    const Vec3 pole(0.0, 0.0, 1.0);
    const Direction dir = Direction::from_angle(pole, 0.7);
    const double kappa = 8.0;
    ClassicalCurveState st{ShapePoint::sphere(pole), dir, kappa, +1};
    const ClassicalRhs rhs = nbody_rhs(st, kEqual, kNewton);
    const ClassicalRhs geo = geodesic_rhs(st.q, st.dir);
    CHECK((rhs.du - geo.du).norm() < 1e-7);
    const double C = shape_potential(st.q, kEqual, kNewton);
    const double eps = epsilon(kappa, C, +1);
    CHECK(rhs.dkappa == doctest::Approx(-(kNewton.k + 2.0) * kappa * eps).epsilon(1e-9));
}

TEST_CASE("large kappa reduces the rhs to the geodesic one") {
    std::mt19937_64 rng(109);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec3 n = test::random_unit(rng);
        if (std::abs(shape_potential(ShapePoint::sphere(n), kEqual, kNewton)) > 50.0) continue;
        const Direction dir(n, test::random_unit(rng));
        ClassicalCurveState st{ShapePoint::sphere(n), dir, 1e8, +1};
        const ClassicalRhs rhs = nbody_rhs(st, kEqual, kNewton);
        const ClassicalRhs geo = geodesic_rhs(st.q, st.dir);
        CHECK((rhs.dn - geo.dn).norm() == doctest::Approx(0.0));
        CHECK((rhs.du - geo.du).norm() / geo.du.norm() < 1e-6);
    }
}

TEST_CASE("seeding from Cartesian data is constraint-consistent") {
    const PotentialSpec spec;
    for (uint64_t seed : {42ULL, 7ULL, 11ULL}) {
        const ZeroEnergyData zd = test::seeded_zero_energy(seed, kEqual, spec);
        const CartesianObservables obs =
            cartesian_observables(zd.config, zd.velocities, spec);
        CHECK(std::abs(obs.E) < 1e-12);
        CHECK(std::abs(obs.J) < 1e-12);
        // p^2 + D^2 = 2 L^2 KE when J = 0 (two routes to p agree)
        double ke = 0.0;
        for (int i = 0; i < 3; ++i)
            ke += 0.5 * zd.config.masses()[i] *
                  zd.velocities[static_cast<std::size_t>(i)].squaredNorm();
        CHECK(obs.p * obs.p + obs.D * obs.D ==
              doctest::Approx(2.0 * obs.L * obs.L * ke).epsilon(1e-10));

        const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, spec);
        CHECK(st.dir.embedded().norm() == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(std::abs(st.dir.embedded().dot(st.q.sphere_coords())) < 1e-12);
        const double C = shape_potential(st.q, kEqual, spec);
        const double eps = epsilon(st.kappa, C, st.eps_sign);
        CHECK(std::abs(1.0 + eps * eps + 2.0 * C / st.kappa) < 1e-10);
        CHECK(st.eps_sign == (obs.D >= 0 ? +1 : -1));
    }
}

TEST_CASE("integration converges under tolerance halving") {
    const ZeroEnergyData zd = test::seeded_zero_energy(42, kEqual, kNewton);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    IntegrationControls coarse;
    coarse.ode.rel_tol = 1e-9;
    coarse.ode.abs_tol = 1e-11;
    IntegrationControls fine;
    fine.ode.rel_tol = 0.5e-9;
    fine.ode.abs_tol = 0.5e-11;
    const CurveResult a = integrate_curve(st, 3.0, kEqual, kNewton, coarse);
    const CurveResult b = integrate_curve(st, 3.0, kEqual, kNewton, fine);
    CHECK((a.samples.back().n - b.samples.back().n).norm() < 1e-7);
}

TEST_CASE("integration is reversible away from branch switches") {
    const ZeroEnergyData zd = test::seeded_zero_energy(42, kEqual, kNewton, false);
    ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    // expanding branch: no Janus point ahead
    REQUIRE(st.eps_sign == +1);
    IntegrationControls controls;
    controls.ode.rel_tol = 1e-11;
    controls.ode.abs_tol = 1e-13;
    const double span = 2.0;
    const CurveResult fwd = integrate_curve(st, span, kEqual, kNewton, controls);
    ClassicalCurveState end;
    end.q = ShapePoint::sphere(fwd.samples.back().n);
    end.dir = Direction(fwd.samples.back().n, fwd.samples.back().u);
    end.kappa = fwd.samples.back().kappa;
    end.eps_sign = +1;
    const CurveResult back = integrate_curve(end, -span, kEqual, kNewton, controls);
    CHECK((back.samples.back().n - st.q.sphere_coords()).norm() < 1e-7);
    CHECK(back.samples.back().kappa ==
          doctest::Approx(st.kappa).epsilon(1e-7));
}

TEST_CASE("constraint residual stays small over long runs") {
    const ZeroEnergyData zd = test::seeded_zero_energy(42, kEqual, kNewton);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    IntegrationControls controls;
    const CurveResult res = integrate_curve(st, 10.0, kEqual, kNewton, controls);
    CHECK(res.max_residual < 1e-6);
    CHECK(res.samples.front().s == 0.0);
    for (std::size_t i = 1; i < res.samples.size(); ++i)
        CHECK(res.samples[i].s >= res.samples[i - 1].s);
}

TEST_CASE("contracting runs cross the Janus point with a continuous epsilon") {
    const ZeroEnergyData zd = test::seeded_zero_energy(42, kEqual, kNewton, true);
    const ClassicalCurveState st = seed_from_cartesian(zd.config, zd.velocities, kNewton);
    REQUIRE(st.eps_sign == -1);
    IntegrationControls controls;
    const CurveResult res = integrate_curve(st, 10.0, kEqual, kNewton, controls);
    REQUIRE(!res.crossings.empty());
    // dilatational momentum grows monotonically (Lagrange-Jacobi), so
    // exactly one crossing
    CHECK(res.crossings.size() == 1);
    // epsilon is continuous through the crossing and changes sign around it
    const double s_cross = res.crossings.front();
    double before = 0.0, at = 1.0, after = 0.0;
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        if (res.samples[i].branch_crossing) {
            at = res.samples[i].epsilon;
            before = res.samples[i - 1].epsilon;
            after = res.samples[i + 1].epsilon;
        }
    }
    CHECK(std::abs(at) < 1e-7);
    CHECK(before < 0.0);
    CHECK(after > 0.0);
    CHECK(s_cross > 0.0);
    CHECK(res.max_residual < 1e-6);
}

TEST_CASE("collision singularity and step underflow on unsoftened collisions") {
    // aim the curve straight at the binary collision of bodies 1 and 2
    const auto cols = collision_points(kEqual);
    const Vec3 n0 = sphere_from_angles(1.2, sphere_angles(cols[0])[1]);
    const Vec3 towards = (cols[0] - n0 * (n0.dot(cols[0]))).normalized();
    const Direction dir(n0, towards);
    const double C = shape_potential(ShapePoint::sphere(n0), kEqual, kNewton);
    ClassicalCurveState st{ShapePoint::sphere(n0), dir, -2.2 * C, -1};
    IntegrationControls controls;
    controls.abort_on_constraint = false;
    CHECK_THROWS_AS(integrate_curve(st, 3.0, kEqual, kNewton, controls), Error);
}

TEST_CASE("direction chart angle round trip") {
    std::mt19937_64 rng(113);
    for (int rep = 0; rep < 20; ++rep) {
        const Vec3 n = test::random_unit(rng);
        const Direction dir(n, test::random_unit(rng));
        const double phi = dir.angle(n);
        const Direction back = Direction::from_angle(n, phi);
        CHECK((back.embedded() - dir.embedded()).norm() < 1e-12);
    }
}

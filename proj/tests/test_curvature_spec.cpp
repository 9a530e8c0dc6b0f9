#include <cmath>

#include <doctest.h>

#include "pmc/curvature_spec.hpp"
#include "test_util.hpp"

using namespace pmc;

namespace {
const Eigen::Vector3d ex(1, 0, 0);
}

TEST_CASE("profile evaluation and composition") {
    for (const int m : {2, 3}) {
        // K = (m-1)/r at radius 2
        const CurvatureSpec inverse = testutil::homogeneous_ratio(m, 1.0);
        CHECK(inverse.eval(2.0, ex) == doctest::Approx((m - 1) / 2.0).epsilon(1e-14));

        // K = (m-1)(2-r)/r at radius 1
        const CurvatureSpec crossing = testutil::crossing_at_one(m);
        CHECK(crossing.eval(1.0, ex) == doctest::Approx(double(m - 1)).epsilon(1e-14));
    }

    // 0.1-amplitude angular mode equal to 1 at the sample point
    RadialProfile profile;
    profile.kind = RadialProfile::Kind::power;
    profile.coefficient = 3.0;
    profile.exponent = -1.0;
    AngularMode mode;
    mode.kind = AngularMode::Kind::fiber_cos;
    mode.k = 1;
    mode.amplitude = 0.1;
    const CurvatureSpec spec(profile, {mode});
    CHECK(spec.eval(1.0, ex) == doctest::Approx(3.0 * 1.1).epsilon(1e-14));

    CHECK_THROWS_AS(spec.eval(100.0, ex), AnnulusError);
    CHECK_THROWS_AS(spec.eval(1e-6, ex), AnnulusError);
}

TEST_CASE("a spec that goes non-positive on the annulus is rejected") {
    RadialProfile profile;
    profile.kind = RadialProfile::Kind::rational;
    profile.numerator = {2.0, -1.0};  // (2 - r)/r turns negative past r = 2
    profile.denominator = {0.0, 1.0};
    CHECK_THROWS_AS(CurvatureSpec(profile, {}, 0.05, 20.0), SpecError);
    CHECK_NOTHROW(CurvatureSpec(profile, {}, 0.05, 1.9));
}

TEST_CASE("radial derivative of rho*K") {
    for (const int m : {2, 3}) {
        // rho K constant
        const CurvatureSpec inverse = testutil::homogeneous_ratio(m, 1.0);
        CHECK(inverse.radial_derivative(0.7, ex) == doctest::Approx(0.0).epsilon(1e-13));

        // rho K = (m-1)(2 - rho)
        const CurvatureSpec crossing = testutil::crossing_at_one(m);
        CHECK(crossing.radial_derivative(0.9, ex) == doctest::Approx(-(m - 1.0)).epsilon(1e-12));
    }
    // K = c r^{-2}: d/drho (rho K) = -c/rho^2
    RadialProfile profile;
    profile.kind = RadialProfile::Kind::power;
    profile.coefficient = 1.3;
    profile.exponent = -2.0;
    const CurvatureSpec spec(profile, {}, 0.05, 20.0);
    CHECK(spec.radial_derivative(1.4, ex) == doctest::Approx(-1.3 / (1.4 * 1.4)).epsilon(1e-12));
}

TEST_CASE("radial derivative agrees with a centered difference") {
    testutil::Rng rng(3);
    RadialProfile profile;
    profile.kind = RadialProfile::Kind::rational;
    profile.numerator = {3.0, 0.4, -0.9};
    profile.denominator = {0.1, 1.0, 0.2};
    const CurvatureSpec spec(profile, {}, 0.05, 2.0);
    for (int i = 0; i < 20; ++i) {
        const double rho = rng.uniform(0.2, 1.8);
        const double d = 1e-5;
        auto rk = [&](double r) { return r * spec.eval(r, ex); };
        const double fd = (rk(rho + d) - rk(rho - d)) / (2 * d);
        CHECK(spec.radial_derivative(rho, ex) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("tabulated profiles interpolate and differentiate") {
    RadialProfile table;
    table.kind = RadialProfile::Kind::table;
    for (int i = 0; i <= 40; ++i) {
        const double r = 0.05 + i * (3.0 - 0.05) / 40.0;
        table.radii.push_back(r);
        table.table_values.push_back(2.0 / r);  // sampled K = 2/r
    }
    const CurvatureSpec spec(table, {}, 0.1, 2.8);
    CHECK(spec.eval(1.0, ex) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(spec.eval(2.0, ex) == doctest::Approx(1.0).epsilon(1e-4));
    // rho K is constant for the sampled function, up to interpolation error
    CHECK(std::abs(spec.radial_derivative(1.5, ex)) < 1e-2);
}

TEST_CASE("crossing radii by bisection: exact benchmarks") {
    for (const int m : {2, 3}) {
        const GrowthReport at_one = check_growth(testutil::crossing_at_one(m), m, 0);
        CHECK(at_one.satisfied);
        CHECK(std::abs(at_one.r1 - 1.0) <= 1e-10);
        CHECK(std::abs(at_one.r2 - 1.0) <= 1e-10);
        CHECK(at_one.monotone_on_annulus);
        CHECK(at_one.alpha == doctest::Approx(2.0 * (m - 1)).epsilon(1e-9));

        const GrowthReport at_17 = check_growth(testutil::crossing_at(m, 1.7), m, 0);
        CHECK(at_17.satisfied);
        CHECK(std::abs(at_17.r1 - 1.7) <= 1e-10);
        CHECK(std::abs(at_17.r2 - 1.7) <= 1e-10);
        CHECK(at_17.monotone_on_annulus);

        const GrowthReport below = check_growth(testutil::homogeneous_ratio(m, 0.5), m, 0);
        CHECK_FALSE(below.satisfied);
        CHECK_FALSE(below.diagnostic.empty());
    }
}

TEST_CASE("constant K = m-1 fails the growth condition (wrong sign at small radii)") {
    for (const int m : {2, 3}) {
        RadialProfile profile;
        profile.kind = RadialProfile::Kind::power;
        profile.coefficient = m - 1.0;
        profile.exponent = 0.0;
        const CurvatureSpec spec(profile, {}, 0.05, 20.0);
        const GrowthReport report = check_growth(spec, m, 0);
        CHECK_FALSE(report.satisfied);
    }
}

TEST_CASE("crossing radii of radial specs are direction independent") {
    const CurvatureSpec spec = testutil::crossing_at(3, 1.3);
    const GrowthReport a = check_growth(spec, 3, growth_directions(3, 0, 64));
    const GrowthReport b = check_growth(spec, 3, growth_directions(3, 0, 17));
    CHECK(std::abs(a.r1 - b.r1) < 1e-10);
    CHECK(std::abs(a.r2 - b.r2) < 1e-10);
}

TEST_CASE("anisotropic crossing band") {
    // K = r^{-2} (2 + 0.1 z): crossings at rho = 1 + 0.05 z per direction
    RadialProfile profile;
    profile.kind = RadialProfile::Kind::power;
    profile.coefficient = 2.0;
    profile.exponent = -2.0;
    AngularMode mode;
    mode.kind = AngularMode::Kind::harmonic;
    mode.l = 1;
    mode.k = 0;
    mode.amplitude = 0.05;
    const CurvatureSpec spec(profile, {mode}, 0.05, 20.0);
    const GrowthReport report = check_growth(spec, 3, growth_directions(3, 0, 256));
    CHECK(report.satisfied);
    CHECK(report.r1 == doctest::Approx(0.95).epsilon(1e-3));
    CHECK(report.r2 == doctest::Approx(1.05).epsilon(1e-3));
    CHECK(report.monotone_on_annulus);
}

TEST_CASE("homogeneity detection: alpha vanishes for K = c/r") {
    const GrowthReport report = check_growth(testutil::homogeneous_ratio(2, 1.0), 2, 0);
    CHECK(report.alpha <= 1e-12);
}

TEST_CASE("horizontal gradient check") {
    RadialProfile profile;
    profile.kind = RadialProfile::Kind::power;
    profile.coefficient = 1.0;
    profile.exponent = -1.0;

    const CurvatureSpec radial(profile, {});
    const auto dirs = growth_directions(2, 1);
    CHECK(radial.horizontal_gradient_max(dirs) <= 1e-10);
    CHECK_FALSE(radial.has_base_modes());

    AngularMode mode;
    mode.kind = AngularMode::Kind::base_cos;
    mode.k = 1;
    mode.amplitude = 0.2;
    const CurvatureSpec based(profile, {mode});
    CHECK(based.has_base_modes());
    CHECK(based.horizontal_gradient_max(dirs) > 0.1);
}

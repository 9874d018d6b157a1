#include <cmath>

#include <doctest.h>

#include "vfd/errors.hpp"
#include "vfd/profile.hpp"

using namespace vfd;

// Oracle constant for A1 = \int_0^infty phi dr at m = -1/2, frozen from a
// brute-force fine run of the same integrator (RK4, dr = 1e-4, r_max = 1e3,
// fitted power-law tail). An LSODA integration of the same system
// (rtol 1e-12, r_max = 2e3) gives 1.6966016785, agreeing to 4e-7.
static constexpr double kA1Oracle = 1.69660130342349;

// Independent pointwise oracle values for the unit profile at m = -1/2,
// from the LSODA run above.
static constexpr double kUnitF1 = 0.5139003338667982;
static constexpr double kUnitF5 = 0.04729911016676118;
static constexpr double kUnitF10 = 0.012873419538484716;

TEST_CASE("bound constant matches the closed form") {
    CHECK(profile_bound_constant(-0.5) == doctest::Approx(std::pow(2.0 / 3.0, 2.0 / 3.0))
                                              .epsilon(1e-14));
    // evaluating the closed form directly at the other exponents
    for (double m : {-0.2, -0.8}) {
        const double expect = std::pow(2.0 * (1.0 + m) / (1.0 - m), 1.0 / (1.0 - m));
        CHECK(profile_bound_constant(m) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK_THROWS_AS(profile_bound_constant(0.5), ParameterOutOfRange);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(integrate_profile(0.5, 1.0, 10.0, 1e-3), ParameterOutOfRange);
    CHECK_THROWS_AS(integrate_profile(-1.5, 1.0, 10.0, 1e-3), ParameterOutOfRange);
    CHECK_THROWS_AS(integrate_profile(-0.5, -1.0, 10.0, 1e-3), ParameterOutOfRange);
    CHECK_THROWS_AS(integrate_profile(-0.5, 1.0, 10.0, -1e-3), ParameterOutOfRange);
    CHECK_THROWS_AS(integrate_profile(-0.5, 1.0, 0.005, 1e-3), ParameterOutOfRange);
    CHECK_THROWS_AS(calibrate_eta(-0.5, -1.0, 1.0), ParameterOutOfRange);
}

TEST_CASE("a too-large step is rejected, not silently accepted") {
    CHECK_THROWS_AS(integrate_profile(-0.5, 1.0, 100.0, 5.0), NonPositiveProfile);
}

TEST_CASE("boundary behaviour at the center: f(0) = eta, f'(0) = 0") {
    ProfileCurve c = integrate_profile(-0.5, 1.0, 20.0, 1e-3);
    CHECK(c.f.front() == 1.0);
    ProfileDiagnostics diag = profile_diagnostics(c);
    CHECK(diag.center_slope < 10.0 * c.dr);
}

TEST_CASE("pointwise bound and monotonicity across the (m, eta) matrix") {
    for (double m : {-0.2, -0.5, -0.8}) {
        for (double eta : {0.5, 1.0, 2.0}) {
            CAPTURE(m);
            CAPTURE(eta);
            ProfileCurve c = integrate_profile_auto(m, eta);
            ProfileDiagnostics diag = profile_diagnostics(c);
            CHECK(diag.monotonicity < 0.0);
            CHECK(diag.bound_margin < 0.0);
            CHECK(diag.h_margin < 0.0);
        }
    }
}

TEST_CASE("step refinement: Richardson order at least two") {
    const double r_probe = 5.0;
    double prev_diff = 0.0;
    std::vector<double> values;
    for (double dr : {0.02, 0.01, 0.005}) {
        ProfileCurve c = integrate_profile(-0.5, 1.0, 8.0, dr);
        values.push_back(c.f[static_cast<std::size_t>(std::lround(r_probe / dr))]);
    }
    const double d1 = std::fabs(values[0] - values[1]);
    const double d2 = std::fabs(values[1] - values[2]);
    prev_diff = d1;
    CHECK(d2 < prev_diff);
    CHECK(std::log2(d1 / d2) > 2.0); // RK4 comfortably beats the required order
}

TEST_CASE("unit profile values against the independent ODE oracle") {
    ProfileCurve c = integrate_profile(-0.5, 1.0, 12.0, 1e-3);
    CHECK(c.value(1.0) == doctest::Approx(kUnitF1).epsilon(1e-6));
    CHECK(c.value(5.0) == doctest::Approx(kUnitF5).epsilon(1e-6));
    CHECK(c.value(10.0) == doctest::Approx(kUnitF10).epsilon(1e-6));
}

TEST_CASE("unit profile mass: frozen oracle and self-consistency") {
    ProfileCurve unit = integrate_profile_auto(-0.5, 1.0);
    ProfileMass mass = unit_profile_mass(unit);
    CHECK(mass.total == doctest::Approx(kA1Oracle).epsilon(1e-3));
    CHECK(mass.tail > 0.0);
    CHECK(mass.tail < 0.05 * mass.grid);

    // a deeper grid sharpens the value towards the oracle
    ProfileCurve deep = integrate_profile(-0.5, 1.0, 200.0, 1e-3);
    CHECK(profile_half_mass(deep).total == doctest::Approx(kA1Oracle).epsilon(1e-4));

    SUBCASE("doubling r_max moves A1 by less than 0.1%") {
        ProfileCurve c80 = integrate_profile(-0.5, 1.0, 80.0, 1e-3);
        ProfileCurve c160 = integrate_profile(-0.5, 1.0, 160.0, 1e-3);
        const double v80 = profile_half_mass(c80).total;
        const double v160 = profile_half_mass(c160).total;
        CHECK(std::fabs(v160 - v80) / v80 < 1e-3);
    }
}

TEST_CASE("zero-tail input: mass equals the plain quadrature") {
    // steep decay to a negligible floor; the fitted tail must vanish
    ProfileCurve c;
    c.m = -0.5;
    c.eta = 1.0;
    c.dr = 0.01;
    for (int i = 0; i <= 1000; ++i) {
        const double r = 0.01 * i;
        c.r.push_back(r);
        c.f.push_back(std::exp(-5.0 * r) + 1e-12);
    }
    ProfileMass mass = profile_half_mass(c);
    CHECK(mass.tail < 1e-10);
    CHECK(mass.total == doctest::Approx(mass.grid).epsilon(1e-10));
}

TEST_CASE("unresolved tails are rejected") {
    ProfileCurve shallow = integrate_profile(-0.5, 1.0, 5.0, 1e-3);
    CHECK_THROWS_AS(profile_half_mass(shallow), TailNotResolved);
    // the heavy tail at m = -0.8 exceeds the 5% budget at the default stop rule
    ProfileCurve heavy = integrate_profile_auto(-0.8, 1.0);
    CHECK_THROWS_AS(unit_profile_mass(heavy), TailNotResolved);
    // and unit_profile_mass insists on eta = 1
    ProfileCurve scaled = integrate_profile(-0.5, 2.0, 12.0, 1e-3);
    CHECK_THROWS_AS(unit_profile_mass(scaled), ParameterOutOfRange);
}

TEST_CASE("calibration: fixed point, quartic scaling, round trip") {
    ProfileCurve unit = integrate_profile_auto(-0.5, 1.0);
    const double a1 = unit_profile_mass(unit).total;

    CHECK(calibrate_eta(-0.5, a1, a1) == doctest::Approx(1.0).epsilon(1e-14));
    // eta(4 mu) / eta(mu) = 4^{2/(1+m)} = 256 at m = -1/2
    CHECK(calibrate_eta(-0.5, 4.0, a1) / calibrate_eta(-0.5, 1.0, a1) ==
          doctest::Approx(256.0).epsilon(1e-12));

    // round trip with the symmetry-broken step dr/2: re-integrated mass = mu
    const double eta = calibrate_eta(-0.5, 1.0, a1);
    ProfileCurve cal = integrate_profile(-0.5, eta, 260.0, 0.5 * default_profile_dr(-0.5, eta));
    CHECK(profile_half_mass(cal).total == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("scaling equivariance against the unit profile") {
    ProfileCurve unit = integrate_profile_auto(-0.5, 1.0);
    const double eta = 0.5;
    ProfileCurve scaled = integrate_profile_auto(-0.5, eta);
    const double stretch = std::pow(eta, 0.75); // eta^{(1-m)/2}
    for (double r : {1.0, 5.0, 10.0, 20.0}) {
        const double expect = eta * unit.value(stretch * r);
        CHECK(scaled.value(r) == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("asymptotic slope: monotone, bounded, correct limit constant") {
    ProfileCurve cal = calibrated_profile(-0.5, 1.0);
    CHECK(cal.a1 == doctest::Approx(kA1Oracle).epsilon(1e-3));
    CHECK(cal.mu == 1.0);

    const double limit = std::pow(1.0 * 0.5, -2.0); // (mu |m|)^{1/m} = 4
    double prev = 0.0;
    bool monotone = true;
    for (std::size_t i = 2; i < cal.r.size(); i += 50) {
        const double w = asymptotic_slope(cal, cal.r[i]);
        if (w < prev - 1e-12) monotone = false;
        prev = w;
        CHECK(w < limit);
    }
    CHECK(monotone);

    // independent LSODA oracle: w(50) = 3.712532 (the limit 4 is approached
    // at the a/r rate; at r = 50 the gap is still ~7%)
    CHECK(asymptotic_slope(cal, 50.0) == doctest::Approx(3.712532).epsilon(5e-3));

    SandwichFit fit = fit_sandwich(cal, 1.0);
    CHECK(fit.a > 0.0);
    CHECK(fit.r0 > fit.a / 0.5);
    CHECK(fit.upper_violation <= 1e-12);
    CHECK(fit.lower_violation <= 1e-12);
}

TEST_CASE("evaluation beyond the grid substitutes the flagged asymptote") {
    ProfileCurve c = integrate_profile(-0.5, 1.0, 12.0, 1e-3);
    auto inside = c.value_ex(5.0);
    CHECK_FALSE(inside.asymptote);
    auto outside = c.value_ex(20.0);
    CHECK(outside.asymptote);
    // continuity across r_max at the percent level
    CHECK(c.value_ex(12.0 + 1e-9).f == doctest::Approx(c.f.back()).epsilon(1e-4));
}

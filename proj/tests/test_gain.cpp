#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pshlab/gain.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/rng.hpp"

using namespace pshlab;

TEST_CASE("eval_c per kind") {
    CHECK(GainFunction::constant(1.0).eval(3.7) == doctest::Approx(1.0));
    CHECK(GainFunction::exponential_tilt(0.5).eval(2.0) == doctest::Approx(std::exp(1.0)));
    const auto pw = GainFunction::piecewise_constant({2.0, 1.0}, {1.0});
    CHECK(pw.eval(0.5) == doctest::Approx(2.0));
    CHECK(pw.eval(1.0) == doctest::Approx(1.0));   // right-continuous at the breakpoint
    CHECK(pw.eval_left(1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(pw.eval(-0.1), std::domain_error);
}

TEST_CASE("h closed forms") {
    CHECK(GainFunction::constant(1.0).h(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(GainFunction::constant(1.0).h(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));

    // tilt 1/2: int_0^inf e^{-s/2} ds = 2, cross-checked by quadrature
    const auto tilt = GainFunction::exponential_tilt(0.5);
    CHECK(tilt.h(0.0) == doctest::Approx(2.0).epsilon(1e-14));
    const auto q = radial_integral([&](double s) { return tilt.eval(s) * std::exp(-s); }, 60.0,
                                   1e-12);
    CHECK(tilt.h(0.0) == doctest::Approx(q.value).epsilon(1e-10));

    // piecewise closed form vs quadrature
    const auto pw = GainFunction::piecewise_constant({2.0, 1.0}, {1.0});
    const auto qpw = radial_integral([&](double s) { return pw.eval(s) * std::exp(-s); }, 80.0,
                                     1e-12, std::vector<double>{1.0});
    CHECK(pw.h(0.0) == doctest::Approx(qpw.value).epsilon(1e-10));
    CHECK(pw.h(0.3) > pw.h(0.4));

    CHECK_THROWS_AS(GainFunction::exponential_tilt(1.5).h(0.0), std::domain_error);
}

TEST_CASE("h_inverse") {
    const auto c1 = GainFunction::constant(1.0);
    CHECK(c1.h_inverse(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(c1.h_inverse(1.0) == doctest::Approx(0.0));
    // tilt 1/2: solve 2 e^{-t/2} = 1 -> t = 2 log 2; bisection must agree to 1e-10
    const auto tilt = GainFunction::exponential_tilt(0.5);
    CHECK(tilt.h_inverse(1.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
    CHECK_THROWS_AS(c1.h_inverse(0.0), std::out_of_range);
    CHECK_THROWS_AS(c1.h_inverse(1.5), std::out_of_range);
}

TEST_CASE("validate") {
    CHECK(GainFunction::constant(1.0).validate(100).pass);
    CHECK_FALSE(GainFunction::exponential_tilt(1.5).validate(100).pass);
    // upward jump 1 -> 3 at the breakpoint fails the one-sided comparison
    CHECK_FALSE(GainFunction::piecewise_constant({1.0, 3.0}, {1.0}).validate(100).pass);
    CHECK(GainFunction::piecewise_constant({2.0, 1.0}, {1.0}).validate(100).pass);
}

TEST_CASE("h strictly decreasing on a grid for every supported gain") {
    const GainFunction gains[] = {
        GainFunction::constant(1.0),
        GainFunction::constant(2.5),
        GainFunction::exponential_tilt(0.5),
        GainFunction::exponential_tilt(-1.0),
        GainFunction::piecewise_constant({2.0, 1.0, 0.5}, {0.7, 2.0}),
    };
    for (const auto& g : gains) {
        double prev = g.h(0.0);
        for (int i = 1; i <= 64; ++i) {
            const double t = 12.0 * i / 64.0;
            const double h = g.h(t);
            CHECK(h < prev);
            prev = h;
        }
    }
}

TEST_CASE("h_inverse round trip on 100 random r") {
    const GainFunction gains[] = {
        GainFunction::constant(1.0),
        GainFunction::exponential_tilt(0.5),
        GainFunction::piecewise_constant({2.0, 1.0, 0.5}, {0.7, 2.0}),
    };
    SeededRng rng(20240131);
    for (const auto& g : gains) {
        const double h0 = g.h(0.0);
        for (int i = 0; i < 100; ++i) {
            const double r = rng.uniform(1e-6, 1.0) * h0;
            const double t = g.h_inverse(r);
            CHECK(std::abs(g.h(t) - r) <= 1e-10 * h0);
        }
    }
}

TEST_CASE("construction rejects structural junk") {
    CHECK_THROWS(GainFunction::constant(0.0));
    CHECK_THROWS(GainFunction::piecewise_constant({1.0}, {1.0}));
    CHECK_THROWS(GainFunction::piecewise_constant({1.0, -1.0}, {1.0}));
    CHECK_THROWS(GainFunction::piecewise_constant({1.0, 2.0, 3.0}, {2.0, 1.0}));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pshlab/bergman.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/rng.hpp"
#include "pshlab/weights.hpp"

using namespace pshlab;

namespace {

RadialProfile slope2_profile() {
    RadialProfile p;
    p.breakpoints = {-1.0};
    p.slopes = {2.0, 2.0};
    p.anchor = -2.0;   // g(x) = 2x
    return p;
}

} // namespace

TEST_CASE("char-construction psi and phi") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair w = WeightPair::char_construction(disc, -0.5);

    const Complex z1 = std::polar(std::exp(-0.25), 0.3);
    CHECK(w.eval_psi(z1) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(w.eval_phi(z1) == doctest::Approx(-0.5).epsilon(1e-14));

    const Complex z2 = std::polar(std::exp(-1.0), 2.1);
    CHECK(w.eval_psi(z2) == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(w.eval_phi(z2) == doctest::Approx(-1.0).epsilon(1e-14));

    CHECK_THROWS_AS(w.eval_psi(Complex(2.0, 0.0)), std::domain_error);
}

TEST_CASE("radial-example psi and phi") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair w = WeightPair::radial_example(disc, slope2_profile());
    CHECK(w.eval_psi(0.5) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-14));
    CHECK(w.eval_phi(0.5) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("power-green has vanishing phi") {
    const DomainModel ann = DomainModel::annulus(0.2, 0.45);
    const WeightPair w = WeightPair::power_green(ann, 2);
    CHECK(w.eval_phi(Complex(0.5, 0.2)) == 0.0);
    CHECK(w.eval_psi(Complex(0.5, 0.2)) == doctest::Approx(6.0 * ann.green(Complex(0.5, 0.2))));
}

TEST_CASE("density values") {
    const GainFunction c1 = GainFunction::constant(1.0);

    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair ch = WeightPair::char_construction(disc, -0.5);
    CHECK(ch.density(c1, std::polar(std::exp(-0.25), 1.0)) ==
          doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-13));

    const WeightPair pp = WeightPair::plain_power(disc, 1, {Complex(1.0), Complex(0.0)});
    CHECK(pp.density(c1, Complex(0.4, 0.3)) == doctest::Approx(1.0));

    const WeightPair re = WeightPair::radial_example(disc, slope2_profile());
    CHECK(re.density(c1, 0.5) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("density reports nonfinite evaluations with the offending point") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair ch = WeightPair::char_construction(disc, -0.5);
    const GainFunction c1 = GainFunction::constant(1.0);
    // e^{-phi} blows up at the base point of the two-segment construction
    CHECK_THROWS_AS(ch.density(c1, Complex(0.0, 0.0)), std::runtime_error);
    // with a trivial weight the density extends finitely across the pole
    const WeightPair pp = WeightPair::plain_power(disc, 0, {1.0});
    CHECK(pp.density(c1, Complex(0.0, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("jet order table") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const DomainModel ann = DomainModel::annulus(0.2, 0.45);
    CHECK(jet_order_of(WeightPair::power_green(ann, 0)) == 1);
    CHECK(jet_order_of(WeightPair::plain_power(disc, 3, {1.0, 0.0, 1.0, 0.0})) == 4);
    CHECK(jet_order_of(WeightPair::char_construction(disc, -0.7)) == 1);
    CHECK(jet_order_of(WeightPair::radial_example(disc, slope2_profile())) == 1);
}

TEST_CASE("char-construction multiplier ideal by local integrability") {
    // near 0 the weight is e^{-(2x + a)} with x = log s, so the radial
    // integrand of |z|^{2m} is s^{2m} e^{-a} / s; m = 0 diverges like
    // log(1/delta), m = 1 converges
    const double a = -0.5;
    auto tail = [&](int m, double lo) {
        // integral over (lo, 0.125], shifted so the rule's lower endpoint is 0
        return radial_integral(
                   [&](double u) {
                       const double s = u + lo;
                       const double phi_psi = 2.0 * std::log(s) + a;
                       return std::pow(s, 2 * m) * std::exp(-phi_psi) * s;
                   },
                   0.125 - lo, 1e-10, {}, 16384)
            .value;
    };
    const double d0 = tail(0, 1e-8);
    const double d1 = tail(0, 1e-12);
    CHECK(d1 - d0 > 5.0);
    const double c0 = tail(1, 1e-8);
    const double c1 = tail(1, 1e-12);
    CHECK(std::abs(c1 - c0) < 1e-12);
}

TEST_CASE("sup psi over the domain is zero") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair ws[] = {
        WeightPair::char_construction(disc, -0.5),
        WeightPair::radial_example(disc, slope2_profile()),
        WeightPair::plain_power(disc, 1, {1.0, 1.0}),
    };
    for (const auto& w : ws) {
        double sup = -1e300;
        for (int j = 0; j < 64; ++j)
            sup = std::max(sup, w.eval_psi(std::polar(1.0 - 1e-4, j * 0.1)));
        CHECK(sup <= 0.0);
        CHECK(sup > -5e-3);   // approaches 0 at the boundary
    }
}

TEST_CASE("radial symmetry of psi and phi") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair w = WeightPair::char_construction(disc, -0.5);
    SeededRng rng(3);
    for (int i = 0; i < 32; ++i) {
        const double r = rng.uniform(0.05, 0.95);
        const double t1 = rng.uniform(0.0, 2.0 * M_PI), t2 = rng.uniform(0.0, 2.0 * M_PI);
        CHECK(std::abs(w.eval_psi(std::polar(r, t1)) - w.eval_psi(std::polar(r, t2))) <= 1e-14);
        CHECK(std::abs(w.eval_phi(std::polar(r, t1)) - w.eval_phi(std::polar(r, t2))) <= 1e-14);
        CHECK(w.eval_psi(std::polar(r, t1)) == doctest::Approx(w.psi_radial(r)).epsilon(1e-14));
    }
}

TEST_CASE("density positive with a lower bound on rings away from z0") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const GainFunction c1 = GainFunction::constant(1.0);
    const WeightPair ws[] = {
        WeightPair::char_construction(disc, -0.5),
        WeightPair::radial_example(disc, slope2_profile()),
    };
    for (const auto& w : ws) {
        for (double r : {0.05, 0.2, 0.5, 0.9}) {
            double lo = 1e300;
            for (int j = 0; j < 32; ++j)
                lo = std::min(lo, w.density(c1, std::polar(r, j * 0.2)));
            CHECK(lo > 0.0);
        }
    }
}

TEST_CASE("phi + psi profile is convex in log r for radial constructions") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    RadialProfile p;
    p.breakpoints = {-1.0};
    p.slopes = {2.0, 3.0};
    p.anchor = -3.0;
    const WeightPair ws[] = {
        WeightPair::char_construction(disc, -0.5),
        WeightPair::radial_example(disc, p),
        WeightPair::plain_power(disc, 2, {1.0, 0.0, 0.0}),
    };
    for (const auto& w : ws) {
        double prev_slope = -1e300;
        const int n = 200;
        for (int i = 0; i + 1 < n; ++i) {
            const double x0 = -6.0 + 6.0 * i / n, x1 = -6.0 + 6.0 * (i + 1) / n;
            const double f0 = w.psi_radial(std::exp(x0)) + w.phi_radial(std::exp(x0));
            const double f1 = w.psi_radial(std::exp(x1)) + w.phi_radial(std::exp(x1));
            const double slope = (f1 - f0) / (x1 - x0);
            CHECK(slope >= prev_slope - 1e-9);
            prev_slope = slope;
        }
    }
}

TEST_CASE("normalization cross-check: 4 pi radial integral equals the solved G(t)") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    RadialProfile p;
    p.breakpoints = {-1.0};
    p.slopes = {2.0, 3.0};
    p.anchor = -3.0;
    const WeightPair w = WeightPair::radial_example(disc, p);
    const GainFunction c1 = GainFunction::constant(1.0);
    QuadratureSpec quad;

    for (double t : {0.2, 1.0, 3.7}) {
        const double R = w.region_radius(t);
        const auto raw = radial_integral(
            [&p](double s) {
                const double x = std::log(s);
                return s * std::exp(-2.0 * x + p.eval(x));
            },
            R, 1e-12, w.radial_kinks(c1, t));
        BasisSpec basis;
        basis.n_max = 12;
        const auto mi = minimal_integral(w, c1, basis, t, quad);
        CHECK(mi.G == doctest::Approx(4.0 * M_PI * raw.value).epsilon(1e-8));
    }
}

TEST_CASE("profile validation") {
    RadialProfile bad;
    bad.breakpoints = {-1.0};
    bad.slopes = {2.0, 1.0};   // slopes decrease: not convex
    bad.anchor = -3.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    RadialProfile pos;
    pos.breakpoints = {-1.0};
    pos.slopes = {2.0, 3.0};
    pos.anchor = -2.0;   // g(0^-) = 1 > 0
    CHECK_THROWS_AS(pos.validate(), std::invalid_argument);

    RadialProfile flat;
    flat.breakpoints = {-1.0};
    flat.slopes = {0.0, 1.0};   // not increasing on the left
    flat.anchor = -1.0;
    CHECK_THROWS_AS(flat.validate(), std::invalid_argument);

    CHECK(slope2_profile().normalized().limit_at_zero() == doctest::Approx(0.0));
}

TEST_CASE("region radius per construction") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    const WeightPair ch = WeightPair::char_construction(disc, -0.5);
    CHECK(ch.region_radius(0.5) == doctest::Approx(std::exp(-0.25)));   // t < -2a
    CHECK(ch.region_radius(2.0) == doctest::Approx(std::exp(-1.5)));    // t > -2a

    const WeightPair pp = WeightPair::plain_power(disc, 1, {1.0, 0.0});
    CHECK(pp.region_radius(2.0) == doctest::Approx(std::exp(-0.5)));
}

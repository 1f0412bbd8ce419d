#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pshlab/domain.hpp"
#include "pshlab/quadrature.hpp"

using namespace pshlab;

TEST_CASE("radial_integral polynomials and endpoint singularities") {
    const auto r1 = radial_integral([](double s) { return s; }, 1.0, 1e-10);
    CHECK(r1.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r1.flags == flag_ok);

    // s * e^{-2 log s} * s: constant integrand 1 on (0, e^{-1}]
    const auto r2 = radial_integral([](double s) { return s * std::exp(-2.0 * std::log(s)) * s; },
                                    std::exp(-1.0), 1e-10);
    CHECK(r2.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    // profile slope 2: f(s) = s on (0, e^{-1/4}]; 4 pi x value = 2 pi e^{-1/2}
    const auto r3 = radial_integral([](double s) { return s; }, std::exp(-0.25), 1e-10);
    CHECK(4.0 * M_PI * r3.value == doctest::Approx(2.0 * M_PI * std::exp(-0.5)).epsilon(1e-12));

    // integrable endpoint singularity 1/sqrt(s)
    const auto r4 = radial_integral([](double s) { return 1.0 / std::sqrt(s); }, 1.0, 1e-9);
    CHECK(r4.value == doctest::Approx(2.0).epsilon(1e-8));

    CHECK((radial_integral([](double) { return 1.0; }, 0.0, 1e-10).flags & flag_empty_region) != 0);
}

TEST_CASE("radial_integral splits at supplied kinks") {
    auto f = [](double s) { return std::abs(s - 1.0 / 3.0); };
    const double exact = 0.5 * (1.0 / 9.0 + 4.0 / 9.0);
    const auto with_kink = radial_integral(f, 1.0, 1e-12, std::vector<double>{1.0 / 3.0});
    CHECK(with_kink.value == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("radial_integral flags non-convergence instead of lying") {
    auto f = [](double s) { return 1.0 / (1e-12 + std::abs(s - 0.61803398875)); };
    const auto r = radial_integral(f, 1.0, 1e-13, {}, 8);
    CHECK((r.flags & flag_tolerance_not_met));
}

TEST_CASE("region_integral on the disc") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    QuadratureSpec quad;
    quad.n_r = quad.n_theta = 1024;
    quad.rel_tol = 1e-3;

    RegionSpec region{disc, 1.0, 1.0};
    auto one = [](Complex) { return 1.0; };
    auto mask = [&](Complex z) { return region.contains(z); };
    const auto a = region_integral(one, mask, disc.bounds(), quad);
    CHECK(a.value == doctest::Approx(M_PI * std::exp(-2.0)).epsilon(1e-3));

    // |z|^2 over the whole disc = pi/2
    RegionSpec full{disc, 2.0, 0.0};
    auto msq = [](Complex z) { return std::norm(z); };
    auto mask_full = [&](Complex z) { return full.contains(z); };
    const auto b = region_integral(msq, mask_full, disc.bounds(), quad);
    CHECK(b.value == doctest::Approx(M_PI / 2.0).epsilon(1e-3));
}

TEST_CASE("region_integral agrees with monte carlo on an annulus sublevel") {
    const DomainModel ann = DomainModel::annulus(0.2, 0.45);
    RegionSpec region{ann, 2.0, 1.0};
    QuadratureSpec quad;
    quad.n_r = quad.n_theta = 512;
    quad.rel_tol = 1e-2;
    auto one = [](Complex) { return 1.0; };
    auto mask = [&](Complex z) { return region.contains(z); };
    const auto grid = region_integral(one, mask, ann.bounds(), quad);
    const auto mc = sublevel_area_mc(region, 1000000, 42);
    CHECK(std::abs(grid.value - mc.value) <= 3.0 * mc.std_error + grid.error);
}

TEST_CASE("refinement convergence: doubling the grid stays within the estimate") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    RegionSpec region{disc, 1.0, 0.7};
    auto density = [](Complex z) { return std::exp(-std::abs(z)); };
    auto mask = [&](Complex z) { return region.contains(z); };

    QuadratureSpec quad;
    quad.n_r = quad.n_theta = 256;
    const auto lo = region_integral(density, mask, disc.bounds(), quad);
    quad.n_r = quad.n_theta = 512;
    const auto hi = region_integral(density, mask, disc.bounds(), quad);
    CHECK(std::abs(hi.value - lo.value) <= 4.0 * std::max(lo.error, 1e-15));
}

TEST_CASE("mask monotonicity: nonnegative densities shrink with the level") {
    const DomainModel disc = DomainModel::unit_disc(0.3);
    QuadratureSpec quad;
    quad.n_r = quad.n_theta = 256;
    quad.rel_tol = 1e-2;
    auto density = [](Complex z) { return 1.0 + std::norm(z); };
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
        RegionSpec region{disc, 2.0, t};
        auto mask = [&](Complex z) { return region.contains(z); };
        const auto v = region_integral(density, mask, disc.bounds(), quad);
        CHECK(v.value <= prev + 1e-12);
        prev = v.value;
    }
}

TEST_CASE("radial and region routes agree on radial densities") {
    const DomainModel disc = DomainModel::unit_disc(0.0);
    QuadratureSpec quad;
    quad.n_r = quad.n_theta = 1024;
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
        RegionSpec region{disc, 2.0, t};
        const double R = std::exp(-t / 2.0);
        auto density = [](Complex z) { return std::exp(-std::abs(z)); };
        auto mask = [&](Complex z) { return region.contains(z); };
        const auto two_d = region_integral(density, mask, disc.bounds(), quad);
        const auto one_d = radial_integral([](double s) { return s * std::exp(-s); }, R, 1e-12);
        CHECK(two_d.value == doctest::Approx(2.0 * M_PI * one_d.value).epsilon(1e-4));
    }
}

TEST_CASE("QuadratureSpec validation") {
    QuadratureSpec quad;
    quad.n_r = 8;
    CHECK_THROWS_AS(quad.validate(), std::invalid_argument);
    quad.n_r = 64;
    quad.rel_tol = 1.0;
    CHECK_THROWS_AS(quad.validate(), std::invalid_argument);
}

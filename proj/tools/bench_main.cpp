// serial vs OpenMP timings of the data-parallel kernels
#include <chrono>
#include <cstdio>

#include "pshlab/bergman.hpp"
#include "pshlab/domain.hpp"
#include "pshlab/quadrature.hpp"

using namespace pshlab;

namespace {

template <typename Fn>
double time_ms(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.1f ms %10.1f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

} // namespace

int main() {
    std::printf("%-28s %13s %13s %9s   (%d threads)\n", "kernel", "serial", "openmp", "speedup",
                hardware_threads());

    {
        const DomainModel disc = DomainModel::unit_disc(0.0);
        RegionSpec region{disc, 1.0, 1.0};
        double a_s = 0, a_p = 0;
        const double ms_s = time_ms([&] { a_s = sublevel_area_grid(region, 2048, ExecMode::serial).value; });
        const double ms_p = time_ms([&] { a_p = sublevel_area_grid(region, 2048, ExecMode::parallel).value; });
        row("area grid 2048^2 (disc)", ms_s, ms_p);
        if (a_s != a_p) std::printf("  !! serial/parallel mismatch\n");
    }
    {
        const DomainModel ann = DomainModel::annulus(0.2, 0.45);
        RegionSpec region{ann, 1.0, 0.5};
        double a_s = 0, a_p = 0;
        const double ms_s = time_ms([&] { a_s = sublevel_area_mc(region, 2000000, 42, ExecMode::serial).value; });
        const double ms_p = time_ms([&] { a_p = sublevel_area_mc(region, 2000000, 42, ExecMode::parallel).value; });
        row("area mc 2e6 (annulus)", ms_s, ms_p);
        if (a_s != a_p) std::printf("  !! serial/parallel mismatch\n");
    }
    {
        const DomainModel ann = DomainModel::annulus(0.2, 0.45);
        auto density = [](Complex z) { return std::norm(z); };
        auto mask = [&](Complex z) { return ann.contains(z) && ann.green(z) < -0.5; };
        QuadratureSpec quad;
        quad.n_r = quad.n_theta = 1024;
        double v_s = 0, v_p = 0;
        const double ms_s = time_ms(
            [&] { v_s = region_integral(density, mask, ann.bounds(), quad, ExecMode::serial).value; });
        const double ms_p = time_ms(
            [&] { v_p = region_integral(density, mask, ann.bounds(), quad, ExecMode::parallel).value; });
        row("region integral 1024^2", ms_s, ms_p);
        if (v_s != v_p) std::printf("  !! serial/parallel mismatch\n");
    }
    {
        const DomainModel ann = DomainModel::annulus(0.2, std::sqrt(0.2));
        BasisSpec window{-16, 16};
        std::vector<double> taus;
        for (int i = 0; i < 17; ++i) taus.push_back(1.5 * i / 16.0);
        QuadratureSpec quad;
        quad.n_r = quad.n_theta = 512;
        double s_s = 0, s_p = 0;
        const double ms_s = time_ms([&] {
            const auto g = green_sublevel_grams(ann, window, taus, quad, ExecMode::serial);
            s_s = g.systems.back().A.norm();
        });
        const double ms_p = time_ms([&] {
            const auto g = green_sublevel_grams(ann, window, taus, quad, ExecMode::parallel);
            s_p = g.systems.back().A.norm();
        });
        row("green gram sweep 512^2 x17", ms_s, ms_p);
        if (s_s != s_p) std::printf("  !! serial/parallel mismatch\n");
    }
    return 0;
}

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "pshlab/flags.hpp"
#include "pshlab/parallel.hpp"
#include "pshlab/quadrature.hpp"

namespace pshlab {

using Complex = std::complex<double>;

enum class DomainShape { unit_disc, annulus };

// Planar domain (unit disc or annulus {rho < |z| < 1}) with a base point and
// a Green-function evaluator. green(z0) returns the -inf sentinel; quadrature
// never evaluates there (grids are half-cell shifted).
class DomainModel {
public:
    static DomainModel unit_disc(Complex base_point);
    static DomainModel annulus(double inner_radius, Complex base_point,
                               int green_series_cap = 512);

    DomainShape shape() const { return shape_; }
    double inner_radius() const { return rho_; }
    Complex base_point() const { return z0_; }
    int green_series_cap() const { return series_cap_; }

    bool contains(Complex z) const;      // strict interior
    PolarBounds bounds() const { return {shape_ == DomainShape::annulus ? rho_ : 0.0, 1.0}; }

    // G(z, base_point); throws std::domain_error for z on or outside the boundary.
    double green(Complex z) const;

    // Green function with an arbitrary pole w inside the domain (used by the
    // symmetry checks; green(z) == green_at(z, base_point())).
    double green_at(Complex z, Complex w) const;

    std::string describe() const;

private:
    DomainModel() = default;

    DomainShape shape_ = DomainShape::unit_disc;
    double rho_ = 0.0;
    Complex z0_;
    int series_cap_ = 512;
};

// Sublevel region {z : scale * G(z, z0) < -level}.
struct RegionSpec {
    DomainModel domain;
    double scale = 1.0;    // e.g. 2(k+1)
    double level = 0.0;    // t >= 0

    bool contains(Complex z) const;
};

inline bool in_sublevel(const RegionSpec& region, Complex z) { return region.contains(z); }

struct AreaEstimate {
    double value = 0.0;
    double std_error = 0.0;      // grid: half-resolution difference; mc: standard error
    std::uint32_t flags = flag_ok;
    std::string method;
    std::uint64_t seed = 0;
};

// Polar tensor-grid area of the sublevel set; `resolution` is the cell count
// per axis (>= 64).
AreaEstimate sublevel_area_grid(const RegionSpec& region, int resolution,
                                ExecMode mode = default_exec_mode());

// Uniform Monte Carlo over the bounding box with a seeded reproducible
// generator; sample count >= 1e4. Batched with integer tallies so the result
// is independent of the parallel schedule.
AreaEstimate sublevel_area_mc(const RegionSpec& region, long long samples,
                              std::uint64_t seed, ExecMode mode = default_exec_mode());

struct STracePoint {
    double t = 0.0;
    double s_value = 0.0;    // e^{2t} * area
    double error = 0.0;
    std::uint32_t flags = flag_ok;
};

enum class AreaMethod { grid, monte_carlo };

// s(t) = e^{2t} * lambda({G < -t}) on an ascending t grid.
std::vector<STracePoint> s_trace(const DomainModel& domain, const std::vector<double>& t_grid,
                                 AreaMethod method, long long resolution_or_samples,
                                 std::uint64_t seed = 42,
                                 ExecMode mode = default_exec_mode());

} // namespace pshlab

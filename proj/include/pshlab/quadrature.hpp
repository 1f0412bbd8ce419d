#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "pshlab/flags.hpp"
#include "pshlab/parallel.hpp"

namespace pshlab {

struct QuadratureSpec {
    int n_r = 1024;
    int n_theta = 1024;
    double rel_tol = 1e-6;
    int max_intervals = 4096;     // adaptive 1d refinement budget
    int mask_supersample = 4;     // subcell mask samples per axis on boundary cells
    double radial_tol = 1e-10;    // tolerance of the 1d adaptive rule

    void validate() const;        // throws std::invalid_argument
    QuadratureSpec coarser() const {
        QuadratureSpec s = *this;
        s.n_r /= 2;
        s.n_theta /= 2;
        return s;
    }
};

// Adaptive Gauss7/Kronrod15 on (0, R]; nodes stay interior so integrable
// endpoint singularities are allowed. Supplied breakpoints are mandatory
// subdivision points (weight kinks). Non-convergence flags the result.
IntegralResult radial_integral(const std::function<double(double)>& f, double R,
                               double rel_tol,
                               std::span<const double> breakpoints = {},
                               int max_intervals = 4096);

// bounding annulus of a planar domain (r_lo = 0 for the disc)
struct PolarBounds {
    double r_lo = 0.0;
    double r_hi = 1.0;
};

// Midpoint-rule polar tensor grid over `bounds`, integrand masked by `mask`.
// Cells are shifted half a cell in both axes so no node hits the base point or
// the positive axis. Cells straddling the mask boundary are re-weighted by a
// supersampled coverage fraction. The error estimate is the difference against
// a half-resolution pass.
IntegralResult region_integral(const std::function<double(std::complex<double>)>& density,
                               const std::function<bool(std::complex<double>)>& mask,
                               PolarBounds bounds, const QuadratureSpec& spec,
                               ExecMode mode = default_exec_mode());

// Single-resolution pass (no error estimate); building block for the above
// and for the serial-vs-parallel consistency suite.
double region_integral_pass(const std::function<double(std::complex<double>)>& density,
                            const std::function<bool(std::complex<double>)>& mask,
                            PolarBounds bounds, int n_r, int n_theta, int supersample,
                            ExecMode mode);

} // namespace pshlab

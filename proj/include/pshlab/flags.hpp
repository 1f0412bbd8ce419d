#pragma once

#include <cstdint>
#include <string>

namespace pshlab {

// Bitmask of quality flags attached to computed results. A nonzero mask marks
// a result "inconclusive", never "wrong": hard failures throw instead.
enum QuadFlag : std::uint32_t {
    flag_ok               = 0,
    flag_tolerance_not_met = 1u << 0,  // adaptive rule hit max depth above tol
    flag_empty_region      = 1u << 1,  // sublevel set below quadrature resolution
    flag_basis_unstable    = 1u << 2,  // n_max+8 refinement moved G by > 1e-6
    flag_basis_truncated   = 1u << 3,  // conditioning cap reduced the basis
    flag_point_dropped     = 1u << 4,  // trace point skipped (region too small)
};

inline std::uint32_t merge_flags(std::uint32_t a, std::uint32_t b) { return a | b; }

std::string describe_flags(std::uint32_t mask);

// Scalar result of a numerical integration together with its error estimate.
struct IntegralResult {
    double value = 0.0;
    double error = 0.0;          // absolute error estimate
    std::uint32_t flags = flag_ok;
};

} // namespace pshlab

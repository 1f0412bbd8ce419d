#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pshlab/flags.hpp"

namespace pshlab {

enum class TraceAxis { t_axis, r_axis };

// Sampled curve (t, G(t)) or (r, G(h^{-1}(r))) with per-point error estimates.
struct Trace {
    TraceAxis axis = TraceAxis::t_axis;
    std::vector<double> abscissae;   // strictly ascending
    std::vector<double> values;
    std::vector<double> errors;      // nonnegative, same length
    std::uint32_t flags = flag_ok;
    std::string provenance;

    std::size_t size() const { return abscissae.size(); }

    // abscissae strictly ascending, errors nonnegative, finite values;
    // nonnegativity of the values is required for minimal-integral traces but
    // not for derived -log traces
    void validate(bool require_nonnegative_values = true) const;

    double max_abs_value() const;
    double max_error() const;
    double min_spacing() const;
};

} // namespace pshlab

#pragma once

#include <string>
#include <vector>

namespace pshlab {

enum class GainKind { constant, piecewise_constant, exponential_tilt };

struct GainValidation {
    bool pass = false;
    std::vector<std::string> failures;
};

// The gain c(t) on [0, inf) together with h(t) = int_t^inf c(s) e^{-s} ds.
// Restricted to symbolic families so that h has a closed form per piece;
// admissibility (c > 0, c(t)e^{-t} nonincreasing) is checked by validate().
class GainFunction {
public:
    static GainFunction constant(double value = 1.0);
    static GainFunction piecewise_constant(std::vector<double> values,
                                           std::vector<double> breakpoints);
    static GainFunction exponential_tilt(double tilt);

    GainKind kind() const { return kind_; }
    double tilt() const { return tilt_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    // c(t); right-continuous at breakpoints. Throws std::domain_error for t < 0.
    double eval(double t) const;

    // One-sided limit of c at t from the left (differs from eval only at breakpoints).
    double eval_left(double t) const;

    // h(t) = int_t^inf c(s) e^{-s} ds, in closed form. Strictly decreasing.
    // Throws std::domain_error for t < 0 or when the integral diverges (tilt >= 1).
    double h(double t) const;

    // Inverse of h on (0, h(0)]; exact for the constant kind, bisection otherwise.
    // Throws std::out_of_range for r outside (0, h(0)].
    double h_inverse(double r) const;

    // Checks c > 0 and c(t)e^{-t} nonincreasing on a geometric grid plus all
    // breakpoints (both one-sided limits). grid_points >= 2.
    GainValidation validate(int grid_points) const;

    std::string describe() const;

private:
    GainFunction() = default;

    GainKind kind_ = GainKind::constant;
    double tilt_ = 0.0;
    std::vector<double> values_;       // one per piece (constant: single value)
    std::vector<double> breakpoints_;  // ascending, piecewise kinds only
};

} // namespace pshlab

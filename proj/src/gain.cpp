#include "pshlab/gain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pshlab {

namespace {

void require_nonnegative_t(double t) {
    if (!(t >= 0.0))
        throw std::domain_error("gain: t must be nonnegative, got " + std::to_string(t));
}

} // namespace

GainFunction GainFunction::constant(double value) {
    if (!(value > 0.0))
        throw std::invalid_argument("gain: constant value must be positive");
    GainFunction g;
    g.kind_ = GainKind::constant;
    g.values_ = {value};
    return g;
}

GainFunction GainFunction::piecewise_constant(std::vector<double> values,
                                              std::vector<double> breakpoints) {
    if (values.size() != breakpoints.size() + 1)
        throw std::invalid_argument("gain: need one value per piece (breakpoints+1)");
    if (values.empty())
        throw std::invalid_argument("gain: no pieces");
    for (double v : values)
        if (!(v > 0.0))
            throw std::invalid_argument("gain: piece values must be positive");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > 0.0))
            throw std::invalid_argument("gain: breakpoints must be positive");
        if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
            throw std::invalid_argument("gain: breakpoints must be strictly ascending");
    }
    GainFunction g;
    g.kind_ = GainKind::piecewise_constant;
    g.values_ = std::move(values);
    g.breakpoints_ = std::move(breakpoints);
    return g;
}

GainFunction GainFunction::exponential_tilt(double tilt) {
    if (!std::isfinite(tilt))
        throw std::invalid_argument("gain: tilt must be finite");
    GainFunction g;
    g.kind_ = GainKind::exponential_tilt;
    g.tilt_ = tilt;
    g.values_ = {1.0};
    return g;
}

double GainFunction::eval(double t) const {
    require_nonnegative_t(t);
    switch (kind_) {
    case GainKind::constant:
        return values_[0];
    case GainKind::exponential_tilt:
        return std::exp(tilt_ * t);
    case GainKind::piecewise_constant: {
        // right-continuous: piece index = number of breakpoints <= t
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }
    }
    throw std::logic_error("gain: unknown kind");
}

double GainFunction::eval_left(double t) const {
    require_nonnegative_t(t);
    if (kind_ != GainKind::piecewise_constant || t == 0.0)
        return eval(t);
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

double GainFunction::h(double t) const {
    require_nonnegative_t(t);
    switch (kind_) {
    case GainKind::constant:
        return values_[0] * std::exp(-t);
    case GainKind::exponential_tilt: {
        if (tilt_ >= 1.0)
            throw std::domain_error("gain: h diverges for tilt >= 1");
        // int_t^inf e^{(tilt-1)s} ds
        return std::exp((tilt_ - 1.0) * t) / (1.0 - tilt_);
    }
    case GainKind::piecewise_constant: {
        double sum = 0.0;
        const std::size_t m = breakpoints_.size();
        for (std::size_t i = 0; i <= m; ++i) {
            const double lo = (i == 0) ? 0.0 : breakpoints_[i - 1];
            const bool last = (i == m);
            const double hi = last ? 0.0 : breakpoints_[i];
            if (!last && hi <= t) continue;
            const double a = std::max(t, lo);
            const double upper_exp = last ? 0.0 : std::exp(-hi);
            sum += values_[i] * (std::exp(-a) - upper_exp);
        }
        return sum;
    }
    }
    throw std::logic_error("gain: unknown kind");
}

double GainFunction::h_inverse(double r) const {
    const double h0 = h(0.0);
    if (!(r > 0.0) || !(r <= h0 * (1.0 + 1e-15)))
        throw std::out_of_range("gain: h_inverse argument outside (0, h(0)]");
    if (r >= h0) return 0.0;

    if (kind_ == GainKind::constant)
        return std::log(values_[0] / r);

    // bracket [0, hi] grown geometrically, then bisection
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (h(hi) > r) {
        hi *= 2.0;
        if (++guard > 200)
            throw std::runtime_error("gain: h_inverse bracket growth failed");
    }
    const double tol = 1e-12 * h0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double hm = h(mid);
        if (std::abs(hm - r) <= tol) return mid;
        if (hm > r) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

GainValidation GainFunction::validate(int grid_points) const {
    if (grid_points < 2)
        throw std::invalid_argument("gain: validate needs grid_points >= 2");

    GainValidation rep;
    const double t_max = std::max(8.0, breakpoints_.empty() ? 0.0 : 2.0 * breakpoints_.back());

    std::vector<double> ts;
    ts.push_back(0.0);
    // geometric grid on (0, t_max]
    const double t_lo = 1e-6;
    const double ratio = std::pow(t_max / t_lo, 1.0 / (grid_points - 1));
    double t = t_lo;
    for (int i = 0; i < grid_points; ++i) {
        ts.push_back(std::min(t, t_max));
        t *= ratio;
    }
    for (double b : breakpoints_) ts.push_back(b);
    std::sort(ts.begin(), ts.end());

    const double tol = 1e-12;
    double prev = eval(ts[0]) * std::exp(-ts[0]);
    if (!(prev > 0.0))
        rep.failures.push_back("c(t) not positive at t=" + std::to_string(ts[0]));
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double ti = ts[i];
        // left limit first (catches an upward jump at a breakpoint), then the value
        for (double v : {eval_left(ti) * std::exp(-ti), eval(ti) * std::exp(-ti)}) {
            if (!(v > 0.0))
                rep.failures.push_back("c(t) not positive at t=" + std::to_string(ti));
            if (v > prev * (1.0 + tol) + tol)
                rep.failures.push_back("c(t)e^{-t} increases at t=" + std::to_string(ti));
            prev = v;
        }
    }
    if (kind_ == GainKind::exponential_tilt && tilt_ >= 1.0)
        rep.failures.push_back("tilt >= 1: int c e^{-t} diverges");
    rep.pass = rep.failures.empty();
    return rep;
}

std::string GainFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case GainKind::constant:
        os << "constant(" << values_[0] << ")";
        break;
    case GainKind::exponential_tilt:
        os << "exponential-tilt(lambda=" << tilt_ << ")";
        break;
    case GainKind::piecewise_constant:
        os << "piecewise-constant(values=";
        for (std::size_t i = 0; i < values_.size(); ++i)
            os << (i ? "," : "") << values_[i];
        os << "; breakpoints=";
        for (std::size_t i = 0; i < breakpoints_.size(); ++i)
            os << (i ? "," : "") << breakpoints_[i];
        os << ")";
        break;
    }
    return os.str();
}

} // namespace pshlab

#include "pshlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pshlab {

void RadialProfile::validate() const {
    if (slopes.size() != breakpoints.size() + 1)
        throw std::invalid_argument("profile: need one slope per piece (breakpoints+1)");
    if (!(slopes.front() > 0.0))
        throw std::invalid_argument("profile: first slope must be positive (g increasing)");
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        if (!(slopes[i] >= 0.0))
            throw std::invalid_argument("profile: slopes must be nonnegative");
        if (i > 0 && slopes[i] < slopes[i - 1] - 1e-15)
            throw std::invalid_argument("profile: slopes must be nondecreasing (g convex)");
    }
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] < 0.0))
            throw std::invalid_argument("profile: breakpoints must be negative");
        if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
            throw std::invalid_argument("profile: breakpoints must be ascending");
    }
    if (breakpoints.empty())
        throw std::invalid_argument("profile: need at least one breakpoint (anchor abscissa)");
    for (double x : breakpoints)
        if (!(eval(x) < 0.0))
            throw std::invalid_argument("profile: g must be negative at breakpoints");
    if (limit_at_zero() > 1e-12)
        throw std::invalid_argument("profile: g(0^-) must be <= 0");
}

double RadialProfile::eval(double x) const {
    double y = anchor;
    const double x1 = breakpoints.front();
    if (x <= x1) return y + slopes[0] * (x - x1);
    double cur = x1;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        const double nxt = breakpoints[i];
        if (x <= nxt) return y + slopes[i] * (x - cur);
        y += slopes[i] * (nxt - cur);
        cur = nxt;
    }
    return y + slopes.back() * (x - cur);
}

double RadialProfile::slope_at(double x) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return slopes[static_cast<std::size_t>(it - breakpoints.begin())];
}

double RadialProfile::inverse(double y) const {
    if (y > limit_at_zero())
        throw std::out_of_range("profile: inverse argument above g(0^-)");
    const double x1 = breakpoints.front();
    if (y <= anchor) return x1 + (y - anchor) / slopes[0];
    double cur_x = x1, cur_y = anchor;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        const double nxt_x = breakpoints[i];
        const double nxt_y = cur_y + slopes[i] * (nxt_x - cur_x);
        if (y <= nxt_y) return cur_x + (y - cur_y) / slopes[i];
        cur_x = nxt_x;
        cur_y = nxt_y;
    }
    return cur_x + (y - cur_y) / slopes.back();
}

double RadialProfile::limit_at_zero() const { return eval(0.0); }

RadialProfile RadialProfile::normalized() const {
    RadialProfile p = *this;
    p.anchor -= limit_at_zero();
    return p;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_interior(const DomainModel& d, Complex z) {
    if (!d.contains(z))
        throw std::domain_error("weights: point outside the open domain");
}

} // namespace

WeightPair WeightPair::radial_example(const DomainModel& disc, RadialProfile profile) {
    if (disc.shape() != DomainShape::unit_disc || disc.base_point() != Complex(0.0))
        throw std::invalid_argument("radial-example requires the unit disc with z0 = 0");
    profile.validate();
    WeightPair w;
    w.construction_ = WeightConstruction::radial_example;
    w.domain_ = disc;
    w.object_kind_ = ObjectKind::form;
    w.profile_ = std::move(profile);
    w.jet_order_ = 1;
    w.jet_target_ = {Complex(1.0)};
    return w;
}

WeightPair WeightPair::char_construction(const DomainModel& domain, double a) {
    if (!(a < 0.0))
        throw std::invalid_argument("char-construction: a must be negative");
    WeightPair w;
    w.construction_ = WeightConstruction::char_construction;
    w.domain_ = domain;
    w.object_kind_ = ObjectKind::form;
    w.a_ = a;
    w.jet_order_ = 1;
    w.jet_target_ = {Complex(1.0)};
    return w;
}

WeightPair WeightPair::power_green(const DomainModel& domain, int k) {
    if (k < 0) throw std::invalid_argument("power-green: k must be nonnegative");
    WeightPair w;
    w.construction_ = WeightConstruction::power_green;
    w.domain_ = domain;
    w.object_kind_ = ObjectKind::function;
    w.k_ = k;
    w.jet_order_ = k + 1;
    w.jet_target_.assign(static_cast<std::size_t>(k) + 1, Complex(0.0));
    w.jet_target_[0] = Complex(1.0);
    return w;
}

WeightPair WeightPair::plain_power(const DomainModel& disc, int k,
                                   std::vector<Complex> jet_targets) {
    if (disc.shape() != DomainShape::unit_disc || disc.base_point() != Complex(0.0))
        throw std::invalid_argument("plain-power requires the unit disc with z0 = 0");
    if (k < 0) throw std::invalid_argument("plain-power: k must be nonnegative");
    if (jet_targets.size() != static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("plain-power: need k+1 jet targets");
    WeightPair w;
    w.construction_ = WeightConstruction::plain_power;
    w.domain_ = disc;
    w.object_kind_ = ObjectKind::function;
    w.k_ = k;
    w.jet_order_ = k + 1;
    w.jet_target_ = std::move(jet_targets);
    return w;
}

double WeightPair::eval_psi(Complex z) const {
    require_interior(domain_, z);
    switch (construction_) {
    case WeightConstruction::radial_example:
        return profile_.eval(std::log(std::abs(z)));
    case WeightConstruction::char_construction: {
        const double G = domain_.green(z);
        if (G == kNegInf) return kNegInf;
        return G + std::max(G, a_);
    }
    case WeightConstruction::power_green: {
        const double G = domain_.green(z);
        if (G == kNegInf) return kNegInf;
        return 2.0 * (k_ + 1) * G;
    }
    case WeightConstruction::plain_power:
        return 2.0 * (k_ + 1) * std::log(std::abs(z));
    }
    throw std::logic_error("weights: unknown construction");
}

double WeightPair::eval_phi(Complex z) const {
    require_interior(domain_, z);
    switch (construction_) {
    case WeightConstruction::radial_example: {
        const double x = std::log(std::abs(z));
        return 2.0 * x - profile_.eval(x);
    }
    case WeightConstruction::char_construction: {
        const double G = domain_.green(z);
        return std::min(G, a_);
    }
    case WeightConstruction::power_green:
    case WeightConstruction::plain_power:
        return 0.0;
    }
    throw std::logic_error("weights: unknown construction");
}

double WeightPair::density(const GainFunction& gain, Complex z) const {
    const double psi = eval_psi(z);
    const double phi = eval_phi(z);
    // psi <= 0 up to roundoff near the outer boundary
    const double c = gain.eval(std::max(0.0, -psi));
    const double factor = (object_kind_ == ObjectKind::form) ? 2.0 : 1.0;
    const double v = factor * std::exp(-phi) * c;
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "weights: nonfinite density at z = " << z.real() << "+" << z.imag() << "i";
        throw std::runtime_error(os.str());
    }
    return v;
}

bool WeightPair::is_radial() const {
    if (domain_.base_point() != Complex(0.0)) return false;
    if (domain_.shape() != DomainShape::unit_disc) return false;
    return true;  // all four constructions are radial about z0 = 0 on the disc
}

double WeightPair::psi_radial(double s) const {
    if (!is_radial()) throw std::logic_error("weights: psi_radial on non-radial pair");
    if (s <= 0.0) return kNegInf;
    const double x = std::log(s);
    switch (construction_) {
    case WeightConstruction::radial_example:
        return profile_.eval(x);
    case WeightConstruction::char_construction:
        return x + std::max(x, a_);
    case WeightConstruction::power_green:
    case WeightConstruction::plain_power:
        return 2.0 * (k_ + 1) * x;
    }
    throw std::logic_error("weights: unknown construction");
}

double WeightPair::phi_radial(double s) const {
    if (!is_radial()) throw std::logic_error("weights: phi_radial on non-radial pair");
    const double x = std::log(s);
    switch (construction_) {
    case WeightConstruction::radial_example:
        return 2.0 * x - profile_.eval(x);
    case WeightConstruction::char_construction:
        return std::min(x, a_);
    case WeightConstruction::power_green:
    case WeightConstruction::plain_power:
        return 0.0;
    }
    throw std::logic_error("weights: unknown construction");
}

double WeightPair::density_radial(const GainFunction& gain, double s) const {
    const double psi = psi_radial(s);
    const double c = gain.eval(std::max(0.0, -psi));
    const double factor = (object_kind_ == ObjectKind::form) ? 2.0 : 1.0;
    return factor * std::exp(-phi_radial(s)) * c;
}

double WeightPair::region_radius(double t) const {
    if (!is_radial()) throw std::logic_error("weights: region_radius on non-radial pair");
    switch (construction_) {
    case WeightConstruction::radial_example: {
        const double top = profile_.limit_at_zero();
        if (-t >= top) return 1.0;
        return std::exp(profile_.inverse(-t));
    }
    case WeightConstruction::char_construction: {
        if (t <= 0.0) return 1.0;
        if (t < -2.0 * a_) return std::exp(-0.5 * t);
        return std::exp(-t - a_);
    }
    case WeightConstruction::power_green:
    case WeightConstruction::plain_power: {
        if (t <= 0.0) return 1.0;
        return std::exp(-t / (2.0 * (k_ + 1)));
    }
    }
    throw std::logic_error("weights: unknown construction");
}

std::vector<double> WeightPair::radial_kinks(const GainFunction& gain, double t) const {
    std::vector<double> kinks;
    const double R = region_radius(t);

    // construction kinks
    if (construction_ == WeightConstruction::radial_example) {
        for (double x : profile_.breakpoints) kinks.push_back(std::exp(x));
    } else if (construction_ == WeightConstruction::char_construction) {
        kinks.push_back(std::exp(a_));
    }

    // gain breakpoints pulled back through -psi: solve psi(s) = -b
    for (double b : gain.breakpoints()) {
        switch (construction_) {
        case WeightConstruction::radial_example: {
            if (-b >= profile_.limit_at_zero()) break;
            kinks.push_back(std::exp(profile_.inverse(-b)));
            break;
        }
        case WeightConstruction::char_construction:
            kinks.push_back(b < -2.0 * a_ ? std::exp(-0.5 * b) : std::exp(-b - a_));
            break;
        case WeightConstruction::power_green:
        case WeightConstruction::plain_power:
            kinks.push_back(std::exp(-b / (2.0 * (k_ + 1))));
            break;
        }
    }

    std::vector<double> inside;
    for (double s : kinks)
        if (s > 0.0 && s < R) inside.push_back(s);
    std::sort(inside.begin(), inside.end());
    inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
    return inside;
}

std::string WeightPair::describe() const {
    std::ostringstream os;
    switch (construction_) {
    case WeightConstruction::radial_example:
        os << "radial-example";
        break;
    case WeightConstruction::char_construction:
        os << "char-construction(a=" << a_ << ")";
        break;
    case WeightConstruction::power_green:
        os << "power-green(k=" << k_ << ")";
        break;
    case WeightConstruction::plain_power:
        os << "plain-power(k=" << k_ << ")";
        break;
    }
    os << " on " << domain_.describe();
    return os.str();
}

int jet_order_of(const WeightPair& w) { return w.jet_order(); }

} // namespace pshlab

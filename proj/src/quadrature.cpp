#include "pshlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pshlab {

void QuadratureSpec::validate() const {
    if (n_r < 16 || n_theta < 16)
        throw std::invalid_argument("quadrature: n_r and n_theta must be >= 16");
    if (!(rel_tol >= 1e-14 && rel_tol <= 1e-2))
        throw std::invalid_argument("quadrature: rel_tol must lie in [1e-14, 1e-2]");
    if (mask_supersample < 1)
        throw std::invalid_argument("quadrature: mask_supersample must be >= 1");
}

namespace {

// Gauss 7 / Kronrod 15 nodes and weights (QUADPACK values).
constexpr double kron_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kron_weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double gauss_weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Interval {
    double a, b, value, error;
};

Interval gk15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double hal = 0.5 * (b - a);
    const double f0 = f(mid);
    double k15 = kron_weights[7] * f0;
    double g7 = gauss_weights[3] * f0;
    for (int i = 0; i < 7; ++i) {
        const double dx = hal * kron_nodes[i];
        const double fs = f(mid - dx) + f(mid + dx);
        k15 += kron_weights[i] * fs;
        if (i % 2 == 1) g7 += gauss_weights[i / 2] * fs;
    }
    k15 *= hal;
    g7 *= hal;
    double err = 200.0 * std::abs(k15 - g7);
    err = err * std::sqrt(err);
    return {a, b, k15, std::min(err, std::abs(k15 - g7) * 10.0 + 1e-300)};
}

} // namespace

IntegralResult radial_integral(const std::function<double(double)>& f, double R,
                               double rel_tol, std::span<const double> breakpoints,
                               int max_intervals) {
    if (!(R >= 0.0) || !std::isfinite(R))
        throw std::invalid_argument("radial_integral: bad upper limit");
    if (R == 0.0) return {0.0, 0.0, flag_empty_region};

    std::vector<double> cuts;
    cuts.push_back(0.0);
    for (double b : breakpoints)
        if (b > 0.0 && b < R) cuts.push_back(b);
    cuts.push_back(R);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Interval> segs;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        segs.push_back(gk15(f, cuts[i], cuts[i + 1]));

    auto totals = [&segs]() {
        double v = 0.0, e = 0.0;
        for (const auto& s : segs) { v += s.value; e += s.error; }
        return std::pair<double, double>(v, e);
    };

    while (true) {
        auto [value, error] = totals();
        const double target = std::max(rel_tol * std::abs(value), 1e-300);
        if (error <= target) return {value, error, flag_ok};
        if (static_cast<int>(segs.size()) >= max_intervals)
            return {value, error, flag_tolerance_not_met};
        auto worst = std::max_element(segs.begin(), segs.end(),
                                      [](const Interval& x, const Interval& y) {
                                          return x.error < y.error;
                                      });
        const Interval w = *worst;
        const double mid = 0.5 * (w.a + w.b);
        if (mid <= w.a || mid >= w.b)   // interval at rounding limit
            return {value, error, flag_tolerance_not_met};
        *worst = gk15(f, w.a, mid);
        segs.push_back(gk15(f, mid, w.b));
    }
}

double region_integral_pass(const std::function<double(std::complex<double>)>& density,
                            const std::function<bool(std::complex<double>)>& mask,
                            PolarBounds bounds, int n_r, int n_theta, int supersample,
                            ExecMode mode) {
    const double h_r = (bounds.r_hi - bounds.r_lo) / n_r;
    const double h_t = 2.0 * M_PI / n_theta;
    const int ss = std::max(1, supersample);

    // pass 1: mask at cell centers
    std::vector<unsigned char> in(static_cast<std::size_t>(n_r) * n_theta);
    for_each_band(static_cast<std::size_t>(n_r), mode, [&](std::size_t i) {
        const double r = bounds.r_lo + (static_cast<double>(i) + 0.5) * h_r;
        for (int j = 0; j < n_theta; ++j) {
            const double th = (j + 0.5) * h_t;
            in[i * n_theta + j] = mask(std::polar(r, th)) ? 1 : 0;
        }
    });

    // pass 2: accumulate; cells whose 4-neighborhood disagrees get a
    // supersampled coverage fraction
    auto row_sum = [&](std::size_t i) -> double {
        const double r = bounds.r_lo + (static_cast<double>(i) + 0.5) * h_r;
        double acc = 0.0;
        for (int j = 0; j < n_theta; ++j) {
            const unsigned char c = in[i * n_theta + j];
            const unsigned char up = (i + 1 < static_cast<std::size_t>(n_r)) ? in[(i + 1) * n_theta + j] : c;
            const unsigned char dn = (i > 0) ? in[(i - 1) * n_theta + j] : c;
            const unsigned char lf = in[i * n_theta + (j + n_theta - 1) % n_theta];
            const unsigned char rt = in[i * n_theta + (j + 1) % n_theta];
            const bool boundary = (up != c) || (dn != c) || (lf != c) || (rt != c);
            double frac;
            if (!boundary) {
                if (!c) continue;
                frac = 1.0;
            } else if (ss == 1) {
                if (!c) continue;
                frac = 1.0;
            } else {
                int hits = 0;
                for (int a = 0; a < ss; ++a) {
                    const double rs = bounds.r_lo + (static_cast<double>(i) + (a + 0.5) / ss) * h_r;
                    for (int b = 0; b < ss; ++b) {
                        const double ts = (static_cast<double>(j) + (b + 0.5) / ss) * h_t;
                        if (mask(std::polar(rs, ts))) ++hits;
                    }
                }
                if (hits == 0) continue;
                frac = static_cast<double>(hits) / (ss * ss);
            }
            const double th = (j + 0.5) * h_t;
            acc += frac * r * h_r * h_t * density(std::polar(r, th));
        }
        return acc;
    };

    return reduce_bands<double>(static_cast<std::size_t>(n_r), mode, 0.0, row_sum,
                                [](double a, double b) { return a + b; });
}

IntegralResult region_integral(const std::function<double(std::complex<double>)>& density,
                               const std::function<bool(std::complex<double>)>& mask,
                               PolarBounds bounds, const QuadratureSpec& spec,
                               ExecMode mode) {
    spec.validate();
    const double fine = region_integral_pass(density, mask, bounds, spec.n_r, spec.n_theta,
                                             spec.mask_supersample, mode);
    const double coarse = region_integral_pass(density, mask, bounds, spec.n_r / 2,
                                               spec.n_theta / 2, spec.mask_supersample, mode);
    IntegralResult res;
    res.value = fine;
    res.error = std::abs(fine - coarse);
    if (fine == 0.0 && coarse == 0.0)
        res.flags |= flag_empty_region;
    else if (res.error > spec.rel_tol * std::abs(fine))
        res.flags |= flag_tolerance_not_met;
    return res;
}

} // namespace pshlab

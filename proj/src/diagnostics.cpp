#include "pshlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pshlab {

Trace reparametrize(const Trace& t_trace, const GainFunction& gain) {
    if (t_trace.axis != TraceAxis::t_axis)
        throw std::invalid_argument("reparametrize: expected a t-axis trace");
    t_trace.validate(false);

    Trace out;
    out.axis = TraceAxis::r_axis;
    out.flags = t_trace.flags;
    out.provenance = t_trace.provenance;
    const std::size_t n = t_trace.size();
    out.abscissae.resize(n);
    out.values.resize(n);
    out.errors.resize(n);
    // h is strictly decreasing, so reversing the order makes r ascend
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = n - 1 - i;
        out.abscissae[i] = gain.h(t_trace.abscissae[k]);
        out.values[i] = t_trace.values[k];
        out.errors[i] = t_trace.errors[k];
    }
    out.validate(false);
    return out;
}

Trace neglog_trace(const Trace& t_trace) {
    Trace out = t_trace;
    out.provenance = "-log " + t_trace.provenance;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double g = t_trace.values[i];
        if (!(g > 0.0))
            throw std::invalid_argument("neglog_trace: nonpositive value");
        out.values[i] = -std::log(g);
        out.errors[i] = t_trace.errors[i] / g;   // |d(-log G)| = dG/G
    }
    return out;
}

std::vector<SecondDifference> second_differences(const Trace& trace) {
    if (trace.size() < 3)
        throw std::invalid_argument("second_differences: need >= 3 points");
    const double scale = std::max(trace.max_abs_value(), 1e-300);
    std::vector<SecondDifference> out;
    out.reserve(trace.size() - 2);
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
        const double h1 = trace.abscissae[i] - trace.abscissae[i - 1];
        const double h2 = trace.abscissae[i + 1] - trace.abscissae[i];
        const double g1 = trace.values[i - 1], g2 = trace.values[i], g3 = trace.values[i + 1];
        const double d = 2.0 * (g3 * h1 - g2 * (h1 + h2) + g1 * h2) / (h1 * h2 * (h1 + h2));
        out.push_back({trace.abscissae[i], d / scale});
    }
    return out;
}

double second_difference_noise_floor(const Trace& trace) {
    if (trace.size() < 3) return 0.0;
    const double scale = std::max(trace.max_abs_value(), 1e-300);
    double floor = 0.0;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
        const double h1 = trace.abscissae[i] - trace.abscissae[i - 1];
        const double h2 = trace.abscissae[i + 1] - trace.abscissae[i];
        const double e1 = trace.errors[i - 1], e2 = trace.errors[i], e3 = trace.errors[i + 1];
        const double d = 2.0 * (e3 * h1 + e2 * (h1 + h2) + e1 * h2) / (h1 * h2 * (h1 + h2));
        floor = std::max(floor, d / scale);
    }
    return floor;
}

double recommended_tol(const Trace& trace, double base) {
    return std::max(base, 10.0 * second_difference_noise_floor(trace));
}

namespace {

LinearSegment fit_segment(const Trace& tr, std::size_t lo, std::size_t hi) {
    // least squares line over points [lo, hi]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
        sx += tr.abscissae[i];
        sy += tr.values[i];
        sxx += tr.abscissae[i] * tr.abscissae[i];
        sxy += tr.abscissae[i] * tr.values[i];
    }
    const double det = n * sxx - sx * sx;
    LinearSegment seg;
    seg.slope = (n * sxy - sx * sy) / det;
    seg.intercept = (sy - seg.slope * sx) / n;
    seg.i_lo = lo;
    seg.i_hi = hi;
    seg.x_lo = tr.abscissae[lo];
    seg.x_hi = tr.abscissae[hi];
    for (std::size_t i = lo; i <= hi; ++i)
        seg.max_dev = std::max(
            seg.max_dev, std::abs(tr.values[i] - (seg.slope * tr.abscissae[i] + seg.intercept)));
    return seg;
}

} // namespace

ConcavityReport classify(const Trace& r_trace, double tol) {
    if (r_trace.size() < 4)
        throw std::invalid_argument("classify: need >= 4 points");
    if (!(tol > 0.0))
        throw std::invalid_argument("classify: tol must be positive");

    const double floor = second_difference_noise_floor(r_trace);
    if (tol < floor)
        throw std::invalid_argument(
            "classify: tol " + std::to_string(tol) + " below the propagated noise floor " +
            std::to_string(floor) + "; refusing to judge below quadrature error");

    const auto D = second_differences(r_trace);
    ConcavityReport rep;
    rep.tol = tol;
    rep.noise_floor = floor;
    rep.concave = true;
    rep.convex = true;
    for (const auto& d : D) {
        if (d.value > rep.worst_concavity_violation) {
            rep.worst_concavity_violation = d.value;
            rep.worst_concavity_location = d.midpoint;
        }
        if (-d.value > rep.worst_convexity_violation) {
            rep.worst_convexity_violation = -d.value;
            rep.worst_convexity_location = d.midpoint;
        }
        if (d.value > tol) rep.concave = false;
        if (d.value < -tol) rep.convex = false;
    }

    // greedy runs of |D| <= tol; a run over D indices [p,q] spans points [p-1, q+1]
    const double scale = std::max(r_trace.max_abs_value(), 1e-300);
    std::size_t p = 0;
    while (p < D.size()) {
        if (std::abs(D[p].value) > tol) {
            ++p;
            continue;
        }
        std::size_t q = p;
        while (q + 1 < D.size() && std::abs(D[q + 1].value) <= tol) ++q;
        const std::size_t lo = p, hi = q + 2;   // point indices
        if (hi - lo + 1 >= 5) {
            LinearSegment seg = fit_segment(r_trace, lo, hi);
            if (seg.max_dev <= tol * scale) rep.segments.push_back(seg);
        }
        p = q + 1;
    }

    // kinks between consecutive segments with a real slope gap
    const double span = r_trace.abscissae.back() - r_trace.abscissae.front();
    const double slope_scale = scale / std::max(span, 1e-300);
    for (std::size_t i = 1; i < rep.segments.size(); ++i) {
        const auto& a = rep.segments[i - 1];
        const auto& b = rep.segments[i];
        if (std::abs(a.slope - b.slope) > 5.0 * tol * slope_scale) {
            Kink k;
            k.left_slope = a.slope;
            k.right_slope = b.slope;
            k.x = (b.intercept - a.intercept) / (a.slope - b.slope);
            if (!(k.x >= a.x_hi - (a.x_hi - a.x_lo) && k.x <= b.x_lo + (b.x_hi - b.x_lo)))
                k.x = 0.5 * (a.x_hi + b.x_lo);   // intersection escaped the gap
            rep.kinks.push_back(k);
        }
    }
    return rep;
}

LemmaConcaveReport lemma_concave_predicate(const Trace& x_trace, double tol) {
    if (x_trace.axis != TraceAxis::t_axis)
        throw std::invalid_argument("lemma_concave_predicate: expected a t-axis trace");
    x_trace.validate(true);
    for (std::size_t i = 0; i < x_trace.size(); ++i) {
        if (!(x_trace.values[i] > 0.0))
            throw std::invalid_argument("lemma_concave_predicate: x must be positive");
        if (i > 0 && !(x_trace.values[i] < x_trace.values[i - 1]))
            throw std::invalid_argument("lemma_concave_predicate: x must be strictly decreasing");
    }

    LemmaConcaveReport rep;

    const Trace nl = neglog_trace(x_trace);
    bool convex = true;
    for (const auto& d : second_differences(nl))
        if (d.value < -tol) convex = false;
    rep.neglog_convex = convex;

    bool nondec = true;
    for (std::size_t i = 1; i < x_trace.size(); ++i) {
        const double prev = std::log(x_trace.values[i - 1]) + x_trace.abscissae[i - 1];
        const double cur = std::log(x_trace.values[i]) + x_trace.abscissae[i];
        if (cur < prev - tol * (1.0 + std::abs(prev))) nondec = false;
    }
    rep.logx_plus_t_nondecreasing = nondec;
    rep.hypotheses_hold = convex && nondec;

    // conclusion: x(-log r) concave, i.e. the r-axis trace under c == 1
    const Trace r = reparametrize(x_trace, GainFunction::constant(1.0));
    bool concave = true;
    for (const auto& d : second_differences(r))
        if (d.value > tol) concave = false;
    rep.conclusion_concave = concave;
    return rep;
}

LemmaNotConvexReport lemma_notconvex_predicate(const Trace& g_trace, double r0, double slope,
                                               double intercept, double tol) {
    if (g_trace.axis != TraceAxis::r_axis)
        throw std::invalid_argument("lemma_notconvex_predicate: expected an r-axis trace");
    g_trace.validate(true);

    const double scale = std::max(g_trace.max_abs_value(), 1e-300);
    const ConcavityReport rep = classify(g_trace, std::max(tol, recommended_tol(g_trace, tol)));
    if (!rep.concave)
        throw std::invalid_argument("lemma_notconvex_predicate: trace not concave");
    if (!(slope > 0.0))
        throw std::invalid_argument("lemma_notconvex_predicate: needs increasing g");

    // g(0) = 0 hypothesis: extrapolate the first two points to r = 0
    const double g0 = g_trace.values[0] -
                      g_trace.abscissae[0] * (g_trace.values[1] - g_trace.values[0]) /
                          (g_trace.abscissae[1] - g_trace.abscissae[0]);
    if (std::abs(g0) > 10.0 * tol * scale)
        throw std::invalid_argument("lemma_notconvex_predicate: g(0) != 0");

    LemmaNotConvexReport out;
    out.intercept = intercept;
    out.predicted = intercept > tol * scale;

    // cross-check: -log g(e^{-t}) on the t axis must fail convexity
    Trace tt;
    tt.axis = TraceAxis::t_axis;
    tt.provenance = "-log g(e^{-t})";
    const std::size_t n = g_trace.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = n - 1 - i;
        const double r = g_trace.abscissae[k];
        const double g = g_trace.values[k];
        if (!(r > 0.0) || !(g > 0.0)) continue;
        tt.abscissae.push_back(-std::log(r));
        tt.values.push_back(-std::log(g));
        tt.errors.push_back(g_trace.errors[k] / g);
    }
    bool convex = true;
    for (const auto& d : second_differences(tt))
        if (d.value < -tol) convex = false;
    out.confirmed = !convex;
    (void)r0;
    return out;
}

SplitResidual measure_splitting_check(const WeightPair& w, const GainFunction& gain,
                                      const MinimizerResult& minimizer, double T1, double T2,
                                      double kappa, const ProbeSpec& probe,
                                      const QuadratureSpec& quad, ExecMode mode) {
    if (!(T1 < T2))
        throw std::invalid_argument("measure_splitting_check: need T1 < T2");
    if (!(probe.t1 >= T1 - 1e-12 && probe.t2 <= T2 + 1e-12 && probe.t1 < probe.t2))
        throw std::invalid_argument("measure_splitting_check: probe window outside segment");

    const double t1 = probe.t1, t2 = probe.t2;

    // The shell mask {-t2 <= psi < -t1} below realizes the indicator window
    // exactly, so the density carries only the smooth factor of a(-psi);
    // otherwise supersampled boundary cells would lose their mass whenever
    // the cell center falls outside the window.
    auto probe_smooth = [&probe](double t) {
        switch (probe.kind) {
        case ProbeSpec::Kind::indicator:
            return 1.0;
        case ProbeSpec::Kind::exp_window:
            return std::exp(probe.beta * t);
        case ProbeSpec::Kind::zero:
            return 0.0;
        }
        return 0.0;
    };

    // analytic right side: kappa * int_{t1}^{t2} a(t) e^{-t} dt
    double rhs_int = 0.0;
    if (probe.kind == ProbeSpec::Kind::indicator) {
        rhs_int = std::exp(-t1) - std::exp(-t2);
    } else if (probe.kind == ProbeSpec::Kind::exp_window) {
        const double b = probe.beta - 1.0;
        rhs_int = (std::abs(b) < 1e-14) ? (t2 - t1)
                                        : (std::exp(b * t2) - std::exp(b * t1)) / b;
    }
    const double rhs = kappa * rhs_int;

    // left side: shell integral of |F|^2 e^{-phi} a(-psi)
    const double factor = (w.object_kind() == ObjectKind::form) ? 2.0 : 1.0;
    const int n_min = minimizer.n_min;
    const Complex center = minimizer.center;
    const Eigen::VectorXcd& x = minimizer.x;

    auto F_value = [&x, n_min, center](Complex z) {
        const Complex u = z - center;
        Complex acc = 0.0;
        Complex zp = std::pow(u, n_min);
        for (int i = 0; i < x.size(); ++i) {
            acc += x(i) * zp;
            zp *= u;
        }
        return acc;
    };
    auto density = [&](Complex z) {
        const double psi = w.eval_psi(z);
        const double phi = w.eval_phi(z);
        return factor * std::norm(F_value(z)) * std::exp(-phi) * probe_smooth(-psi);
    };
    auto shell = [&](Complex z) {
        if (!w.domain().contains(z)) return false;
        const double psi = w.eval_psi(z);
        return psi < -t1 && psi >= -t2;
    };

    IntegralResult lhs{0.0, 0.0, flag_ok};
    if (probe.kind != ProbeSpec::Kind::zero) {
        if (w.is_radial() && n_min == 0 && center == Complex(0.0)) {
            // exact angular reduction: int |F|^2 dtheta = 2 pi sum |x_n|^2 s^{2n}
            auto radial_f = [&](double s) {
                double acc = 0.0;
                double sp = s;   // s^{2n+1} starting at n = 0
                for (int n = 0; n < x.size(); ++n) {
                    acc += std::norm(x(n)) * sp;
                    sp *= s * s;
                }
                return acc * std::exp(-w.phi_radial(s)) *
                       probe_smooth(std::max(0.0, -w.psi_radial(s)));
            };
            const double R1 = w.region_radius(t1);
            const double R2 = w.region_radius(t2);
            const auto kinks = w.radial_kinks(gain, t1);
            const auto I1 = radial_integral(radial_f, R1, quad.radial_tol, kinks);
            const auto I2 = radial_integral(radial_f, R2, quad.radial_tol, kinks);
            lhs.value = factor * 2.0 * M_PI * (I1.value - I2.value);
            lhs.error = factor * 2.0 * M_PI * (I1.error + I2.error);
            lhs.flags = merge_flags(I1.flags, I2.flags) & ~flag_empty_region;
        } else {
            lhs = region_integral(density, shell, w.domain().bounds(), quad, mode);
        }
    }

    SplitResidual out;
    out.lhs = lhs.value;
    out.lhs_error = lhs.error;
    out.rhs = rhs;
    out.flags = lhs.flags;
    out.residual = std::abs(lhs.value - rhs) / std::max(std::abs(rhs), 1e-300);
    return out;
}

} // namespace pshlab

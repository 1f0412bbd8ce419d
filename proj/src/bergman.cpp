#include "pshlab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pshlab {

void BasisSpec::validate() const {
    if (n_min > 0 || n_max < 0 || n_min > n_max)
        throw std::invalid_argument("basis: window must contain order 0");
    if (size() > 512)
        throw std::invalid_argument("basis: more than 512 elements");
    if (n_min < 0 && center != Complex(0.0))
        throw std::invalid_argument("basis: Laurent windows are centered at the origin");
}

Eigen::MatrixXcd jet_constraint_rows(Complex z0, int nu, int n_min, int n_max) {
    const int N = n_max - n_min + 1;
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(nu, N);
    if (z0 == Complex(0.0)) {
        if (n_min != 0)
            throw std::invalid_argument("jet rows: z0 = 0 requires n_min = 0");
        for (int j = 0; j < nu && j <= n_max; ++j)
            C(j, j) = 1.0;
        return C;
    }
    for (int j = 0; j < nu; ++j) {
        for (int col = 0; col < N; ++col) {
            const int n = n_min + col;
            // binom(n, j) via the falling factorial (valid for negative n)
            double binom = 1.0;
            for (int i = 0; i < j; ++i)
                binom *= static_cast<double>(n - i) / static_cast<double>(i + 1);
            if (binom == 0.0) continue;
            const int e = n - j;
            Complex zp = 1.0;
            const Complex base = (e >= 0) ? z0 : 1.0 / z0;
            for (int i = 0; i < std::abs(e); ++i) zp *= base;
            C(j, col) = binom * zp;
        }
    }
    return C;
}

namespace {

double smallest_singular(const Eigen::MatrixXcd& C) {
    if (C.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C);
    return svd.singularValues().tail(1)(0);
}

// ---------------------------------------------------------------------------
// radial diagonal assembly (disc, z0 = 0)

GramSystem assemble_radial(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                           double t, const QuadratureSpec& quad) {
    if (basis.n_min != 0)
        throw std::invalid_argument("assemble_gram: simply connected region needs n_min = 0");
    const int N = basis.size();
    GramSystem sys;
    sys.n_min = 0;
    sys.t = t;
    sys.A = Eigen::MatrixXcd::Zero(N, N);
    sys.diag_errors = Eigen::VectorXd::Zero(N);

    const double R = w.region_radius(t);
    const auto kinks = w.radial_kinks(gain, t);
    for (int n = 0; n < N; ++n) {
        auto f = [&w, &gain, n](double s) {
            return std::pow(s, 2 * n + 1) * w.density_radial(gain, s);
        };
        const IntegralResult r =
            radial_integral(f, R, quad.radial_tol, kinks, quad.max_intervals);
        sys.A(n, n) = 2.0 * M_PI * r.value;
        sys.diag_errors(n) = 2.0 * M_PI * r.error;
        sys.flags = merge_flags(sys.flags, r.flags & ~flag_empty_region);
    }
    if (R <= 0.0) sys.flags |= flag_empty_region;

    const int nu = w.jet_order();
    sys.C = jet_constraint_rows(Complex(0.0), nu, 0, basis.n_max);
    sys.d = Eigen::VectorXcd::Zero(nu);
    for (int j = 0; j < nu; ++j) sys.d(j) = w.jet_target()[static_cast<std::size_t>(j)];
    sys.c_min_singular = smallest_singular(sys.C);
    return sys;
}

// ---------------------------------------------------------------------------
// Green sublevel sweep (annulus, density == const): exact radial moments
// between the ray crossings of G = -tau, midpoint rule in the angle.

struct RayGeometry {
    Complex center;                  // rays emanate from here
    int n_r, n_theta;
    double r_lo, r_hi, h_r, h_theta;
    std::vector<double> samples;     // [ray][radial node]
    std::vector<double> ray_min;     // min_i G on each ray
    std::vector<double> ray_tail;    // G at the outermost node of each ray
};

RayGeometry build_rays(const DomainModel& domain, Complex center, double r_lo, double r_hi,
                       int n_r, int n_theta, ExecMode mode) {
    RayGeometry g;
    g.center = center;
    g.n_r = n_r;
    g.n_theta = n_theta;
    g.r_lo = r_lo;
    g.r_hi = r_hi;
    g.h_r = (r_hi - r_lo) / n_r;
    g.h_theta = 2.0 * M_PI / n_theta;
    g.samples.assign(static_cast<std::size_t>(n_r) * n_theta, 0.0);
    g.ray_min.assign(n_theta, 0.0);
    g.ray_tail.assign(n_theta, 0.0);

    for_each_band(static_cast<std::size_t>(n_theta), mode, [&](std::size_t j) {
        const double th = (static_cast<double>(j) + 0.5) * g.h_theta;
        double mn = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_r; ++i) {
            const double r = g.r_lo + (i + 0.5) * g.h_r;
            const double v = domain.green(center + std::polar(r, th));
            g.samples[j * static_cast<std::size_t>(n_r) + i] = v;
            mn = std::min(mn, v);
        }
        g.ray_min[j] = mn;
        g.ray_tail[j] = g.samples[j * static_cast<std::size_t>(n_r) + n_r - 1];
    });
    return g;
}

double refine_crossing(const DomainModel& domain, Complex center, double theta, double lo,
                       double hi, double tau) {
    // G + tau changes sign on [lo, hi]
    auto f = [&](double r) { return domain.green(center + std::polar(r, theta)) + tau; };
    double flo = f(lo);
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Accumulated angular Fourier data: uhat[s - s_min][delta] with s = m+n,
// delta = m-n >= 0.
struct FourierAccum {
    int s_min, s_max, d_max;
    std::vector<Complex> data;   // (s_max-s_min+1) x (d_max+1)

    FourierAccum(int smin, int smax, int dmax)
        : s_min(smin), s_max(smax), d_max(dmax),
          data(static_cast<std::size_t>(smax - smin + 1) * (dmax + 1), Complex(0.0)) {}

    Complex& at(int s, int d) {
        return data[static_cast<std::size_t>(s - s_min) * (d_max + 1) + d];
    }
    Complex at(int s, int d) const {
        return data[static_cast<std::size_t>(s - s_min) * (d_max + 1) + d];
    }
    FourierAccum& operator+=(const FourierAccum& o) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        return *this;
    }
};

// Gram of one tau at one resolution; returns matrix over the full window.
Eigen::MatrixXcd sweep_one(const DomainModel& domain, const RayGeometry& g, BasisSpec window,
                           double tau, ExecMode mode, bool* any_interval) {
    const int n_min = window.n_min, n_max = window.n_max;
    const int s_min = 2 * n_min, s_max = 2 * n_max, d_max = n_max - n_min;
    const int n_powers = s_max - s_min + 1;

    auto add_ray = [&](FourierAccum& acc, std::size_t j) {
        if (g.ray_min[j] >= -tau) return;
        const double* ray = &g.samples[j * static_cast<std::size_t>(g.n_r)];
        const double theta = (static_cast<double>(j) + 0.5) * g.h_theta;

        // crossing intervals of {G < -tau} along the ray
        std::vector<std::pair<double, double>> intervals;
        bool inside = ray[0] < -tau;
        double start = g.r_lo;
        for (int i = 0; i + 1 < g.n_r; ++i) {
            const bool next_inside = ray[i + 1] < -tau;
            if (next_inside != inside) {
                const double a = g.r_lo + (i + 0.5) * g.h_r;
                const double b = g.r_lo + (i + 1.5) * g.h_r;
                const double c = refine_crossing(domain, g.center, theta, a, b, tau);
                if (inside)
                    intervals.emplace_back(start, c);
                else
                    start = c;
                inside = next_inside;
            }
        }
        if (inside) intervals.emplace_back(start, g.r_hi);
        if (intervals.empty()) return;

        // u[s] = int r^{s+1} dr over the intervals (exact antiderivative)
        std::vector<double> u(static_cast<std::size_t>(n_powers), 0.0);
        for (const auto& [a, b] : intervals) {
            // powers a^{p}, b^{p} for p = s+2 in [s_min+2, s_max+2]
            double ap = std::pow(a, s_min + 2), bp = std::pow(b, s_min + 2);
            for (int s = s_min; s <= s_max; ++s) {
                const int p = s + 2;
                if (p == 0)
                    u[static_cast<std::size_t>(s - s_min)] += std::log(b / a);
                else
                    u[static_cast<std::size_t>(s - s_min)] += (bp - ap) / p;
                ap *= a;
                bp *= b;
            }
        }

        // accumulate u[s] e^{i delta theta} dtheta; delta shares the parity of s
        const Complex rot = std::polar(1.0, theta);
        const Complex rot2 = rot * rot;
        for (int s = s_min; s <= s_max; ++s) {
            const double us = u[static_cast<std::size_t>(s - s_min)];
            if (us == 0.0) continue;
            const int dmax_s = std::min(s - 2 * n_min, 2 * n_max - s);
            const int d0 = std::abs(s % 2);
            Complex e = (d0 == 0) ? Complex(g.h_theta) : g.h_theta * rot;
            for (int d = d0; d <= dmax_s; d += 2) {
                acc.at(s, d) += us * e;
                e *= rot2;
            }
        }
    };

    // fixed band layout (independent of thread count) keeps partial memory
    // small and the fold order deterministic
    const std::size_t n_bands = 64;
    const std::size_t per_band =
        (static_cast<std::size_t>(g.n_theta) + n_bands - 1) / n_bands;
    auto band = [&](std::size_t b) -> FourierAccum {
        FourierAccum acc(s_min, s_max, d_max);
        const std::size_t j0 = b * per_band;
        const std::size_t j1 = std::min(j0 + per_band, static_cast<std::size_t>(g.n_theta));
        for (std::size_t j = j0; j < j1; ++j) add_ray(acc, j);
        return acc;
    };

    FourierAccum total = reduce_bands<FourierAccum>(
        n_bands, mode, FourierAccum(s_min, s_max, d_max), band,
        [](FourierAccum a, FourierAccum b) {
            a += b;
            return a;
        });

    const int N = window.size();
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(N, N);
    bool nonzero = false;
    for (int mi = 0; mi < N; ++mi) {
        for (int ni = 0; ni <= mi; ++ni) {
            const int m = n_min + mi, n = n_min + ni;
            const Complex v = total.at(m + n, m - n);
            if (v != Complex(0.0)) nonzero = true;
            A(mi, ni) = v;
            A(ni, mi) = std::conj(v);
        }
    }
    if (any_interval) *any_interval = nonzero;
    return A;
}

} // namespace

GreenGrams green_sublevel_grams(const DomainModel& domain, BasisSpec window,
                                const std::vector<double>& taus, const QuadratureSpec& quad,
                                ExecMode mode) {
    window.validate();
    quad.validate();
    if (domain.shape() != DomainShape::annulus)
        throw std::invalid_argument("green_sublevel_grams: annulus domains only");

    const PolarBounds b = domain.bounds();
    const RayGeometry fine =
        build_rays(domain, 0.0, b.r_lo, b.r_hi, quad.n_r, quad.n_theta, mode);
    const RayGeometry coarse =
        build_rays(domain, 0.0, b.r_lo, b.r_hi, quad.n_r / 2, quad.n_theta / 2, mode);

    // recentered geometry around the base point for the deep sublevel sets
    const Complex z0 = domain.base_point();
    const double reach =
        0.95 * std::min(b.r_hi - std::abs(z0), std::abs(z0) - b.r_lo);
    const RayGeometry cfine =
        build_rays(domain, z0, 0.0, reach, quad.n_r, quad.n_theta, mode);
    const RayGeometry ccoarse =
        build_rays(domain, z0, 0.0, reach, quad.n_r / 2, quad.n_theta / 2, mode);

    BasisSpec cwindow = window;
    cwindow.n_min = 0;
    cwindow.center = z0;

    GreenGrams out;
    out.systems.resize(taus.size());
    out.alt.resize(taus.size());
    out.simply_connected.resize(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double tau = taus[i];
        if (!(tau >= 0.0))
            throw std::invalid_argument("green_sublevel_grams: tau must be nonnegative");

        // the region sits strictly inside the recentered reach when every ray
        // from z0 ends outside it (and z0's neighborhood is inside)
        bool contained = tau > 0.0;
        for (double tail : cfine.ray_tail)
            if (tail < -tau) { contained = false; break; }

        // handoff band: region contained but still angularly large as seen
        // from the origin, so both phases remain informative
        std::size_t occupied = 0;
        for (double m : fine.ray_min)
            if (m < -tau) ++occupied;

        bool empty_ray = false;   // an empty ray certifies no wrap of the hole
        for (double m : fine.ray_min)
            if (m >= -tau) { empty_ray = true; break; }

        GramSystem sys, alt;
        sys.t = tau;
        alt.t = tau;
        bool nonzero = false;
        if (contained) {
            sys.n_min = 0;
            sys.center = z0;
            sys.A = sweep_one(domain, cfine, cwindow, tau, mode, &nonzero);
            sys.A_coarse = sweep_one(domain, ccoarse, cwindow, tau, mode, nullptr);
            out.simply_connected[i] = true;
            if (2 * occupied >= static_cast<std::size_t>(fine.n_theta)) {
                alt.n_min = window.n_min;
                alt.A = sweep_one(domain, fine, window, tau, mode, nullptr);
                alt.A_coarse = sweep_one(domain, coarse, window, tau, mode, nullptr);
            }
        } else {
            sys.n_min = window.n_min;
            sys.A = sweep_one(domain, fine, window, tau, mode, &nonzero);
            sys.A_coarse = sweep_one(domain, coarse, window, tau, mode, nullptr);
            out.simply_connected[i] = empty_ray;
        }
        if (!nonzero) sys.flags |= flag_empty_region;
        out.systems[i] = std::move(sys);
        out.alt[i] = std::move(alt);
    }
    return out;
}

GreenLevelSolve solve_green_level(const GramSystem& wide_primary, const GramSystem* wide_alt,
                                  Complex z0, int nu, const Eigen::VectorXcd& d,
                                  int requested_n_min, int base_n_max, double density_const) {
    GreenLevelSolve out;
    if (wide_primary.empty_region()) return out;

    auto solve_phase = [&](const GramSystem& wide, double& G, double& err,
                           std::uint32_t& flags, MinimizerResult& res) {
        // recentered assemblies start at order 0; origin assemblies keep the
        // full Laurent window (negative powers stay valid competitors)
        const int lo = (wide.center != Complex(0.0)) ? 0 : requested_n_min;
        const int wide_n_max = wide.n_min + wide.size() - 1;
        GramSystem base = slice_gram(wide, z0, nu, d, lo, base_n_max);
        GramSystem ext = slice_gram(wide, z0, nu, d, lo, wide_n_max);
        base.A *= density_const;
        base.A_coarse *= density_const;
        ext.A *= density_const;

        res = solve_constrained_min(base);
        const MinimizerResult re = solve_constrained_min(ext);
        G = res.G;
        err = std::abs(re.G - res.G);
        flags = merge_flags(res.flags, base.flags);
        if (err > 1e-6 * std::max(std::abs(res.G), 1e-300)) flags |= flag_basis_unstable;

        GramSystem coarse = base;
        coarse.A = base.A_coarse;
        coarse.A_coarse.resize(0, 0);
        try {
            err += 0.5 * std::abs(solve_constrained_min(coarse).G - res.G);
        } catch (const std::exception&) {
            err += std::abs(res.G);
        }
    };

    double G1 = 0, e1 = 0;
    std::uint32_t f1 = flag_ok;
    MinimizerResult r1;
    solve_phase(wide_primary, G1, e1, f1, r1);

    if (wide_alt && wide_alt->A.size() > 0) {
        double G2 = 0, e2 = 0;
        std::uint32_t f2 = flag_ok;
        MinimizerResult r2;
        solve_phase(*wide_alt, G2, e2, f2, r2);
        // both phases give upper bounds; take the lower envelope and carry
        // the gap as uncertainty
        const double gap = std::abs(G1 - G2);
        if (G2 < G1) {
            G1 = G2;
            e1 = e2;
            f1 = f2;
            r1 = r2;
        }
        e1 += gap;
        f1 = merge_flags(f1, flag_ok);
    }

    out.kept = true;
    out.G = G1;
    out.error = e1;
    out.flags = f1;
    out.result = std::move(r1);
    return out;
}

GramSystem slice_gram(const GramSystem& sys, Complex z0, int nu, const Eigen::VectorXcd& d,
                      int lo_n, int hi_n) {
    const int off = lo_n - sys.n_min;
    const int N = hi_n - lo_n + 1;
    if (off < 0 || off + N > sys.size())
        throw std::invalid_argument("slice_gram: window outside assembly");
    GramSystem s;
    s.A = sys.A.block(off, off, N, N);
    if (sys.A_coarse.size() > 0) s.A_coarse = sys.A_coarse.block(off, off, N, N);
    if (sys.diag_errors.size() > 0) s.diag_errors = sys.diag_errors.segment(off, N);
    s.n_min = lo_n;
    s.center = sys.center;
    s.t = sys.t;
    s.flags = sys.flags;
    s.C = jet_constraint_rows(z0 - sys.center, nu, lo_n, hi_n);
    s.d = d;
    s.c_min_singular = smallest_singular(s.C);
    return s;
}

namespace {

// recentered reach radius around the base point
double recenter_reach(const DomainModel& dom) {
    const PolarBounds b = dom.bounds();
    const double q = std::abs(dom.base_point());
    return 0.95 * std::min(b.r_hi - q, q - b.r_lo);
}

// true when {psi < -t} sits strictly inside the recentered reach disc
// (checked on dense rays from the base point)
bool region_certified_contained(const WeightPair& w, double t) {
    if (t <= 0.0) return false;
    const Complex z0 = w.domain().base_point();
    const double reach = recenter_reach(w.domain());
    for (int j = 0; j < 256; ++j) {
        const double th = (j + 0.5) * 2.0 * M_PI / 256;
        const Complex z = z0 + std::polar(reach * (1.0 - 1e-6), th);
        if (!w.domain().contains(z) || w.eval_psi(z) < -t) return false;
    }
    return true;
}

// generic masked-node assembly (any density, any base point); used when no
// structure applies and by the cross-check tests
GramSystem assemble_dense_nodes(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                                double t, const QuadratureSpec& quad, ExecMode mode,
                                int n_r, int n_theta, Eigen::MatrixXcd* out_A_only) {
    const DomainModel& dom = w.domain();
    const PolarBounds b = dom.bounds();
    const double h_r = (b.r_hi - b.r_lo) / n_r;
    const double h_t = 2.0 * M_PI / n_theta;
    const int n_min = basis.n_min, N = basis.size();
    const Complex z0 = dom.base_point();
    const Complex center = basis.center;

    const std::size_t n_bands = 64;
    const std::size_t per_band = (static_cast<std::size_t>(n_r) + n_bands - 1) / n_bands;
    auto band = [&](std::size_t bi) -> Eigen::MatrixXcd {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(N, N);
        Eigen::VectorXcd v(N);
        const std::size_t i0 = bi * per_band;
        const std::size_t i1 = std::min(i0 + per_band, static_cast<std::size_t>(n_r));
        for (std::size_t i = i0; i < i1; ++i) {
            const double r = b.r_lo + (static_cast<double>(i) + 0.5) * h_r;
            for (int j = 0; j < n_theta; ++j) {
                const Complex z = std::polar(r, (j + 0.5) * h_t);
                if (z == z0) continue;
                const double psi = w.eval_psi(z);
                if (!(psi < -t)) continue;
                const double dens = w.density(gain, z);
                v(0) = std::pow(z - center, n_min);
                for (int c = 1; c < N; ++c) v(c) = v(c - 1) * (z - center);
                acc.selfadjointView<Eigen::Lower>().rankUpdate(v, dens * r * h_r * h_t);
            }
        }
        return acc;
    };

    Eigen::MatrixXcd A = reduce_bands<Eigen::MatrixXcd>(
        n_bands, mode, Eigen::MatrixXcd::Zero(N, N), band,
        [](Eigen::MatrixXcd a, Eigen::MatrixXcd p) {
            a += p;
            return a;
        });
    A = A.selfadjointView<Eigen::Lower>();

    if (out_A_only) {
        *out_A_only = std::move(A);
        return {};
    }
    GramSystem sys;
    sys.A = std::move(A);
    sys.n_min = n_min;
    sys.center = center;
    sys.t = t;
    if (sys.A.norm() == 0.0) sys.flags |= flag_empty_region;
    const int nu = w.jet_order();
    sys.C = jet_constraint_rows(z0 - center, nu, n_min, basis.n_max);
    sys.d = Eigen::VectorXcd::Zero(nu);
    for (int j = 0; j < nu; ++j) sys.d(j) = w.jet_target()[static_cast<std::size_t>(j)];
    sys.c_min_singular = smallest_singular(sys.C);
    (void)quad;
    return sys;
}

bool density_is_constant(const WeightPair& w, const GainFunction& gain) {
    return w.construction() == WeightConstruction::power_green &&
           gain.kind() == GainKind::constant;
}

Eigen::VectorXcd jet_vector(const WeightPair& w) {
    Eigen::VectorXcd d(w.jet_order());
    for (int j = 0; j < w.jet_order(); ++j) d(j) = w.jet_target()[static_cast<std::size_t>(j)];
    return d;
}

} // namespace

GramSystem assemble_gram(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                         double t, const QuadratureSpec& quad, ExecMode mode) {
    basis.validate();
    quad.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("assemble_gram: t must be nonnegative");

    if (w.is_radial())
        return assemble_radial(w, gain, basis, t, quad);

    if (density_is_constant(w, gain)) {
        const double scale = 2.0 * (w.power_k() + 1);
        const double c0 = gain.eval(0.0);
        GreenGrams gg = green_sublevel_grams(w.domain(), basis, {t / scale}, quad, mode);
        GramSystem sys = std::move(gg.systems[0]);
        sys.t = t;
        sys.A *= c0;
        sys.A_coarse *= c0;
        // recentered assemblies start at order 0; origin assemblies keep the
        // full Laurent window
        const int lo = (sys.center != Complex(0.0)) ? 0 : basis.n_min;
        return slice_gram(sys, w.domain().base_point(), w.jet_order(), jet_vector(w), lo,
                          basis.n_max);
    }

    if (w.domain().shape() == DomainShape::annulus && region_certified_contained(w, t)) {
        basis.n_min = 0;
        basis.center = w.domain().base_point();
    }
    GramSystem fine = assemble_dense_nodes(w, gain, basis, t, quad, mode, quad.n_r,
                                           quad.n_theta, nullptr);
    Eigen::MatrixXcd coarse;
    assemble_dense_nodes(w, gain, basis, t, quad, mode, quad.n_r / 2, quad.n_theta / 2, &coarse);
    fine.A_coarse = std::move(coarse);
    return fine;
}

std::vector<GramSystem> assemble_gram_trace(const WeightPair& w, const GainFunction& gain,
                                            BasisSpec basis, const std::vector<double>& t_grid,
                                            const QuadratureSpec& quad, ExecMode mode) {
    basis.validate();
    std::vector<GramSystem> out;
    out.reserve(t_grid.size());

    if (w.is_radial()) {
        out.resize(t_grid.size());
        for_each_band(t_grid.size(), mode, [&](std::size_t i) {
            out[i] = assemble_radial(w, gain, basis, t_grid[i], quad);
        });
        return out;
    }

    if (density_is_constant(w, gain)) {
        const double scale = 2.0 * (w.power_k() + 1);
        const double c0 = gain.eval(0.0);
        std::vector<double> taus;
        taus.reserve(t_grid.size());
        for (double t : t_grid) taus.push_back(t / scale);
        GreenGrams gg = green_sublevel_grams(w.domain(), basis, taus, quad, mode);
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            GramSystem& sys = gg.systems[i];
            sys.t = t_grid[i];
            sys.A *= c0;
            sys.A_coarse *= c0;
            const int lo = (sys.center != Complex(0.0)) ? 0 : basis.n_min;
            out.push_back(slice_gram(sys, w.domain().base_point(), w.jet_order(),
                                     jet_vector(w), lo, basis.n_max));
        }
        return out;
    }

    for (double t : t_grid)
        out.push_back(assemble_gram(w, gain, basis, t, quad, mode));
    return out;
}

MinimizerResult solve_constrained_min(const GramSystem& sys, const SolveOptions& opts) {
    const int N = sys.size();
    const int nu = static_cast<int>(sys.C.rows());
    if (N == 0 || nu == 0 || nu > N)
        throw std::runtime_error("solve: empty system or more constraints than unknowns");
    if (sys.d.size() != nu)
        throw std::runtime_error("solve: target length mismatch");

    const double hermit_gap = (sys.A - sys.A.adjoint()).norm();
    if (hermit_gap > 1e-12 * std::max(1.0, sys.A.norm()))
        throw std::runtime_error("solve: Gram matrix not Hermitian");

    // diagonal scaling
    Eigen::VectorXd diag = sys.A.diagonal().real();
    for (int i = 0; i < N; ++i)
        if (!(diag(i) > 0.0)) {
            std::ostringstream os;
            os << "solve: nonpositive Gram diagonal at t = " << sys.t;
            throw std::runtime_error(os.str());
        }
    const Eigen::VectorXcd s = diag.array().rsqrt().cast<Complex>();
    const Eigen::MatrixXcd Afull = sys.A.selfadjointView<Eigen::Lower>();
    const Eigen::MatrixXcd B = s.asDiagonal() * Afull * s.asDiagonal();
    const Eigen::MatrixXcd Cs = sys.C * s.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("solve: eigendecomposition failed");
    const Eigen::VectorXd lam = es.eigenvalues();   // ascending
    const double lam_max = lam(N - 1);
    if (!(lam_max > 0.0))
        throw std::runtime_error("solve: Gram matrix not positive");

    const double cutoff = lam_max * opts.rank_tol;
    int first_kept = 0;
    while (first_kept < N && lam(first_kept) <= cutoff) ++first_kept;
    const int rank = N - first_kept;
    const double cond_full = lam_max / std::max(lam(0), 0.0);

    if (rank < nu) {
        std::ostringstream os;
        os << "solve: Gram numerically singular (rank " << rank << " < " << nu
           << " constraints) at t = " << sys.t;
        throw std::runtime_error(os.str());
    }
    if (!opts.allow_truncation && cond_full > 1e14) {
        std::ostringstream os;
        os << "solve: condition " << cond_full << " beyond 1e14 at t = " << sys.t;
        throw std::runtime_error(os.str());
    }

    // Orthonormalize the constraint rows: Cs^H = Q R, so Cs x = d becomes
    // Q^H x = R^{-H} d. Jet rows of high order carry binomials far beyond the
    // double dynamic range; the rotated system is the one that can be solved
    // and audited in floating point.
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Cs.adjoint());
    const Eigen::MatrixXcd Q =
        qr.householderQ() * Eigen::MatrixXcd::Identity(N, nu);
    const Eigen::MatrixXcd Rfac =
        qr.matrixQR().topRows(nu).triangularView<Eigen::Upper>();
    for (int i = 0; i < nu; ++i)
        if (std::abs(Rfac(i, i)) <= 1e-300) {
            std::ostringstream os;
            os << "solve: constraint rows rank deficient at t = " << sys.t;
            throw std::runtime_error(os.str());
        }
    const Eigen::VectorXcd dt =
        Rfac.adjoint().triangularView<Eigen::Lower>().solve(sys.d);
    const Eigen::MatrixXcd Ct = Q.adjoint();   // orthonormal rows

    const Eigen::MatrixXcd Vk = es.eigenvectors().rightCols(rank);
    const Eigen::VectorXd lam_k = lam.tail(rank);
    const Eigen::MatrixXcd Ck = Ct * Vk;   // nu x rank

    // route 1: saddle system [[Lambda, Ck^H],[Ck, 0]]
    const int M = rank + nu;
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(M, M);
    K.topLeftCorner(rank, rank) = lam_k.cast<Complex>().asDiagonal();
    K.topRightCorner(rank, nu) = Ck.adjoint();
    K.bottomLeftCorner(nu, rank) = Ck;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(M);
    rhs.tail(nu) = dt;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> klu = K.partialPivLu();
    Eigen::VectorXcd sol = klu.solve(rhs);
    for (int refine = 0; refine < 2; ++refine) {
        const Eigen::VectorXcd resid = rhs - K * sol;
        if (resid.norm() <= 1e-15 * rhs.norm()) break;
        sol += klu.solve(resid);
    }
    const Eigen::VectorXcd y_saddle = sol.head(rank);
    const Eigen::VectorXcd mu = sol.tail(nu);
    const double G_saddle = (y_saddle.adjoint() * lam_k.cast<Complex>().asDiagonal() * y_saddle)
                                .real()
                                .value();

    // route 2: Schur complement G = dt^H (Ck Lambda^{-1} Ck^H)^{-1} dt
    const Eigen::VectorXd lam_inv = lam_k.cwiseInverse();
    const Eigen::MatrixXcd W = Ck * lam_inv.cast<Complex>().asDiagonal() * Ck.adjoint();
    const Eigen::VectorXcd mu2 = W.llt().solve(dt);
    const double G_schur = (dt.adjoint() * mu2).real().value();

    MinimizerResult res;
    res.n_min = sys.n_min;
    res.center = sys.center;
    res.rank = rank;
    res.cond_estimate = lam_max / lam(first_kept);
    if (rank < N) res.flags |= flag_basis_truncated;
    res.route_gap = std::abs(G_saddle - G_schur) / std::max(std::abs(G_schur), 1e-300);
    if (res.route_gap > opts.route_agreement) res.flags |= flag_tolerance_not_met;

    res.x = s.asDiagonal() * (Vk * y_saddle);
    // dual of the original system from the stationarity condition A x = C^H mu
    res.dual = (sys.C * sys.C.adjoint()).llt().solve(sys.C * (Afull * res.x));
    res.G = (res.x.adjoint() * Afull * res.x).real().value();

    // The residual is audited in the orthonormalized frame; the raw binomial
    // rows can exceed the double dynamic range, in which case evaluating
    // C x - d directly is meaningless.
    const Eigen::VectorXcd x_scaled = Vk * y_saddle;
    const double resid_rot = (Ct * x_scaled - dt).norm();
    const double dtn = std::max(dt.norm(), 1e-300);
    const double row_range =
        sys.C.cwiseAbs().maxCoeff() * res.x.norm() / std::max(sys.d.norm(), 1e-300);
    res.constraint_residual = (row_range < 1e6)
                                  ? (sys.C * res.x - sys.d).norm()
                                  : resid_rot * sys.d.norm() / dtn;
    if (resid_rot > 1e-6 * dtn) {
        std::ostringstream os;
        os << "solve: constraint residual " << resid_rot / dtn << " at t = " << sys.t;
        throw std::runtime_error(os.str());
    }
    if (resid_rot > 1e-10 * dtn) res.flags |= flag_tolerance_not_met;
    return res;
}

namespace {

double propagated_G_error(const GramSystem& sys, const MinimizerResult& res) {
    if (sys.A_coarse.size() > 0) {
        GramSystem coarse = sys;
        coarse.A = sys.A_coarse;
        coarse.A_coarse.resize(0, 0);
        try {
            const MinimizerResult rc = solve_constrained_min(coarse);
            // halving the resolution scales the dominant error terms by >= 2
            return 0.5 * std::abs(rc.G - res.G);
        } catch (const std::exception&) {
            return std::abs(res.G);   // coarse pass unusable: full-size uncertainty
        }
    }
    if (sys.diag_errors.size() > 0) {
        double e = 0.0;
        for (int i = 0; i < res.x.size(); ++i)
            e += std::norm(res.x(i)) * sys.diag_errors(i);
        return e;
    }
    return 0.0;
}

} // namespace

MinimalIntegral minimal_integral(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                                 double t, const QuadratureSpec& quad, ExecMode mode) {
    basis.validate();
    BasisSpec wide = basis;
    wide.n_max += 8;
    const GramSystem sys_wide = assemble_gram(w, gain, wide, t, quad, mode);

    MinimalIntegral out;
    if (sys_wide.empty_region()) {
        out.flags |= flag_empty_region | flag_point_dropped;
        return out;
    }

    const Eigen::VectorXcd d = sys_wide.d;
    const Complex z0 = w.domain().base_point();
    const GramSystem sys_base =
        slice_gram(sys_wide, z0, w.jet_order(), d, sys_wide.n_min, basis.n_max);

    const MinimizerResult base = solve_constrained_min(sys_base);
    const MinimizerResult ext = solve_constrained_min(sys_wide);

    out.G = base.G;
    out.result = base;
    // the refinement gap is part of the uncertainty, not just a flag
    out.error = propagated_G_error(sys_base, base) + std::abs(ext.G - base.G);
    out.flags = merge_flags(base.flags, sys_base.flags);
    const double rel_change = std::abs(ext.G - base.G) / std::max(std::abs(base.G), 1e-300);
    if (rel_change > 1e-6) out.flags |= flag_basis_unstable;
    return out;
}

double bergman_kernel_value(const WeightPair& w, const GainFunction& gain, double t,
                            BasisSpec basis, const QuadratureSpec& quad, ExecMode mode) {
    if (w.construction() != WeightConstruction::power_green &&
        w.construction() != WeightConstruction::plain_power)
        throw std::invalid_argument("bergman_kernel_value: power-green weights only");
    if (w.power_k() != 0 || w.object_kind() != ObjectKind::function)
        throw std::invalid_argument("bergman_kernel_value: k = 0 function problem only");
    if (gain.kind() != GainKind::constant || gain.eval(0.0) != 1.0)
        throw std::invalid_argument("bergman_kernel_value: requires c == 1");
    const MinimalIntegral mi = minimal_integral(w, gain, basis, t, quad, mode);
    if (!(mi.G > 0.0))
        throw std::runtime_error("bergman_kernel_value: vanishing minimal integral");
    return 1.0 / mi.G;
}

ExtremalTrace extremal_trace(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                             const std::vector<double>& t_grid, const QuadratureSpec& quad,
                             ExecMode mode) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0))
            throw std::invalid_argument("extremal_trace: t grid must be nonnegative");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("extremal_trace: t grid must be ascending");
    }

    struct PointOut {
        bool kept = false;
        double G = 0.0, err = 0.0;
        std::uint32_t flags = flag_ok;
        MinimizerResult res;
    };
    std::vector<PointOut> pts(t_grid.size());
    const Complex z0 = w.domain().base_point();

    BasisSpec wide = basis;
    wide.n_max += 8;

    if (density_is_constant(w, gain) && w.domain().shape() == DomainShape::annulus) {
        const double scale = 2.0 * (w.power_k() + 1);
        const double c0 = gain.eval(0.0);
        std::vector<double> taus;
        for (double t : t_grid) taus.push_back(t / scale);
        const GreenGrams gg = green_sublevel_grams(w.domain(), wide, taus, quad, mode);
        const Eigen::VectorXcd d = jet_vector(w);
        for_each_band(t_grid.size(), mode, [&](std::size_t i) {
            const GreenLevelSolve ls =
                solve_green_level(gg.systems[i], &gg.alt[i], z0, w.jet_order(), d,
                                  basis.n_min, basis.n_max, c0);
            pts[i] = {ls.kept, ls.G, ls.error, ls.flags, ls.result};
        });
    } else {
        const std::vector<GramSystem> grams =
            assemble_gram_trace(w, gain, wide, t_grid, quad, mode);
        for_each_band(t_grid.size(), mode, [&](std::size_t i) {
            const GramSystem& sw = grams[i];
            PointOut& p = pts[i];
            if (sw.empty_region()) return;
            const GramSystem sb = slice_gram(sw, z0, w.jet_order(), sw.d, sw.n_min, basis.n_max);
            const MinimizerResult base = solve_constrained_min(sb);
            const MinimizerResult ext = solve_constrained_min(sw);
            p.kept = true;
            p.G = base.G;
            p.err = propagated_G_error(sb, base) + std::abs(ext.G - base.G);
            p.flags = merge_flags(base.flags, sb.flags);
            if (std::abs(ext.G - base.G) > 1e-6 * std::max(std::abs(base.G), 1e-300))
                p.flags |= flag_basis_unstable;
            p.res = base;
        });
    }

    ExtremalTrace out;
    out.basis = basis;
    out.trace.axis = TraceAxis::t_axis;
    out.trace.provenance = w.describe();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!pts[i].kept) {
            out.dropped_levels.push_back(t_grid[i]);
            out.trace.flags |= flag_point_dropped;
            continue;
        }
        out.trace.abscissae.push_back(t_grid[i]);
        out.trace.values.push_back(pts[i].G);
        out.trace.errors.push_back(pts[i].err);
        out.trace.flags = merge_flags(out.trace.flags, pts[i].flags);
        out.results.push_back(std::move(pts[i].res));
    }
    out.trace.validate(true);
    return out;
}

double coefficient_drift(const ExtremalTrace& tr, std::size_t lo, std::size_t hi) {
    if (hi >= tr.results.size() || lo > hi)
        throw std::invalid_argument("coefficient_drift: bad index range");
    double worst = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
        for (std::size_t j = i + 1; j <= hi; ++j) {
            const auto& a = tr.results[i];
            const auto& b = tr.results[j];
            // coefficients of different expansion points are not comparable
            if (a.center != b.center) return std::numeric_limits<double>::infinity();
            // pad to the common order window
            const int lo_n = std::min(a.n_min, b.n_min);
            const int hi_n = std::max(a.n_min + static_cast<int>(a.x.size()),
                                      b.n_min + static_cast<int>(b.x.size())) - 1;
            double s = 0.0;
            for (int n = lo_n; n <= hi_n; ++n) {
                const int ia = n - a.n_min, ib = n - b.n_min;
                const Complex va = (ia >= 0 && ia < a.x.size()) ? a.x(ia) : Complex(0.0);
                const Complex vb = (ib >= 0 && ib < b.x.size()) ? b.x(ib) : Complex(0.0);
                s += std::norm(va - vb);
            }
            worst = std::max(worst, std::sqrt(s));
        }
    }
    return worst;
}

} // namespace pshlab

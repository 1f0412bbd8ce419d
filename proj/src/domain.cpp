#include "pshlab/domain.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pshlab/rng.hpp"

namespace pshlab {

DomainModel DomainModel::unit_disc(Complex base_point) {
    if (!(std::abs(base_point) < 1.0))
        throw std::invalid_argument("domain: base point must satisfy |z0| < 1");
    DomainModel d;
    d.shape_ = DomainShape::unit_disc;
    d.z0_ = base_point;
    return d;
}

DomainModel DomainModel::annulus(double inner_radius, Complex base_point, int green_series_cap) {
    if (!(inner_radius > 0.0 && inner_radius < 1.0))
        throw std::invalid_argument("domain: inner radius must lie in (0,1)");
    const double q = std::abs(base_point);
    if (!(q > inner_radius && q < 1.0))
        throw std::invalid_argument("domain: base point must satisfy rho < |z0| < 1");
    if (green_series_cap < 8)
        throw std::invalid_argument("domain: series cap too small");
    DomainModel d;
    d.shape_ = DomainShape::annulus;
    d.rho_ = inner_radius;
    d.z0_ = base_point;
    d.series_cap_ = green_series_cap;
    return d;
}

bool DomainModel::contains(Complex z) const {
    const double r = std::abs(z);
    if (shape_ == DomainShape::unit_disc) return r < 1.0;
    return r > rho_ && r < 1.0;
}

double DomainModel::green_at(Complex z, Complex w) const {
    if (!contains(z))
        throw std::domain_error("domain: green evaluated outside the open domain");
    if (z == w) return -std::numeric_limits<double>::infinity();

    if (shape_ == DomainShape::unit_disc)
        return std::log(std::abs((z - w) / (1.0 - std::conj(w) * z)));

    // Annulus {rho < |z| < 1}: G = log|z-w| + u with the harmonic correction u
    // given by its Fourier series in theta - theta_w. Coefficients solve the
    // two-circle Dirichlet problem:
    //   u = b0 log r + sum_n [A_n r^n + B_n r^{-n}] cos(n(theta-theta_w)),
    //   b0  = -log q / log rho,
    //   A_n = (q^n - rho^{2n} q^{-n}) / (n (1 - rho^{2n})),
    //   B_n = rho^{2n} (q^{-n} - q^n) / (n (1 - rho^{2n})).
    const double r = std::abs(z);
    const double q = std::abs(w);
    const double alpha = std::arg(z) - std::arg(w);
    const double rho = rho_;

    double u = -std::log(q) * std::log(r) / std::log(rho);

    const double ca = std::cos(alpha);
    double cos_prev = 1.0, cos_cur = ca;  // cos(0), cos(alpha)
    double qn = q, rn = r, qin = 1.0 / q, rin = 1.0 / r, rho2n = rho * rho;
    const double x1 = q * r;               // decay of the A-branch
    const double x2 = rho * rho / (q * r);  // decay of the B-branch
    double x1n = x1, x2n = x2;

    for (int n = 1; n <= series_cap_; ++n) {
        const double denom = static_cast<double>(n) * (1.0 - rho2n);
        const double A = (qn - rho2n * qin) / denom;
        const double B = rho2n * (qin - qn) / denom;
        u += (A * rn + B * rin) * cos_cur;

        // remaining tail is geometrically dominated
        const double tail = (x1n * x1 / (1.0 - x1) + x2n * x2 / (1.0 - x2)) /
                            (static_cast<double>(n + 1) * (1.0 - rho * rho));
        if (tail < 1e-14) break;

        const double cos_next = 2.0 * ca * cos_cur - cos_prev;
        cos_prev = cos_cur;
        cos_cur = cos_next;
        qn *= q; rn *= r; qin /= q; rin /= r; rho2n *= rho * rho;
        x1n *= x1; x2n *= x2;
    }
    return std::log(std::abs(z - w)) + u;
}

double DomainModel::green(Complex z) const { return green_at(z, z0_); }

std::string DomainModel::describe() const {
    std::ostringstream os;
    if (shape_ == DomainShape::unit_disc)
        os << "unit-disc(z0=" << z0_.real() << "+" << z0_.imag() << "i)";
    else
        os << "annulus(rho=" << rho_ << ", z0=" << z0_.real() << "+" << z0_.imag() << "i)";
    return os.str();
}

bool RegionSpec::contains(Complex z) const {
    if (!domain.contains(z)) return false;
    return scale * domain.green(z) < -level;
}

AreaEstimate sublevel_area_grid(const RegionSpec& region, int resolution, ExecMode mode) {
    if (resolution < 64)
        throw std::invalid_argument("sublevel_area: grid resolution must be >= 64");

    auto one = [](Complex) { return 1.0; };
    auto mask = [&region](Complex z) { return region.contains(z); };
    const PolarBounds b = region.domain.bounds();

    const double fine = region_integral_pass(one, mask, b, resolution, resolution, 4, mode);
    const double coarse = region_integral_pass(one, mask, b, resolution / 2, resolution / 2, 4, mode);

    AreaEstimate est;
    est.method = "grid";
    est.value = fine;
    // the two resolutions can agree by accident; the mask quantization keeps
    // a floor of about half a cell width around the region boundary
    const double h_r = (b.r_hi - b.r_lo) / resolution;
    est.std_error = std::max(std::abs(fine - coarse), 0.5 * h_r * fine);
    if (fine == 0.0) est.flags |= flag_empty_region;
    return est;
}

AreaEstimate sublevel_area_mc(const RegionSpec& region, long long samples,
                              std::uint64_t seed, ExecMode mode) {
    if (samples < 10000)
        throw std::invalid_argument("sublevel_area: monte-carlo needs >= 1e4 samples");

    // Uniform over the bounding square [-1,1]^2; fixed batch layout so tallies
    // are independent of the parallel schedule.
    const std::size_t n_batches = 512;
    const long long per_batch = (samples + static_cast<long long>(n_batches) - 1) /
                                static_cast<long long>(n_batches);
    const long long total = per_batch * static_cast<long long>(n_batches);

    auto batch_hits = [&](std::size_t b) -> long long {
        SeededRng rng(SeededRng::derive(seed, b));
        long long hits = 0;
        for (long long i = 0; i < per_batch; ++i) {
            const double x = rng.uniform(-1.0, 1.0);
            const double y = rng.uniform(-1.0, 1.0);
            if (region.contains(Complex(x, y))) ++hits;
        }
        return hits;
    };

    const long long hits = reduce_bands<long long>(
        n_batches, mode, 0LL, batch_hits, [](long long a, long long h) { return a + h; });

    const double box = 4.0;
    const double p = static_cast<double>(hits) / static_cast<double>(total);

    AreaEstimate est;
    est.method = "monte-carlo";
    est.seed = seed;
    est.value = box * p;
    est.std_error = box * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(total));
    if (hits == 0) est.flags |= flag_empty_region;
    return est;
}

std::vector<STracePoint> s_trace(const DomainModel& domain, const std::vector<double>& t_grid,
                                 AreaMethod method, long long resolution_or_samples,
                                 std::uint64_t seed, ExecMode mode) {
    if (t_grid.empty())
        throw std::invalid_argument("s_trace: empty t grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0))
            throw std::invalid_argument("s_trace: t grid must be nonnegative");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("s_trace: t grid must be ascending");
    }

    std::vector<STracePoint> out(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        RegionSpec region{domain, 1.0, t};
        AreaEstimate a;
        if (method == AreaMethod::grid)
            a = sublevel_area_grid(region, static_cast<int>(resolution_or_samples), mode);
        else
            a = sublevel_area_mc(region, resolution_or_samples, seed + i, mode);
        const double w = std::exp(2.0 * t);
        out[i] = {t, w * a.value, w * a.std_error, a.flags};
    }
    return out;
}

} // namespace pshlab

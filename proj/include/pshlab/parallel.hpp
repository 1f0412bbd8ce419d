#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace pshlab {

enum class ExecMode { serial, parallel };

// Process-wide default execution mode. Starts as parallel when built with
// OpenMP, serial otherwise; PSHLAB_SERIAL=1 in the environment forces serial.
ExecMode default_exec_mode();
void set_default_exec_mode(ExecMode mode);

int hardware_threads();

// Fixed-order banded reduction: the work is split into n_bands independent
// bands, each band computes a partial with `band(b)`, and the partials are
// folded in band order. The band count and fold order do not depend on the
// thread count, so serial and parallel runs produce identical results.
template <typename Partial, typename BandFn, typename CombineFn>
Partial reduce_bands(std::size_t n_bands, ExecMode mode, Partial init,
                     BandFn&& band, CombineFn&& combine) {
    std::vector<Partial> partials(n_bands, init);
    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long b = 0; b < static_cast<long long>(n_bands); ++b)
            partials[static_cast<std::size_t>(b)] = band(static_cast<std::size_t>(b));
    } else {
        for (std::size_t b = 0; b < n_bands; ++b)
            partials[b] = band(b);
    }
    Partial acc = std::move(init);
    for (std::size_t b = 0; b < n_bands; ++b)
        acc = combine(std::move(acc), std::move(partials[b]));
    return acc;
}

// Variant for filling a preallocated slot per band (per-t solves, traces).
template <typename BandFn>
void for_each_band(std::size_t n_bands, ExecMode mode, BandFn&& band) {
    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long b = 0; b < static_cast<long long>(n_bands); ++b)
            band(static_cast<std::size_t>(b));
    } else {
        for (std::size_t b = 0; b < n_bands; ++b)
            band(b);
    }
}

} // namespace pshlab

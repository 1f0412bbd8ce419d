#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "pshlab/gain.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/trace.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

// Monomial/Laurent basis (z - center)^n, n in [n_min, n_max]. Simply
// connected regions require n_min = 0; annulus regions that enclose the hole
// take n_min < 0 with center 0. Deep simply-connected regions around the base
// point switch to center = z0, where the Gram stays well conditioned.
struct BasisSpec {
    int n_min = 0;
    int n_max = 24;
    Complex center = 0.0;

    int size() const { return n_max - n_min + 1; }
    void validate() const;   // throws std::invalid_argument
};

// Discretized constrained minimum-norm problem at one level t:
//   minimize x^H A x  subject to  C x = d,
// A[m][n] = int_{psi<-t} z^m conj(z)^n e^{-phi} c(-psi) (dA),
// C[j][n] = binom(n,j) z0^{n-j} (jet rows), d = jet target.
struct GramSystem {
    Eigen::MatrixXcd A;
    Eigen::MatrixXcd C;
    Eigen::VectorXcd d;
    int n_min = 0;             // basis order of column 0
    Complex center = 0.0;      // basis expansion point
    double t = 0.0;
    std::uint32_t flags = flag_ok;
    Eigen::MatrixXcd A_coarse;     // half-resolution pass (2d assemblies)
    Eigen::VectorXd diag_errors;   // per-entry integral errors (radial path)
    double c_min_singular = 0.0;   // smallest singular value of C

    int size() const { return static_cast<int>(A.rows()); }
    bool empty_region() const { return flags & flag_empty_region; }
};

struct MinimizerResult {
    Eigen::VectorXcd x;        // coefficients of (z - center)^n, n from n_min
    int n_min = 0;
    Complex center = 0.0;
    double G = 0.0;            // x^H A x
    double constraint_residual = 0.0;
    Eigen::VectorXcd dual;
    std::uint32_t flags = flag_ok;
    double cond_estimate = 0.0;
    int rank = 0;              // kept spectral dimension
    double route_gap = 0.0;    // |G_saddle - G_schur| / G
};

// jet rows C[j][n] = binom(n,j) z0^{n-j} in the generalized (falling
// factorial) sense; identity pattern for z0 = 0
Eigen::MatrixXcd jet_constraint_rows(Complex z0, int nu, int n_min, int n_max);

GramSystem assemble_gram(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                         double t, const QuadratureSpec& quad,
                         ExecMode mode = default_exec_mode());

// Shared-geometry assembly for a whole level grid. For radial weights each
// level is an independent 1d integral; for constant-density weights on the
// annulus all levels are sublevel sets of the same Green function and are
// integrated in one sweep (exact radial moments between ray crossings,
// midpoint rule in the angle).
std::vector<GramSystem> assemble_gram_trace(const WeightPair& w, const GainFunction& gain,
                                            BasisSpec basis, const std::vector<double>& t_grid,
                                            const QuadratureSpec& quad,
                                            ExecMode mode = default_exec_mode());

// Unweighted monomial Gram matrices over the Green sublevel sets {G < -tau}.
// One geometry pass serves every tau (and every power weight rescaling a
// shared t grid onto these levels). Wrapped and shallow regions use the
// Laurent window about the origin; regions certified inside a disc around the
// base point switch to the recentered basis (z - z0)^n, and in the handoff
// band both assemblies are returned so the solver can take the lower envelope
// of the two upper bounds. The `t` field holds tau; constraints are empty.
struct GreenGrams {
    std::vector<GramSystem> systems;
    std::vector<GramSystem> alt;          // second phase in the handoff band
    std::vector<bool> simply_connected;   // certified by an empty ray
};
GreenGrams green_sublevel_grams(const DomainModel& domain, BasisSpec window,
                                const std::vector<double>& taus, const QuadratureSpec& quad,
                                ExecMode mode = default_exec_mode());

// Solve one Green level from its (primary, optional alt) wide assemblies:
// base-window and +8 solves, coarse-pass error, lower envelope across phases.
struct GreenLevelSolve {
    bool kept = false;
    double G = 0.0;
    double error = 0.0;
    std::uint32_t flags = flag_ok;
    MinimizerResult result;
};
GreenLevelSolve solve_green_level(const GramSystem& wide_primary, const GramSystem* wide_alt,
                                  Complex z0, int nu, const Eigen::VectorXcd& d,
                                  int requested_n_min, int base_n_max, double density_const);

// principal sub-window [lo_n, hi_n] of a wider assembly (constraints rebuilt
// as jet rows of (z - center)^n at z0)
GramSystem slice_gram(const GramSystem& sys, Complex z0, int nu,
                      const Eigen::VectorXcd& d, int lo_n, int hi_n);

struct SolveOptions {
    bool allow_truncation = true;     // spectral cap instead of hard failure
    double rank_tol = 1e-13;          // relative eigenvalue cutoff
    double route_agreement = 1e-9;    // saddle vs Schur relative gap
};

// Dense solve of the saddle system [[A, C^H],[C, 0]] with a redundant
// Schur-complement route; disagreement beyond tolerance flags conditioning
// trouble. Throws std::runtime_error when the system cannot support the
// constraints (or condition > 1e14 with truncation disabled).
MinimizerResult solve_constrained_min(const GramSystem& sys, const SolveOptions& opts = {});

struct MinimalIntegral {
    double G = 0.0;
    double error = 0.0;       // propagated quadrature error estimate
    MinimizerResult result;
    std::uint32_t flags = flag_ok;
};

// assemble + solve with the n_max+8 basis-refinement check
MinimalIntegral minimal_integral(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                                 double t, const QuadratureSpec& quad,
                                 ExecMode mode = default_exec_mode());

// 1 / minimal integral for the single-constraint kernel problem
// (power-green(0), function kind, constant gain)
double bergman_kernel_value(const WeightPair& w, const GainFunction& gain, double t,
                            BasisSpec basis, const QuadratureSpec& quad,
                            ExecMode mode = default_exec_mode());

struct ExtremalTrace {
    Trace trace;                              // t-axis G(t); dropped points omitted
    std::vector<MinimizerResult> results;     // one per kept trace point
    std::vector<double> dropped_levels;       // t values below quadrature resolution
    BasisSpec basis;
};

// G(t) over an ascending grid with per-t minimizers; per-t solves run in
// parallel with a fixed collection order.
ExtremalTrace extremal_trace(const WeightPair& w, const GainFunction& gain, BasisSpec basis,
                             const std::vector<double>& t_grid, const QuadratureSpec& quad,
                             ExecMode mode = default_exec_mode());

// max_{i,j in [lo,hi]} ||x_i - x_j||_2 over the stored minimizers
double coefficient_drift(const ExtremalTrace& tr, std::size_t lo, std::size_t hi);

} // namespace pshlab

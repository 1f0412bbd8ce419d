#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pshlab/bergman.hpp"
#include "pshlab/gain.hpp"
#include "pshlab/trace.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

struct SecondDifference {
    double midpoint = 0.0;   // abscissa of the central point
    double value = 0.0;      // nonuniform second difference / max|G|
};

struct LinearSegment {
    double x_lo = 0.0, x_hi = 0.0;
    double slope = 0.0, intercept = 0.0;
    double max_dev = 0.0;            // worst |G - fit| over the segment
    std::size_t i_lo = 0, i_hi = 0;  // inclusive point indices
};

struct Kink {
    double x = 0.0;                  // fitted-line intersection
    double left_slope = 0.0, right_slope = 0.0;
};

struct ConcavityReport {
    bool concave = false;            // all D <= +tol
    bool convex = false;             // all D >= -tol
    double worst_concavity_violation = 0.0;   // max(D, 0) peak
    double worst_concavity_location = 0.0;
    double worst_convexity_violation = 0.0;   // max(-D, 0) peak
    double worst_convexity_location = 0.0;
    std::vector<LinearSegment> segments;      // disjoint, ascending
    std::vector<Kink> kinks;
    double tol = 0.0;
    double noise_floor = 0.0;        // propagated error on the D scale
};

// r = h(t) mapping; order reversed so r ascends. Values unchanged.
Trace reparametrize(const Trace& t_trace, const GainFunction& gain);

// t-axis trace of -log G (for the log-convexity diagnostics)
Trace neglog_trace(const Trace& t_trace);

// normalized nonuniform second differences (needs >= 3 points)
std::vector<SecondDifference> second_differences(const Trace& trace);

// propagated per-point error on the normalized second-difference scale
double second_difference_noise_floor(const Trace& trace);

// Concavity/convexity verdicts plus maximal linear segments (greedy runs of
// |D| <= tol refit by least squares; minimum 5 points). Throws
// std::invalid_argument when tol sits below the propagated noise floor.
ConcavityReport classify(const Trace& r_trace, double tol);

// tol recommended by the acceptance rules: max(base, 10x noise floor)
double recommended_tol(const Trace& trace, double base = 1e-6);

struct LemmaConcaveReport {
    bool neglog_convex = false;        // -log x convex on the t axis
    bool logx_plus_t_nondecreasing = false;
    bool hypotheses_hold = false;
    bool conclusion_concave = false;   // x(-log r) concave
};

// decreasing positive x(t): log-convexity hypotheses vs concavity in r
LemmaConcaveReport lemma_concave_predicate(const Trace& x_trace, double tol);

struct LemmaNotConvexReport {
    bool predicted = false;    // positive intercept on the linear tail
    bool confirmed = false;    // classify found -log g(e^{-t}) non-convex
    double intercept = 0.0;
};

// g concave increasing on (0,1], linear with slope a, intercept b on
// (r0, 1): positive b forces -log g(e^{-t}) non-convex
LemmaNotConvexReport lemma_notconvex_predicate(const Trace& g_trace, double r0, double slope,
                                               double intercept, double tol);

struct ProbeSpec {
    enum class Kind { indicator, exp_window, zero } kind = Kind::indicator;
    double t1 = 0.0, t2 = 0.0;   // window inside the segment
    double beta = 0.0;           // exp-window exponent a(t) = e^{beta t}
};

struct SplitResidual {
    double lhs = 0.0;            // shell integral of |F|^2 e^{-phi} a(-psi)
    double lhs_error = 0.0;
    double rhs = 0.0;            // kappa * int a(t) e^{-t} dt (analytic)
    double residual = 0.0;       // |lhs-rhs| / max|rhs|
    std::uint32_t flags = flag_ok;
};

// Mass-splitting identity on a certified linear segment [T1, T2] with r-slope
// kappa: the extremal's weighted mass between levels equals
// kappa * int_{t1}^{t2} a(t) e^{-t} dt for every probe a.
SplitResidual measure_splitting_check(const WeightPair& w, const GainFunction& gain,
                                      const MinimizerResult& minimizer, double T1, double T2,
                                      double kappa, const ProbeSpec& probe,
                                      const QuadratureSpec& quad,
                                      ExecMode mode = default_exec_mode());

} // namespace pshlab

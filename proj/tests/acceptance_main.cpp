// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances here, in code.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "pshlab/bergman.hpp"
#include "pshlab/diagnostics.hpp"
#include "pshlab/rng.hpp"
#include "pshlab/scenarios.hpp"

using namespace pshlab;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

bool concavity_tol_conforms(const ConcavityReport& rep) {
    const double expected = std::max(1e-6, 10.0 * rep.noise_floor);
    return std::abs(rep.tol - expected) <= 1e-12 * std::max(1.0, expected);
}

// criterion 7 helper: the orthogonal-residual identity on one assembled system
bool pythagoras_holds(const GramSystem& sys, double tol, std::string& why) {
    const MinimizerResult res = solve_constrained_min(sys);
    const Eigen::MatrixXcd A = sys.A.selfadjointView<Eigen::Lower>();
    const Eigen::MatrixXcd P =
        Eigen::MatrixXcd::Identity(sys.size(), sys.size()) -
        sys.C.adjoint() * (sys.C * sys.C.adjoint()).llt().solve(sys.C);
    SeededRng rng(4242);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXcd v(sys.size());
        for (int j = 0; j < sys.size(); ++j)
            v(j) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        v = P * v;
        v *= res.x.norm() / std::max(v.norm(), 1e-300);
        const Eigen::VectorXcd xp = res.x + v;
        const double lhs = (xp.adjoint() * A * xp).real().value();
        const double rhs = res.G + (v.adjoint() * A * v).real().value();
        const double rel = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
        if (rel > tol) {
            why = fmt("relative gap %.3e on trial %d", rel, trial);
            return false;
        }
    }
    why = "20 feasible perturbations within 1e-9";
    return true;
}

} // namespace

int main() {
    const auto suite_t0 = std::chrono::steady_clock::now();

    // ---- shared scenario runs ---------------------------------------------
    ScenarioConfig cfg_jets1 = ScenarioConfig::defaults("closed-form-jets");
    cfg_jets1.weight_k = 1;
    cfg_jets1.jets = {Complex(1.0), Complex(1.0)};
    cfg_jets1.t_count = 64;
    cfg_jets1.t_max = 6.0;
    const ScenarioResult jets1 = run_scenario(cfg_jets1);

    ScenarioConfig cfg_jets3 = cfg_jets1;
    cfg_jets3.weight_k = 3;
    cfg_jets3.jets = {Complex(1.0), Complex(0.0), Complex(1.0), Complex(0.0)};
    cfg_jets3.basis.n_max = 20;
    const ScenarioResult jets3 = run_scenario(cfg_jets3);

    ScenarioConfig cfg_jets3_decay = cfg_jets3;
    cfg_jets3_decay.t_max = 14.0;   // slowest mode e^{-t/4} needs the longer horizon
    const ScenarioResult jets3_decay = run_scenario(cfg_jets3_decay);

    const ScenarioResult char_res = run_scenario(ScenarioConfig::defaults("char-two-segment"));
    const ScenarioResult radial = run_scenario(ScenarioConfig::defaults("radial-partial-linearity"));

    ScenarioConfig cfg_convex = ScenarioConfig::defaults("radial-partial-linearity");
    cfg_convex.profile.breakpoints = {-2.0, -1.75, -1.5, -1.25, -1.0, -0.75, -0.5, -0.25};
    cfg_convex.profile.slopes = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
    cfg_convex.profile.anchor = -6.5;
    const ScenarioResult radial_convex = run_scenario(cfg_convex);

    const ScenarioResult bergman = run_scenario(ScenarioConfig::defaults("bergman-logconvex"));
    const ScenarioResult sublevel = run_scenario(ScenarioConfig::defaults("sublevel-geometry"));
    const ScenarioResult kscan = run_scenario(ScenarioConfig::defaults("annulus-kscan"));

    // ---- criterion 1: closed-form jets ------------------------------------
    {
        bool pass = true;
        std::string detail;
        for (const auto* r : {&jets1, &jets3}) {
            const double dev = r->verdicts["oracle_max_rel_dev"].get<double>();
            const double dmax = r->verdicts["neglog_second_diff_max"].get<double>();
            const double dmin = r->verdicts["neglog_second_diff_min"].get<double>();
            if (dev > 1e-6) pass = false;
            if (dmax > 1e-7) pass = false;      // all second differences <= 0
            if (dmin > -1e-4) pass = false;     // strict concavity somewhere
            detail += fmt("%sdev=%.2e dmax=%.1e dmin=%.1e", detail.empty() ? "" : "; ", dev,
                          dmax, dmin);
        }
        const double secs = jets1.wall_seconds + jets3.wall_seconds;
        if (secs > 10.0) pass = false;
        detail += fmt("; %.1f s", secs);
        report("criterion 1 (closed-form jets k=1,3)", pass, detail);
    }

    // ---- criterion 2: two-segment characterization ------------------------
    {
        bool pass = true;
        const double s_in = char_res.verdicts.value("slope_inner", 0.0);
        const double s_out = char_res.verdicts.value("slope_outer", 0.0);
        const double kink = char_res.verdicts.value("kink_detected_r", -1.0);
        const double spacing = char_res.verdicts.value("kink_grid_spacing", 0.0);
        const double e_in = 4.0 * M_PI * std::exp(0.5);
        const double e_out = 2.0 * M_PI * std::exp(0.5);
        if (std::abs(s_in - e_in) > 1e-3 * e_in) pass = false;
        if (std::abs(s_out - e_out) > 1e-3 * e_out) pass = false;
        if (std::abs(kink - std::exp(-1.0)) > spacing) pass = false;
        const double viol = char_res.verdicts["neglog"]["worst_convexity_violation"].get<double>();
        if (!(viol >= 1e-4)) pass = false;   // -log G not convex
        if (char_res.wall_seconds > 30.0) pass = false;
        report("criterion 2 (two-segment kink and slopes)", pass,
               fmt("slopes %.4f/%.4f (exp %.4f/%.4f), kink %.4f vs e^-1 within %.1e, "
                   "neglog violation %.2e, %.1f s",
                   s_in, s_out, e_in, e_out, kink, spacing, viol, char_res.wall_seconds));
    }

    // ---- criterion 3: concavity of every r-axis trace ---------------------
    {
        bool pass = true;
        std::string detail;
        auto check_rep = [&](const std::string& name, const ConcavityReport& rep) {
            if (!rep.concave || !concavity_tol_conforms(rep)) {
                pass = false;
                detail += fmt("%s%s NOT concave (worst %.2e, tol %.2e)",
                              detail.empty() ? "" : "; ", name.c_str(),
                              rep.worst_concavity_violation, rep.tol);
            }
        };
        check_rep("radial", *radial.concavity);
        check_rep("radial-convex", *radial_convex.concavity);
        check_rep("char", *char_res.concavity);
        check_rep("jets1", *jets1.concavity);
        check_rep("jets3", *jets3.concavity);
        check_rep("bergman-disc", *bergman.concavity);
        for (const auto& [name, rep] : bergman.extra_reports)
            if (name == "annulus__concavity") check_rep("bergman-annulus", rep);
        int k_concave = 0;
        for (const auto& row : kscan.verdicts["per_k"])
            if (row["concave"].get<bool>()) ++k_concave;
        if (k_concave != static_cast<int>(kscan.verdicts["per_k"].size())) pass = false;
        if (detail.empty())
            detail = fmt("7 scenario traces + %d k-scan traces concave at adaptive tol",
                         k_concave);
        report("criterion 3 (concavity everywhere)", pass, detail);
    }

    // ---- criterion 4: monotone decrease and decay --------------------------
    {
        bool pass = true;
        std::string detail;
        auto check_mono = [&](const std::string& name, const nlohmann::json& m) {
            const bool noninc = m["nonincreasing"].get<bool>();
            const double tmax = m["t_max"].get<double>();
            const double decay = m["decay_ratio"].get<double>();
            if (!noninc || tmax < 6.0 || decay > 0.05) {
                pass = false;
                detail += fmt("%s%s noninc=%d tmax=%.1f decay=%.3f", detail.empty() ? "" : "; ",
                              name.c_str(), static_cast<int>(noninc), tmax, decay);
            }
        };
        check_mono("radial", radial.verdicts["monotonicity"]);
        check_mono("char", char_res.verdicts["monotonicity"]);
        check_mono("jets1", jets1.verdicts["monotonicity"]);
        check_mono("jets3", jets3_decay.verdicts["monotonicity"]);
        check_mono("bergman-disc", bergman.verdicts["disc"]["monotonicity"]);
        check_mono("bergman-annulus", bergman.verdicts["annulus"]["monotonicity"]);
        for (const auto& row : kscan.verdicts["per_k"])
            check_mono(fmt("k=%d", row["k"].get<int>()), row["monotonicity"]);
        if (detail.empty()) detail = "all traces nonincreasing, G(t_max) <= 0.05 G(0), t_max >= 6";
        report("criterion 4 (monotonicity and decay)", pass, detail);
    }

    // ---- criterion 5: measure splitting on certified segments --------------
    {
        bool pass = true;
        int rows = 0;
        double worst = 0.0;
        for (const auto* r : {&radial, &radial_convex, &char_res, &jets1, &jets3, &bergman}) {
            for (const auto& row : r->split_rows) {
                ++rows;
                worst = std::max(worst, row.residual);
                if (!row.pass) pass = false;
            }
        }
        if (rows < 9) pass = false;   // at least three probes on three segments
        report("criterion 5 (measure splitting)", pass,
               fmt("%d probe windows, worst residual %.2e", rows, worst));
    }

    // ---- criterion 6: partial linearity criterion ---------------------------
    {
        bool pass = true;
        std::string detail;
        const int nseg = radial.verdicts["n_segments"].get<int>();
        if (nseg != 2) pass = false;
        detail += fmt("segments=%d", nseg);
        // segment boundaries against the breakpoint image r = e^{g(x1)}
        bool kink_ok = false;
        if (!radial.concavity->kinks.empty()) {
            const double kink = radial.concavity->kinks.front().x;
            for (const auto& e : radial.verdicts["expected_kinks"]) {
                const double r = e["r"].get<double>();
                const double sp = e["grid_spacing"].get<double>();
                if (std::abs(kink - r) <= sp) kink_ok = true;
                detail += fmt(", kink %.5f vs %.5f (step %.1e)", kink, r, sp);
            }
        }
        if (!kink_ok) pass = false;
        const int distinct = radial_convex.verdicts["n_distinct_slopes"].get<int>();
        if (distinct < 3) pass = false;
        detail += fmt(", strictly-convex variant distinct slopes=%d", distinct);
        report("criterion 6 (partial linearity)", pass, detail);
    }

    // ---- criterion 7: solver correctness ------------------------------------
    {
        bool pass = true;
        std::string detail;
        SeededRng rng(20240207);
        double worst_x = 0.0, worst_g = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 4 + static_cast<int>(rng.next_u64() % 13);
            const int nu = 1 + static_cast<int>(rng.next_u64() % 4);
            Eigen::MatrixXcd R(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    R(i, j) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            const Eigen::MatrixXcd A =
                R.adjoint() * R + 0.05 * Eigen::MatrixXcd::Identity(n, n);
            Eigen::MatrixXcd C(nu, n);
            for (int i = 0; i < nu; ++i)
                for (int j = 0; j < n; ++j)
                    C(i, j) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            Eigen::VectorXcd d(nu);
            for (int i = 0; i < nu; ++i)
                d(i) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));

            GramSystem sys;
            sys.A = A;
            sys.C = C;
            sys.d = d;
            const MinimizerResult res = solve_constrained_min(sys);

            const Eigen::MatrixXcd Ai = A.inverse();
            const Eigen::VectorXcd x_oracle =
                Ai * C.adjoint() * (C * Ai * C.adjoint()).inverse() * d;
            const double G_oracle = (x_oracle.adjoint() * A * x_oracle).real().value();
            worst_x = std::max(worst_x,
                               (res.x - x_oracle).norm() / std::max(1.0, x_oracle.norm()));
            worst_g = std::max(worst_g,
                               std::abs(res.G - G_oracle) / std::max(G_oracle, 1e-300));
        }
        if (worst_x > 1e-8 || worst_g > 1e-8) pass = false;
        detail = fmt("100 random systems: worst |x-x*|=%.2e, worst dG=%.2e", worst_x, worst_g);

        // Pythagoras identity on one assembled system per scenario weight
        const QuadratureSpec quad;
        QuadratureSpec quad_ann;
        quad_ann.n_r = quad_ann.n_theta = 512;
        const DomainModel disc = DomainModel::unit_disc(0.0);
        const DomainModel ann = DomainModel::annulus(0.2, std::sqrt(0.2));
        const GainFunction c1 = GainFunction::constant(1.0);
        struct Case {
            const char* name;
            WeightPair w;
            double t;
            BasisSpec basis;
            QuadratureSpec q;
        };
        RadialProfile prof;
        prof.breakpoints = {-1.0};
        prof.slopes = {2.0, 3.0};
        prof.anchor = -3.0;
        const std::vector<Case> cases = {
            {"radial", WeightPair::radial_example(disc, prof), 1.0, {0, 12, 0.0}, quad},
            {"char", WeightPair::char_construction(disc, -0.5), 0.5, {0, 12, 0.0}, quad},
            {"jets", WeightPair::plain_power(disc, 1, {1.0, 1.0}), 1.0, {0, 12, 0.0}, quad},
            {"kernel-annulus", WeightPair::power_green(ann, 0), 0.4, {-12, 12, 0.0}, quad_ann},
            {"kscan", WeightPair::power_green(ann, 2), 1.2, {-12, 12, 0.0}, quad_ann},
        };
        for (const auto& c : cases) {
            const GramSystem sys = assemble_gram(c.w, c1, c.basis, c.t, c.q);
            std::string why;
            if (!pythagoras_holds(sys, 1e-9, why)) {
                pass = false;
                detail += fmt("; %s: %s", c.name, why.c_str());
            }
        }
        detail += "; Pythagoras on 5 scenario systems x 20 perturbations";
        report("criterion 7 (solver correctness)", pass, detail);
    }

    // ---- criterion 8: sublevel geometry -------------------------------------
    {
        const bool disc_const = sublevel.verdicts["disc"]["const_pi_3sigma_mc"].get<bool>();
        report("criterion 8a (s(t) = pi on the centered disc)", disc_const,
               fmt("monte carlo with 1e6 samples, 3 sigma"));

        // The off-center sublevel sets are Moebius-image discs of radius
        // e^{-t}(1-|z0|^2)/(1-|z0|^2 e^{-2t}), so s(t) falls from pi toward
        // pi (1-|z0|^2)^2; the constancy assertion cannot hold. The grid
        // measurements match that closed form; the criterion is reported as
        // stated and fails honestly.
        const bool off_const =
            sublevel.verdicts["disc_offcenter"]["const_pi_3sigma_grid"].get<bool>();
        double worst_dev = 0.0;
        for (const auto& row : sublevel.verdicts["disc_offcenter"]["closed_form_rows"]) {
            const double computed = row["computed"].get<double>();
            worst_dev = std::max(worst_dev, std::abs(computed - M_PI) / M_PI);
        }
        report("criterion 8b (s(t) = pi on the disc at z0 = 0.4)", off_const,
               fmt("measured s deviates from pi by up to %.1f%% and tracks the "
                   "Moebius-image closed form instead",
                   100.0 * worst_dev));

        const bool ann_strict =
            sublevel.verdicts["annulus"]["strictly_decreasing_3sigma_grid"].get<bool>();
        const bool ann_mc = sublevel.verdicts["annulus"]["decreasing_3sigma_mc"].get<bool>();
        const bool time_ok = sublevel.wall_seconds <= 60.0;
        report("criterion 8c (annulus s(t) strictly decreasing)",
               ann_strict && ann_mc && time_ok,
               fmt("grid-certified strict decrease, monte carlo drop beyond 3 sigma, %.1f s",
                   sublevel.wall_seconds));
    }

    // ---- criterion 9: kernel baseline ---------------------------------------
    {
        bool pass = true;
        const double B0 = bergman.verdicts["disc"]["kernel_at_0"].get<double>();
        if (std::abs(B0 - 1.0 / M_PI) > 1e-6 / M_PI) pass = false;
        const bool cd = bergman.verdicts["disc"]["neglog_convex"].get<bool>();
        const bool ca = bergman.verdicts["annulus"]["neglog_convex"].get<bool>();
        const bool ld = bergman.verdicts["disc"]["lemma_hypotheses_hold"].get<bool>() &&
                        bergman.verdicts["disc"]["lemma_conclusion_concave"].get<bool>();
        const bool la = bergman.verdicts["annulus"]["lemma_hypotheses_hold"].get<bool>() &&
                        bergman.verdicts["annulus"]["lemma_conclusion_concave"].get<bool>();
        if (!cd || !ca || !ld || !la) pass = false;
        const double ann_dev = bergman.verdicts["annulus"]["kernel_rel_dev"].get<double>();
        report("criterion 9 (kernel baseline)", pass,
               fmt("B(0) = %.8f vs 1/pi, -log script-G convex on disc/annulus = %d/%d, "
                   "lemma predicate %d/%d, annulus kernel vs Laurent sum dev %.1e",
                   B0, cd, ca, ld, la, ann_dev));
    }

    // ---- criterion 10: annulus k-scan ----------------------------------------
    {
        bool pass = true;
        if (kscan.wall_seconds > 600.0) pass = false;
        int n_rows = 0, n_concave = 0, n_emitted = 0, n_nonconvex = 0;
        for (const auto& row : kscan.verdicts["per_k"]) {
            ++n_rows;
            if (row["concave"].get<bool>()) ++n_concave;
            if (row.contains("neglog_convex")) ++n_emitted;
            if (!row["neglog_convex"].get<bool>()) ++n_nonconvex;
        }
        if (n_rows != 13 || n_concave != 13 || n_emitted != 13) pass = false;
        report("criterion 10 (annulus k-scan)", pass,
               fmt("k = 0..12 in %.0f s, all concave, convexity verdicts emitted "
                   "(non-convexity of -log G_k detected for %d of 13 k)",
                   kscan.wall_seconds, n_nonconvex));
    }

    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_t0).count();
    std::printf("%d criterion failure(s); suite wall time %.0f s\n", g_failures, total);
    return g_failures == 0 ? 0 : 1;
}

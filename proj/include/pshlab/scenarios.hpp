#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "pshlab/config.hpp"
#include "pshlab/diagnostics.hpp"

#include <nlohmann/json.hpp>

namespace pshlab {

// analytic baselines, derived from the radial antiderivatives of each
// construction and cross-checked against quadrature by the test suite
namespace oracles {

// two-segment construction on the disc with c == 1 (form objects):
//   G(t) = 2 pi e^{a} + 2 pi e^{-a} e^{-t}   for t <= -2a
//   G(t) = 4 pi e^{-a} e^{-t}                for t >= -2a
double char_two_segment_g(double t, double a);

// plain powers with prescribed jets: G(t) = sum_j |a_j|^2 pi/(j+1) e^{-(j+1)t/(k+1)}
double closed_form_jets_g(double t, int k, const std::vector<Complex>& jets);

// piecewise-linear radial profile: G(t) = 4 pi int_{-inf}^{g^{-1}(-t)} e^{g(x)} dx
double radial_profile_g(double t, const RadialProfile& profile);

// disc sublevel geometry: s(t) == pi for z0 = 0; Moebius image disc otherwise
double disc_s_value(double t, double abs_z0);

// kernel problem on the disc at the origin: script-G(t) = pi e^{-t}
double disc_kernel_g(double t);

// annulus Bergman kernel at the base point from the Laurent norm sums
double annulus_kernel_at(double rho, double abs_z0, int terms = 2000);

} // namespace oracles

struct NamedTrace {
    std::string name;       // file stem suffix
    Trace trace;
};

struct OracleRow {
    double t = 0.0;
    double computed = 0.0;
    double oracle = 0.0;
    double rel_dev = 0.0;
};

struct SplitRow {
    double T1 = 0.0, T2 = 0.0;     // certified segment in t
    double t1 = 0.0, t2 = 0.0;     // probe window
    std::string probe;
    double lhs = 0.0, rhs = 0.0, residual = 0.0;
    bool pass = false;
};

struct ScenarioResult {
    std::string name;
    std::vector<NamedTrace> traces;
    std::optional<ConcavityReport> concavity;   // of the main r-axis trace
    std::vector<std::pair<std::string, ConcavityReport>> extra_reports;
    std::vector<OracleRow> oracle_rows;
    std::vector<SplitRow> split_rows;
    nlohmann::json verdicts;                    // scenario-specific summary values
    std::uint32_t flags = flag_ok;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg, ExecMode mode = default_exec_mode());

// catalogue names in a stable order, with one-line descriptions
std::vector<std::pair<std::string, std::string>> scenario_catalogue();

// oracle table for `pshlab oracle <name>`; empty when no closed form exists
std::vector<OracleRow> scenario_oracle_table(const std::string& name);

// CSV emitters: UTF-8, LF, '.' decimal separator, 17 significant digits
void emit_csv_trace(const Trace& trace, const std::string& path);
void emit_csv_segments(const std::vector<LinearSegment>& segments, const std::string& path);

// all trace CSVs + the segments CSV + the JSON report; returns written paths
std::vector<std::string> write_outputs(const ScenarioResult& result, const std::string& out_dir);

nlohmann::json result_to_json(const ScenarioResult& result);

int cli_main(int argc, char** argv);

} // namespace pshlab

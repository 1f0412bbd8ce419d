#include "pshlab/scenarios.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace pshlab {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void emit_csv_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit: cannot write " + path);
    out << "axis,value,error,flag\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << fmt17(trace.abscissae[i]) << ',' << fmt17(trace.values[i]) << ','
            << fmt17(trace.errors[i]) << ',' << trace.flags << '\n';
    if (!out) throw std::runtime_error("emit: write failed for " + path);
}

void emit_csv_segments(const std::vector<LinearSegment>& segments, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit: cannot write " + path);
    out << "r_lo,r_hi,slope,intercept,max_dev\n";
    for (const auto& s : segments)
        out << fmt17(s.x_lo) << ',' << fmt17(s.x_hi) << ',' << fmt17(s.slope) << ','
            << fmt17(s.intercept) << ',' << fmt17(s.max_dev) << '\n';
    if (!out) throw std::runtime_error("emit: write failed for " + path);
}

json result_to_json(const ScenarioResult& result) {
    json j;
    j["scenario"] = result.name;
    j["flags"] = result.flags;
    j["flags_text"] = describe_flags(result.flags);
    j["wall_seconds"] = result.wall_seconds;
    j["seed"] = result.seed;
    j["verdicts"] = result.verdicts;

    if (!result.oracle_rows.empty()) {
        json rows = json::array();
        for (const auto& r : result.oracle_rows)
            rows.push_back({{"t", r.t},
                            {"computed", r.computed},
                            {"oracle", r.oracle},
                            {"rel_dev", r.rel_dev}});
        j["oracle_rows"] = rows;
    }
    if (!result.split_rows.empty()) {
        json rows = json::array();
        for (const auto& r : result.split_rows)
            rows.push_back({{"T1", r.T1},
                            {"T2", r.T2},
                            {"t1", r.t1},
                            {"t2", r.t2},
                            {"probe", r.probe},
                            {"lhs", r.lhs},
                            {"rhs", r.rhs},
                            {"residual", r.residual},
                            {"pass", r.pass}});
        j["split_rows"] = rows;
    }
    json traces = json::array();
    for (const auto& nt : result.traces)
        traces.push_back({{"name", nt.name},
                          {"points", nt.trace.size()},
                          {"flags", nt.trace.flags},
                          {"provenance", nt.trace.provenance}});
    j["traces"] = traces;
    return j;
}

std::vector<std::string> write_outputs(const ScenarioResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    for (const auto& nt : result.traces) {
        const std::string path = (fs::path(out_dir) / (result.name + "__" + nt.name + ".csv")).string();
        emit_csv_trace(nt.trace, path);
        written.push_back(path);
    }
    {
        const std::string path = (fs::path(out_dir) / (result.name + "__segments.csv")).string();
        emit_csv_segments(result.concavity ? result.concavity->segments
                                           : std::vector<LinearSegment>{},
                          path);
        written.push_back(path);
    }
    {
        const std::string path = (fs::path(out_dir) / (result.name + "__report.json")).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("emit: cannot write " + path);
        out << result_to_json(result).dump(2) << '\n';
        written.push_back(path);
    }
    return written;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"pshlab: minimal weighted L2 integrals on planar domains"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int t_points = 0;
    int basis_max = 0;

    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out-dir", out_dir, "output directory");
    run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_option("--t-points", t_points, "override t_grid.count");
    run->add_option("--basis-max", basis_max, "override basis.n_max");

    auto* list = app.add_subcommand("list", "list the scenario catalogue");

    std::string oracle_name;
    auto* oracle = app.add_subcommand("oracle", "print analytic oracle values");
    oracle->add_option("scenario", oracle_name, "scenario name")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "validate a config file");
    validate->add_option("config", validate_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);   // prints usage; nonzero on error
    }

    try {
        if (list->parsed()) {
            for (const auto& [name, desc] : scenario_catalogue())
                std::cout << name << "\n    " << desc << "\n";
            return 0;
        }
        if (oracle->parsed()) {
            const auto rows = scenario_oracle_table(oracle_name);
            if (rows.empty()) {
                const auto cat = scenario_catalogue();
                const bool known =
                    std::any_of(cat.begin(), cat.end(),
                                [&](const auto& e) { return e.first == oracle_name; });
                if (!known) {
                    std::cerr << "unknown scenario: " << oracle_name << "\n";
                    return 1;
                }
                std::cout << "# no closed-form oracle for " << oracle_name << "\n";
                return 0;
            }
            std::cout << "t,oracle\n";
            for (const auto& r : rows)
                std::cout << fmt17(r.t) << ',' << fmt17(r.oracle) << "\n";
            return 0;
        }
        if (validate->parsed()) {
            ScenarioConfig cfg = ScenarioConfig::from_file(validate_path);
            cfg.validate();
            std::cout << "ok: " << cfg.scenario << "\n";
            return 0;
        }
        if (run->parsed()) {
            ScenarioConfig cfg = ScenarioConfig::from_file(config_path);
            if (seed_set) cfg.seed = seed;
            if (t_points > 0) cfg.t_count = t_points;
            if (basis_max > 0) cfg.basis.n_max = basis_max;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (cfg.out_dir.empty()) {
                const char* env = std::getenv("PSHLAB_OUT");
                cfg.out_dir = env ? env : "out";
            }
            const ScenarioResult res = run_scenario(cfg);
            const auto files = write_outputs(res, cfg.out_dir);
            for (const auto& f : files) std::cout << f << "\n";
            std::cout << "flags: " << describe_flags(res.flags) << "\n";
            return res.flags == flag_ok ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace pshlab

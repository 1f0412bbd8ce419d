#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pshlab/bergman.hpp"
#include "pshlab/domain.hpp"
#include "pshlab/gain.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

// Flat key-value config text: `section.key = value` lines, '#' comments.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

struct ScenarioConfig {
    std::string scenario;

    std::string domain_shape = "unit-disc";
    double domain_rho = 0.2;
    Complex z0 = 0.0;
    int green_terms = 512;

    std::string weight_construction;
    double weight_a = -0.5;
    int weight_k = 0;
    std::vector<Complex> jets;
    RadialProfile profile;

    std::string gain_kind = "constant";
    double gain_value = 1.0;
    double gain_tilt = 0.5;
    std::vector<double> gain_values;
    std::vector<double> gain_breakpoints;

    BasisSpec basis;
    int t_count = 64;
    double t_max = 8.0;
    QuadratureSpec quad;

    long long mc_samples = 1000000;
    int area_resolution = 2048;
    int kscan_k_max = 12;

    std::string out_dir;
    std::uint64_t seed = 42;

    static ScenarioConfig defaults(const std::string& scenario_name);
    static ScenarioConfig from_file(const std::string& path);
    static ScenarioConfig from_kv(const KeyValueConfig& kv);

    DomainModel make_domain() const;
    GainFunction make_gain() const;
    WeightPair make_weight() const;
    std::vector<double> make_t_grid() const;

    // throws std::invalid_argument naming the violated invariant
    void validate() const;
};

} // namespace pshlab

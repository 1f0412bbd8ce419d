#include "pshlab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pshlab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

} // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        kv.entries_[key] = val;
    }
    return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' is not a number: " + it->second);
    }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return static_cast<int>(std::stol(it->second));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return std::stoull(it->second);
}

std::vector<double> KeyValueConfig::get_list(const std::string& key,
                                             const std::vector<double>& fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return split_doubles(it->second);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

ScenarioConfig ScenarioConfig::defaults(const std::string& name) {
    ScenarioConfig c;
    c.scenario = name;
    if (name == "radial-partial-linearity") {
        c.weight_construction = "radial-example";
        c.profile.breakpoints = {-1.0};
        c.profile.slopes = {2.0, 3.0};
        c.profile.anchor = -3.0;   // g(0^-) = 0, kink image at e^{-3}
        c.t_count = 128;
        c.t_max = 8.0;
        c.basis.n_max = 16;
    } else if (name == "char-two-segment") {
        c.weight_construction = "char-construction";
        c.weight_a = -0.5;
        c.t_count = 128;
        c.t_max = 8.0;
        c.basis.n_max = 16;
    } else if (name == "closed-form-jets") {
        c.weight_construction = "plain-power";
        c.weight_k = 1;
        c.jets = {Complex(1.0), Complex(1.0)};
        c.t_count = 64;
        c.t_max = 8.0;
        c.basis.n_max = 16;
    } else if (name == "annulus-kscan") {
        c.domain_shape = "annulus";
        c.domain_rho = 0.2;
        c.z0 = std::sqrt(0.2);   // geometric mean circle
        c.weight_construction = "power-green";
        c.basis.n_min = -24;
        c.basis.n_max = 24;
        c.t_count = 33;
        c.kscan_k_max = 12;
        c.quad.n_r = 1024;
        c.quad.n_theta = 1024;
    } else if (name == "sublevel-geometry") {
        c.area_resolution = 2048;
        c.mc_samples = 1000000;
    } else if (name == "bergman-logconvex") {
        c.weight_construction = "power-green";
        c.weight_k = 0;
        c.domain_rho = 0.2;
        c.basis.n_min = -24;
        c.basis.n_max = 24;
        c.t_count = 33;
        c.t_max = 6.0;
    } else {
        throw std::invalid_argument("unknown scenario: " + name);
    }
    return c;
}

ScenarioConfig ScenarioConfig::from_kv(const KeyValueConfig& kv) {
    const std::string name = kv.get_string("scenario", "");
    if (name.empty())
        throw std::invalid_argument("config: missing 'scenario' key");
    ScenarioConfig c = defaults(name);

    c.domain_shape = kv.get_string("domain.shape", c.domain_shape);
    c.domain_rho = kv.get_double("domain.rho", c.domain_rho);
    c.z0 = Complex(kv.get_double("domain.z0_re", c.z0.real()),
                   kv.get_double("domain.z0_im", c.z0.imag()));
    c.green_terms = kv.get_int("domain.green_terms", c.green_terms);

    c.weight_construction = kv.get_string("weight.construction", c.weight_construction);
    c.weight_a = kv.get_double("weight.a", c.weight_a);
    c.weight_k = kv.get_int("weight.k", c.weight_k);
    if (kv.has("weight.jets")) {
        c.jets.clear();
        for (double v : kv.get_list("weight.jets", {}))
            c.jets.push_back(Complex(v));
    }
    if (kv.has("profile.breakpoints"))
        c.profile.breakpoints = kv.get_list("profile.breakpoints", c.profile.breakpoints);
    if (kv.has("profile.slopes"))
        c.profile.slopes = kv.get_list("profile.slopes", c.profile.slopes);
    c.profile.anchor = kv.get_double("profile.anchor", c.profile.anchor);

    c.gain_kind = kv.get_string("gain.kind", c.gain_kind);
    c.gain_value = kv.get_double("gain.value", c.gain_value);
    c.gain_tilt = kv.get_double("gain.tilt", c.gain_tilt);
    c.gain_values = kv.get_list("gain.values", c.gain_values);
    c.gain_breakpoints = kv.get_list("gain.breakpoints", c.gain_breakpoints);

    c.basis.n_min = kv.get_int("basis.n_min", c.basis.n_min);
    c.basis.n_max = kv.get_int("basis.n_max", c.basis.n_max);
    c.t_count = kv.get_int("t_grid.count", c.t_count);
    c.t_max = kv.get_double("t_grid.max", c.t_max);

    c.quad.n_r = kv.get_int("quadrature.n_r", c.quad.n_r);
    c.quad.n_theta = kv.get_int("quadrature.n_theta", c.quad.n_theta);
    c.quad.rel_tol = kv.get_double("quadrature.rel_tol", c.quad.rel_tol);
    c.quad.mask_supersample = kv.get_int("quadrature.mask_supersample", c.quad.mask_supersample);

    c.mc_samples = static_cast<long long>(kv.get_u64("mc.samples",
                                                     static_cast<std::uint64_t>(c.mc_samples)));
    c.area_resolution = kv.get_int("area.resolution", c.area_resolution);
    c.kscan_k_max = kv.get_int("kscan.k_max", c.kscan_k_max);

    c.out_dir = kv.get_string("out_dir", c.out_dir);
    c.seed = kv.get_u64("seed", c.seed);
    return c;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    return from_kv(KeyValueConfig::parse_file(path));
}

DomainModel ScenarioConfig::make_domain() const {
    if (domain_shape == "unit-disc") return DomainModel::unit_disc(z0);
    if (domain_shape == "annulus") return DomainModel::annulus(domain_rho, z0, green_terms);
    throw std::invalid_argument("config: unknown domain.shape '" + domain_shape + "'");
}

GainFunction ScenarioConfig::make_gain() const {
    if (gain_kind == "constant") return GainFunction::constant(gain_value);
    if (gain_kind == "exponential-tilt") return GainFunction::exponential_tilt(gain_tilt);
    if (gain_kind == "piecewise-constant")
        return GainFunction::piecewise_constant(gain_values, gain_breakpoints);
    throw std::invalid_argument("config: unknown gain.kind '" + gain_kind + "'");
}

WeightPair ScenarioConfig::make_weight() const {
    const DomainModel dom = make_domain();
    if (weight_construction == "radial-example")
        return WeightPair::radial_example(dom, profile);
    if (weight_construction == "char-construction")
        return WeightPair::char_construction(dom, weight_a);
    if (weight_construction == "power-green")
        return WeightPair::power_green(dom, weight_k);
    if (weight_construction == "plain-power")
        return WeightPair::plain_power(dom, weight_k, jets);
    throw std::invalid_argument("config: unknown weight.construction '" + weight_construction +
                                "'");
}

std::vector<double> ScenarioConfig::make_t_grid() const {
    if (t_count < 2)
        throw std::invalid_argument("config: t_grid.count must be >= 2");
    std::vector<double> t(static_cast<std::size_t>(t_count));
    for (int i = 0; i < t_count; ++i)
        t[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) / (t_count - 1);
    return t;
}

void ScenarioConfig::validate() const {
    make_domain();
    const GainFunction g = make_gain();
    const GainValidation rep = g.validate(128);
    if (!rep.pass) {
        std::string msg = "config: gain rejected:";
        const std::size_t shown = std::min<std::size_t>(rep.failures.size(), 3);
        for (std::size_t i = 0; i < shown; ++i) msg += " " + rep.failures[i];
        if (rep.failures.size() > shown)
            msg += " (+" + std::to_string(rep.failures.size() - shown) + " more)";
        throw std::invalid_argument(msg);
    }
    if (scenario != "sublevel-geometry")
        make_weight();
    basis.validate();
    quad.validate();
    if (!(t_max > 0.0))
        throw std::invalid_argument("config: t_grid.max must be positive");
    make_t_grid();
}

} // namespace pshlab

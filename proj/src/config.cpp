#include "hawkes_greeks/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace hawkes_greeks {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    const char* b = v.data();
    const char* e = v.data() + v.size();
    double out = 0.0;
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || p != e || !std::isfinite(out))
        throw ConfigError("invalid value for '" + key + "': '" + v + "' is not a number");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("invalid value for '" + key + "': '" + v + "' is not a non-negative integer");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const auto x = to_u64(key, v);
    if (x > 1000000000ull) throw ConfigError("invalid value for '" + key + "': too large");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid value for '" + key + "': expected true or false");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"mu", [](RunConfig& c, auto& k, auto& v) { c.mu = to_double(k, v); }},
        {"sigma", [](RunConfig& c, auto& k, auto& v) { c.sigma = to_double(k, v); }},
        {"s0", [](RunConfig& c, auto& k, auto& v) { c.s0 = to_double(k, v); }},
        {"T", [](RunConfig& c, auto& k, auto& v) { c.horizon = to_double(k, v); }},
        {"gamma", [](RunConfig& c, auto& k, auto& v) { c.gamma = to_double(k, v); }},
        {"jump_fn",
         [](RunConfig& c, auto& k, auto& v) {
             if (v != "linear" && v != "zero")
                 throw ConfigError("invalid value for '" + k + "': expected linear or zero");
             c.jump_fn = v;
         }},
        {"lambda0", [](RunConfig& c, auto& k, auto& v) { c.lambda0 = to_double(k, v); }},
        {"alpha", [](RunConfig& c, auto& k, auto& v) { c.alpha = to_double(k, v); }},
        {"beta", [](RunConfig& c, auto& k, auto& v) { c.beta = to_double(k, v); }},
        {"paths", [](RunConfig& c, auto& k, auto& v) { c.mc.n_paths = to_u64(k, v); }},
        {"grid", [](RunConfig& c, auto& k, auto& v) { c.mc.grid_n = to_int(k, v); }},
        {"seed",
         [](RunConfig& c, auto& k, auto& v) {
             c.mc.seed = to_u64(k, v);
             c.convergence.seed = c.mc.seed;
         }},
        {"strike", [](RunConfig& c, auto& k, auto& v) { c.mc.strike = to_double(k, v); }},
        {"strikes",
         [](RunConfig& c, auto& k, auto& v) {
             c.strikes.clear();
             c.standard_strikes = v == "standard";
             if (!c.standard_strikes)
                 for (const auto& s : split_list(v)) c.strikes.push_back(to_double(k, s));
         }},
        {"kind",
         [](RunConfig& c, auto& k, auto& v) {
             try {
                 c.mc.kind = parse_option_kind(v);
             } catch (const std::invalid_argument& e) {
                 throw ConfigError("invalid value for '" + k + "': " + e.what());
             }
         }},
        {"fd_bump", [](RunConfig& c, auto& k, auto& v) { c.mc.fd_bump = to_double(k, v); }},
        {"workers",
         [](RunConfig& c, auto& k, auto& v) {
             c.mc.workers = static_cast<unsigned>(to_int(k, v));
             c.convergence.workers = c.mc.workers;
         }},
        {"discount", [](RunConfig& c, auto& k, auto& v) { c.mc.discount = to_bool(k, v); }},
        {"weight_node_offset", [](RunConfig& c, auto& k, auto& v) { c.mc.weight_node_offset = to_double(k, v); }},
        {"branch_policy",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "renormalize")
                 c.mc.branch_policy = BranchPolicy::renormalize;
             else if (v == "zero")
                 c.mc.branch_policy = BranchPolicy::zero;
             else
                 throw ConfigError("invalid value for '" + k + "': expected renormalize or zero");
         }},
        {"wiener_mode",
         [](RunConfig& c, auto& k, auto& v) {
             if (v == "full")
                 c.mc.wiener_mode = WienerMode::full;
             else if (v == "jump_free")
                 c.mc.wiener_mode = WienerMode::jump_free;
             else
                 throw ConfigError("invalid value for '" + k + "': expected full or jump_free");
         }},
        {"max_doublings",
         [](RunConfig& c, auto& k, auto& v) {
             c.mc.max_doublings = to_int(k, v);
             c.convergence.max_doublings = c.mc.max_doublings;
         }},
        {"methods",
         [](RunConfig& c, auto& k, auto& v) {
             c.methods.clear();
             if (v == "all") {
                 c.methods.assign(std::begin(kAllMethods), std::end(kAllMethods));
                 return;
             }
             for (const auto& m : split_list(v)) {
                 try {
                     c.methods.push_back(parse_method(m));
                 } catch (const std::invalid_argument& e) {
                     throw ConfigError("invalid value for '" + k + "': " + e.what());
                 }
             }
         }},
        {"convergence_grids",
         [](RunConfig& c, auto& k, auto& v) {
             c.convergence.grids.clear();
             for (const auto& s : split_list(v)) c.convergence.grids.push_back(to_int(k, s));
         }},
        {"convergence_paths", [](RunConfig& c, auto& k, auto& v) { c.convergence.n_paths = to_u64(k, v); }},
        {"output_dir", [](RunConfig& c, auto&, auto& v) { c.output_dir = v; }},
    };
    return table;
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second(c, key, value);
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

ModelParams RunConfig::model() const {
    try {
        auto jump = jump_fn == "zero" ? JumpFunction::zero() : JumpFunction::linear(gamma);
        return ModelParams(mu, sigma, s0, horizon, std::move(jump));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model parameters: ") + e.what());
    }
}

HawkesParams RunConfig::hawkes() const {
    try {
        return HawkesParams(lambda0, alpha, beta);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("intensity parameters: ") + e.what());
    }
}

std::vector<double> RunConfig::strike_list(bool grid_by_default) const {
    if (standard_strikes) return standard_strike_grid(s0);
    if (!strikes.empty()) return strikes;
    if (grid_by_default) return standard_strike_grid(s0);
    return {mc.strike};
}

RunConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
    RunConfig c;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
    std::map<std::string, std::string> values;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (value.empty()) throw ConfigError("missing value for '" + key + "'");
        values[key] = value;
    }
    for (const auto& [k, v] : overrides) values[k] = v;
    for (const auto& [k, v] : values) apply(c, k, v);

    c.model();
    c.hawkes();
    try {
        c.mc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (double k : c.strikes)
        if (!(k >= 0.0)) throw ConfigError("invalid value for 'strikes': strikes must be >= 0");
    if (c.convergence.grids.size() < 2) throw ConfigError("invalid value for 'convergence_grids': need two sizes");
    if (c.output_dir.empty()) throw ConfigError("invalid value for 'output_dir': empty path");
    return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& overrides) {
    if (!file) return parse_config("", overrides);
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file '" + file->string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

}  // namespace hawkes_greeks

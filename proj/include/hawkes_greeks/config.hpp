#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hawkes_greeks/asset_model.hpp"
#include "hawkes_greeks/convergence.hpp"
#include "hawkes_greeks/estimators.hpp"
#include "hawkes_greeks/hawkes.hpp"

namespace hawkes_greeks {

/// Invalid or unknown configuration key; CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "HAWKES_GREEKS_OUT";

struct RunConfig {
    double mu = 0.05;
    double sigma = 0.10;
    double s0 = 5.0;
    double horizon = 1.0;
    double gamma = 0.20;
    std::string jump_fn = "linear";
    double lambda0 = 1.0;
    double alpha = 0.30;
    double beta = 0.80;

    McConfig mc;
    std::vector<double> strikes;  // empty: single `strike` (price, delta) or the standard grid (table)
    bool standard_strikes = false;
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
    ConvergenceConfig convergence;
    std::string output_dir = "out";

    ModelParams model() const;
    HawkesParams hawkes() const;
    /// Strike list for a subcommand whose natural default is the standard grid (or not).
    std::vector<double> strike_list(bool grid_by_default) const;
};

/// Every key known to parse_config.
const std::vector<std::string>& config_keys();

/// Flat `key = value` text with `#` comments; `overrides` win over the text.
RunConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides = {});
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::map<std::string, std::string>& overrides = {});

}  // namespace hawkes_greeks

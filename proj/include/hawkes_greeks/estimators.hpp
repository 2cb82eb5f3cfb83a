#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hawkes_greeks/asset_model.hpp"
#include "hawkes_greeks/hawkes.hpp"
#include "hawkes_greeks/malliavin.hpp"

namespace hawkes_greeks {

enum class Method { exact, wm, pm, wp, fd };

std::string to_string(Method m);
Method parse_method(const std::string& text);
inline constexpr Method kAllMethods[] = {Method::exact, Method::wm, Method::pm, Method::wp, Method::fd};

/// How the Wiener weight treats paths with jumps.
enum class WienerMode {
    full,       // weight on every path
    jump_free,  // weight multiplied by 1{no accepted jumps}
};

struct McConfig {
    std::size_t n_paths = 1000;
    int grid_n = 100;
    std::uint64_t seed = 20240601;
    double strike = 5.0;
    OptionKind kind = OptionKind::european;
    double fd_bump = 0.01;
    unsigned workers = 1;
    bool discount = false;
    double weight_node_offset = 0.0;
    BranchPolicy branch_policy = BranchPolicy::renormalize;
    WienerMode wiener_mode = WienerMode::full;
    int max_doublings = 8;

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
};

struct DeltaEstimate {
    Method method = Method::exact;
    OptionKind kind = OptionKind::european;
    double strike = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
    double wallclock = 0.0;  // seconds; not part of deterministic output
};

struct PriceEstimate {
    OptionKind kind = OptionKind::european;
    double strike = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
    double wallclock = 0.0;
};

/// Welford accumulator; merging in a fixed order keeps results reproducible.
class RunningStats {
public:
    void add(double x) noexcept;
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept;  // sample variance
    double stderr_() const noexcept;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Realizes path `index` of a run, doubling the strip while thinning overflows.
BaseConfiguration realize_base(const HawkesParams& params, double horizon, StreamId stream, int grid_n,
                               int max_doublings);

class GreeksEngine {
public:
    GreeksEngine(ModelParams model, HawkesParams hawkes, McConfig cfg);

    const McConfig& config() const noexcept { return cfg_; }

    std::vector<PriceEstimate> prices(std::span<const double> strikes) const;
    /// Rows ordered by method, then strike.
    std::vector<DeltaEstimate> deltas(std::span<const double> strikes, std::span<const Method> methods) const;

    /// Per-path contributions of one method at one strike; used by tests.
    std::vector<double> contributions(Method method, double strike) const;

private:
    ModelParams model_;
    HawkesParams hawkes_;
    McConfig cfg_;
};

Estimate price(const ModelParams& model, const HawkesParams& params, const McConfig& cfg);
DeltaEstimate delta_exact(const ModelParams& model, const HawkesParams& params, const McConfig& cfg);
DeltaEstimate delta_wm(const ModelParams& model, const HawkesParams& params, const McConfig& cfg);
DeltaEstimate delta_pm(const ModelParams& model, const HawkesParams& params, const McConfig& cfg);
DeltaEstimate delta_wp(const ModelParams& model, const HawkesParams& params, const McConfig& cfg);
DeltaEstimate delta_fd(const ModelParams& model, const HawkesParams& params, const McConfig& cfg);

/// K = s0 * u for u = 0.05, 0.10, ..., 1.30.
std::vector<double> standard_strike_grid(double s0);

/// Independent stream key for reference runs.
std::uint64_t reference_seed(std::uint64_t seed);

struct MseRow {
    Method method = Method::exact;
    OptionKind kind = OptionKind::european;
    double mse = 0.0;
    std::size_t n_strikes = 0;
    std::size_t n_paths = 0;
};

struct MseTable {
    std::vector<DeltaEstimate> curves;     // per method and strike
    std::vector<DeltaEstimate> reference;  // EXACT at 10x paths, independent seed
    std::vector<MseRow> rows;
};

MseTable mse_table(const ModelParams& model, const HawkesParams& params, std::span<const double> strikes,
                   std::span<const Method> methods, const McConfig& cfg);

}  // namespace hawkes_greeks

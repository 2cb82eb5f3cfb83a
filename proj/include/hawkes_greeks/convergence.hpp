#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hawkes_greeks/asset_model.hpp"
#include "hawkes_greeks/hawkes.hpp"

namespace hawkes_greeks {

struct ConvergenceConfig {
    std::vector<int> grids{25, 50, 100, 200, 400};
    std::size_t n_paths = 10000;
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
    int max_doublings = 8;
    double lambda_gate = -0.8;
    double x_gate = -0.4;
};

struct ConvergenceRow {
    int n = 0;
    double mse_lambda = 0.0;
    double stderr_lambda = 0.0;
    double mse_x = 0.0;
    double stderr_x = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double slope_lambda = 0.0;
    double slope_x = 0.0;
    bool passed = false;
    bool few_paths = false;  // fewer than 1000 paths: slopes unstable
};

/// Least-squares slope of log(y) on log(x); points with y == 0 are dropped.
/// Returns -infinity when every y is zero.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Exact and discretized paths share one base configuration per path.
ConvergenceReport run_convergence(const ModelParams& model, const HawkesParams& params,
                                  const ConvergenceConfig& cfg);

}  // namespace hawkes_greeks

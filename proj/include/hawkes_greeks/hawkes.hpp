#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawkes_greeks/rng.hpp"

namespace hawkes_greeks {

/// lambda(t) = lambda0 + alpha * sum_{T_i < t} exp(-beta (t - T_i)), alpha < beta.
class HawkesParams {
public:
    HawkesParams(double lambda0, double alpha, double beta);

    double lambda0() const noexcept { return lambda0_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    /// Initial strip height: max(4 lambda0, lambda0 + 10 alpha).
    double default_strip_height() const noexcept;

private:
    double lambda0_;
    double alpha_;
    double beta_;
};

/// Uniform time grid on [0, horizon] with n cells.
class TimeGrid {
public:
    TimeGrid(double horizon, int n);

    double horizon() const noexcept { return horizon_; }
    int cells() const noexcept { return n_; }
    double step() const noexcept { return horizon_ / n_; }
    double time(int k) const noexcept { return k == n_ ? horizon_ : k * step(); }
    /// Cell index k with t_k <= t < t_{k+1}; t == horizon maps to the last cell.
    int cell_of(double t) const noexcept;
    /// Grid index if t is a node (to 1e-12 relative), otherwise -1.
    int node_index(double t) const noexcept;

private:
    double horizon_;
    int n_;
};

struct Candidate {
    double t = 0.0;
    double z = 0.0;
    double w = 0.0;          // Brownian motion at t
    std::uint32_t id = 0;    // stable across perturbations
};

inline constexpr std::uint32_t kAddedPointId = 0xFFFFFFFFu;

class StripOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The sample point omega: dominating Poisson points on [0,T] x (0, strip]
/// together with a Brownian path on the grid.
class BaseConfiguration {
public:
    BaseConfiguration(TimeGrid grid, double strip_height, std::vector<Candidate> candidates,
                      std::vector<double> w_grid, StreamId stream, int layers);

    const TimeGrid& grid() const noexcept { return grid_; }
    double horizon() const noexcept { return grid_.horizon(); }
    double strip_height() const noexcept { return strip_; }
    std::span<const Candidate> candidates() const noexcept { return candidates_; }
    std::span<const double> w_grid() const noexcept { return w_grid_; }
    StreamId stream() const noexcept { return stream_; }
    int layers() const noexcept { return layers_; }

    /// W(t): stored value at grid nodes and candidates, conditional mean elsewhere.
    double brownian_at(double t) const;
    const Candidate& candidate(std::uint32_t id) const;

private:
    TimeGrid grid_;
    double strip_;
    std::vector<Candidate> candidates_;
    std::vector<double> w_grid_;
    StreamId stream_;
    int layers_;
};

BaseConfiguration sample_base(const HawkesParams& params, double horizon, double strip_height,
                              StreamId stream, int grid_n = 100);

/// Doubles the strip; new points come from a fresh substream so existing points are kept.
BaseConfiguration extend_strip(const BaseConfiguration& base);

struct Jump {
    double t = 0.0;
    double lambda_after = 0.0;  // lambda(T_k+)
    double w = 0.0;
    std::uint32_t id = 0;
};

class HawkesRealization {
public:
    HawkesRealization(HawkesParams params, double horizon, std::vector<Jump> jumps, bool overflow);

    const HawkesParams& params() const noexcept { return params_; }
    double horizon() const noexcept { return horizon_; }
    std::span<const Jump> jumps() const noexcept { return jumps_; }
    std::size_t count() const noexcept { return jumps_.size(); }
    bool overflow() const noexcept { return overflow_; }
    bool accepted(std::uint32_t id) const noexcept;

    /// Left limit lambda(t-).
    double intensity_at(double t) const;
    double integrated_intensity(double a, double b) const;
    /// Exact integral of lambda over every grid cell.
    std::vector<double> cell_masses(const TimeGrid& grid) const;

private:
    HawkesParams params_;
    double horizon_;
    std::vector<Jump> jumps_;
    bool overflow_;
};

HawkesRealization thin(std::span<const Candidate> candidates, const HawkesParams& params,
                       double horizon, double strip_height);
HawkesRealization thin(const BaseConfiguration& base, const HawkesParams& params);

double intensity_at(const HawkesRealization& real, double t);

/// m(t) = E lambda(t) and its integral over [0, t].
double mean_intensity_oracle(const HawkesParams& params, double t);
double integrated_mean_intensity(const HawkesParams& params, double t);

}  // namespace hawkes_greeks

#include "hawkes_greeks/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hawkes_greeks {

HawkesParams::HawkesParams(double lambda0, double alpha, double beta)
    : lambda0_(lambda0), alpha_(alpha), beta_(beta) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
        throw std::invalid_argument("lambda0 must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("alpha must be non-negative");
    if (!(alpha < beta)) throw std::invalid_argument("stability violated: alpha must be < beta");
}

double HawkesParams::default_strip_height() const noexcept {
    return std::max(4.0 * lambda0_, lambda0_ + 10.0 * alpha_);
}

TimeGrid::TimeGrid(double horizon, int n) : horizon_(horizon), n_(n) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("horizon must be positive");
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
}

int TimeGrid::cell_of(double t) const noexcept {
    const int k = static_cast<int>(std::floor(t / step()));
    return std::clamp(k, 0, n_ - 1);
}

int TimeGrid::node_index(double t) const noexcept {
    const double x = t / step();
    const double r = std::round(x);
    if (r < 0.0 || r > n_) return -1;
    if (std::abs(x - r) > 1e-12 * std::max(1.0, r)) return -1;
    return static_cast<int>(r);
}

BaseConfiguration::BaseConfiguration(TimeGrid grid, double strip_height,
                                     std::vector<Candidate> candidates, std::vector<double> w_grid,
                                     StreamId stream, int layers)
    : grid_(grid),
      strip_(strip_height),
      candidates_(std::move(candidates)),
      w_grid_(std::move(w_grid)),
      stream_(stream),
      layers_(layers) {
    if (w_grid_.size() != static_cast<std::size_t>(grid_.cells()) + 1)
        throw std::invalid_argument("Brownian grid size does not match time grid");
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
        const auto& c = candidates_[i];
        if (!(c.t > 0.0 && c.t < grid_.horizon()) || !(c.z > 0.0 && c.z <= strip_))
            throw std::invalid_argument("candidate outside the strip");
        if (i > 0 && !(candidates_[i - 1].t < c.t))
            throw std::invalid_argument("candidates must be strictly increasing in time");
    }
}

const Candidate& BaseConfiguration::candidate(std::uint32_t id) const {
    for (const auto& c : candidates_)
        if (c.id == id) return c;
    throw std::out_of_range("unknown candidate id " + std::to_string(id));
}

double BaseConfiguration::brownian_at(double t) const {
    if (t < 0.0 || t > horizon() * (1.0 + 1e-12)) throw std::out_of_range("time outside [0, T]");
    if (const int k = grid_.node_index(t); k >= 0) return w_grid_[k];
    const int k = grid_.cell_of(t);
    double ta = grid_.time(k), wa = w_grid_[k];
    double tb = grid_.time(k + 1), wb = w_grid_[k + 1];
    auto it = std::lower_bound(candidates_.begin(), candidates_.end(), t,
                               [](const Candidate& c, double x) { return c.t < x; });
    if (it != candidates_.end() && it->t == t) return it->w;
    if (it != candidates_.end() && it->t < tb) {
        tb = it->t;
        wb = it->w;
    }
    if (it != candidates_.begin() && std::prev(it)->t > ta) {
        ta = std::prev(it)->t;
        wa = std::prev(it)->w;
    }
    return wa + (t - ta) / (tb - ta) * (wb - wa);
}

namespace {

struct Known {
    double t;
    double w;
};

// Bridge-fills W at the new points given every already known value.
void bridge_fill(std::vector<Known>& known, std::vector<Candidate>& fresh, CounterStream& rng) {
    for (auto& c : fresh) {
        auto it = std::lower_bound(known.begin(), known.end(), c.t,
                                   [](const Known& k, double x) { return k.t < x; });
        if (it == known.begin() || it == known.end() || it->t == c.t)
            throw std::invalid_argument("duplicate or out-of-range candidate time");
        const Known& a = *std::prev(it);
        const Known& b = *it;
        const double frac = (c.t - a.t) / (b.t - a.t);
        const double var = (c.t - a.t) * (b.t - c.t) / (b.t - a.t);
        c.w = a.w + frac * (b.w - a.w) + std::sqrt(var) * rng.normal();
        known.insert(it, Known{c.t, c.w});
    }
}

std::vector<Candidate> draw_layer(StreamId stream, std::uint32_t layer, double horizon,
                                  double z_low, double z_high, std::uint32_t first_id) {
    CounterStream rng(stream, Purpose::base_points, layer);
    const double rate = z_high - z_low;
    std::vector<Candidate> out;
    double t = rng.exponential(rate);
    while (t < horizon) {
        const double z = z_high - rng.uniform() * rate;  // in (z_low, z_high]
        out.push_back(Candidate{t, z, 0.0, first_id + static_cast<std::uint32_t>(out.size())});
        t += rng.exponential(rate);
    }
    return out;
}

std::vector<Known> known_points(const TimeGrid& grid, std::span<const double> w_grid,
                                std::span<const Candidate> cands) {
    std::vector<Known> known;
    known.reserve(w_grid.size() + cands.size());
    for (int k = 0; k <= grid.cells(); ++k) known.push_back({grid.time(k), w_grid[k]});
    for (const auto& c : cands) known.push_back({c.t, c.w});
    std::sort(known.begin(), known.end(), [](const Known& a, const Known& b) { return a.t < b.t; });
    return known;
}

}  // namespace

BaseConfiguration sample_base(const HawkesParams& params, double horizon, double strip_height,
                              StreamId stream, int grid_n) {
    if (!(strip_height > params.lambda0()))
        throw std::invalid_argument("strip height must exceed lambda0");
    const TimeGrid grid(horizon, grid_n);
    std::vector<double> w(grid_n + 1, 0.0);
    CounterStream bm(stream, Purpose::brownian);
    const double sd = std::sqrt(grid.step());
    for (int k = 0; k < grid_n; ++k) w[k + 1] = w[k] + sd * bm.normal();

    auto cands = draw_layer(stream, 0, horizon, 0.0, strip_height, 0);
    auto known = known_points(grid, w, {});
    CounterStream br(stream, Purpose::bridge, 0);
    bridge_fill(known, cands, br);
    return BaseConfiguration(grid, strip_height, std::move(cands), std::move(w), stream, 1);
}

BaseConfiguration extend_strip(const BaseConfiguration& base) {
    const auto layer = static_cast<std::uint32_t>(base.layers());
    const double low = base.strip_height();
    std::uint32_t next_id = 0;
    for (const auto& c : base.candidates()) next_id = std::max(next_id, c.id + 1);
    auto fresh = draw_layer(base.stream(), layer, base.horizon(), low, 2.0 * low, next_id);
    auto known = known_points(base.grid(), base.w_grid(), base.candidates());
    CounterStream br(base.stream(), Purpose::bridge, layer);
    bridge_fill(known, fresh, br);

    std::vector<Candidate> all(base.candidates().begin(), base.candidates().end());
    all.insert(all.end(), fresh.begin(), fresh.end());
    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) { return a.t < b.t; });
    std::vector<double> w(base.w_grid().begin(), base.w_grid().end());
    return BaseConfiguration(base.grid(), 2.0 * low, std::move(all), std::move(w), base.stream(),
                             base.layers() + 1);
}

HawkesRealization::HawkesRealization(HawkesParams params, double horizon, std::vector<Jump> jumps,
                                     bool overflow)
    : params_(params), horizon_(horizon), jumps_(std::move(jumps)), overflow_(overflow) {}

bool HawkesRealization::accepted(std::uint32_t id) const noexcept {
    return std::any_of(jumps_.begin(), jumps_.end(), [id](const Jump& j) { return j.id == id; });
}

double HawkesRealization::intensity_at(double t) const {
    if (t < 0.0 || t > horizon_ * (1.0 + 1e-12)) throw std::out_of_range("time outside [0, T]");
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double x) { return j.t < x; });
    if (it == jumps_.begin()) return params_.lambda0();
    const Jump& last = *std::prev(it);
    return params_.lambda0() +
           (last.lambda_after - params_.lambda0()) * std::exp(-params_.beta() * (t - last.t));
}

double HawkesRealization::integrated_intensity(double a, double b) const {
    if (!(a <= b)) throw std::invalid_argument("integration bounds out of order");
    const double beta = params_.beta();
    double total = params_.lambda0() * (b - a);
    for (const auto& j : jumps_) {
        if (j.t >= b) break;
        const double from = std::max(a, j.t);
        total += params_.alpha() / beta *
                 (std::exp(-beta * (from - j.t)) - std::exp(-beta * (b - j.t)));
    }
    return total;
}

std::vector<double> HawkesRealization::cell_masses(const TimeGrid& grid) const {
    const double l0 = params_.lambda0();
    const double beta = params_.beta();
    std::vector<double> mass(grid.cells(), 0.0);
    double excess = 0.0;
    double cur = 0.0;
    std::size_t j = 0;
    auto advance = [&](double to, double& m) {
        const double d = to - cur;
        const double decay = std::exp(-beta * d);
        m += l0 * d + excess * (1.0 - decay) / beta;
        excess *= decay;
        cur = to;
    };
    for (int k = 0; k < grid.cells(); ++k) {
        const double end = grid.time(k + 1);
        while (j < jumps_.size() && jumps_[j].t < end) {
            advance(jumps_[j].t, mass[k]);
            excess += params_.alpha();
            ++j;
        }
        advance(end, mass[k]);
    }
    return mass;
}

HawkesRealization thin(std::span<const Candidate> candidates, const HawkesParams& params,
                       double horizon, double strip_height) {
    std::vector<Jump> jumps;
    bool overflow = false;
    double excess = 0.0;
    double last = 0.0;
    for (const auto& c : candidates) {
        excess *= std::exp(-params.beta() * (c.t - last));
        last = c.t;
        const double lam = params.lambda0() + excess;
        if (c.z <= lam) {
            if (lam + params.alpha() > strip_height) overflow = true;
            excess += params.alpha();
            jumps.push_back(Jump{c.t, params.lambda0() + excess, c.w, c.id});
        }
    }
    return HawkesRealization(params, horizon, std::move(jumps), overflow);
}

HawkesRealization thin(const BaseConfiguration& base, const HawkesParams& params) {
    return thin(base.candidates(), params, base.horizon(), base.strip_height());
}

double intensity_at(const HawkesRealization& real, double t) { return real.intensity_at(t); }

double mean_intensity_oracle(const HawkesParams& params, double t) {
    const double a = params.alpha(), b = params.beta();
    return params.lambda0() * (b - a * std::exp((a - b) * t)) / (b - a);
}

double integrated_mean_intensity(const HawkesParams& params, double t) {
    const double a = params.alpha(), b = params.beta();
    const double k = b - a;
    return params.lambda0() / k * (b * t + a * std::expm1(-k * t) / k);
}

}  // namespace hawkes_greeks

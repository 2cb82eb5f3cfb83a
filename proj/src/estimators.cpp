#include "hawkes_greeks/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace hawkes_greeks {

std::string to_string(Method m) {
    switch (m) {
        case Method::exact: return "EXACT";
        case Method::wm: return "WM";
        case Method::pm: return "PM";
        case Method::wp: return "WP";
        case Method::fd: return "FD";
    }
    return "?";
}

Method parse_method(const std::string& text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "exact") return Method::exact;
    if (t == "wm") return Method::wm;
    if (t == "pm") return Method::pm;
    if (t == "wp") return Method::wp;
    if (t == "fd") return Method::fd;
    throw std::invalid_argument("unknown method '" + text + "'");
}

void McConfig::validate() const {
    if (n_paths < 2) throw std::invalid_argument("paths must be >= 2");
    if (grid_n < 1) throw std::invalid_argument("grid must be >= 1");
    if (!(strike >= 0.0) || !std::isfinite(strike)) throw std::invalid_argument("strike must be >= 0");
    if (!(fd_bump > 0.0 && fd_bump < 1.0)) throw std::invalid_argument("fd_bump must lie in (0, 1)");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (!(weight_node_offset >= 0.0 && weight_node_offset < 1.0))
        throw std::invalid_argument("weight_node_offset must lie in [0, 1)");
    if (max_doublings < 0) throw std::invalid_argument("max_doublings must be >= 0");
}

void RunningStats::add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

double RunningStats::variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::stderr_() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

BaseConfiguration realize_base(const HawkesParams& params, double horizon, StreamId stream, int grid_n,
                               int max_doublings) {
    auto base = sample_base(params, horizon, params.default_strip_height(), stream, grid_n);
    for (int d = 0; thin(base, params).overflow(); ++d) {
        if (d >= max_doublings) throw NumericalDegeneracy("strip overflow persisted after maximum doublings");
        base = extend_strip(base);
    }
    return base;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Timings {
    double common = 0.0;
    double per_method[5] = {0, 0, 0, 0, 0};
    void merge(const Timings& o) {
        common += o.common;
        for (int i = 0; i < 5; ++i) per_method[i] += o.per_method[i];
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

class PathEvaluator {
public:
    PathEvaluator(const ModelParams& model, const HawkesParams& hawkes, const McConfig& cfg,
                  std::span<const double> strikes, std::span<const Method> methods)
        : model_(model),
          hawkes_(hawkes),
          cfg_(cfg),
          strikes_(strikes.begin(), strikes.end()),
          methods_(methods.begin(), methods.end()),
          ctx_(model, hawkes, TimeGrid(model.horizon(), cfg.grid_n), cfg.weight_node_offset) {
        for (Method m : methods_) {
            if (m == Method::pm || m == Method::wp) need_pm_ = true;
            if (m == Method::wm || m == Method::wp) need_wm_ = true;
        }
        if (need_pm_) {
            if (model.jump().is_zero())
                throw NumericalDegeneracy("degenerate jump model: Poisson weight undefined when J is zero");
            threshold_ = weight_threshold(model, hawkes, model.horizon());
        }
        min_strike_ = strikes_.empty() ? 0.0 : *std::min_element(strikes_.begin(), strikes_.end());
        scale_ = cfg.discount ? std::exp(-model.mu() * model.horizon()) : 1.0;
    }

    std::size_t delta_width() const noexcept { return methods_.size() * strikes_.size(); }

    void evaluate(std::size_t index, std::span<double> deltas, std::span<double> prices, Timings& tm) const {
        auto base = sample_base(hawkes_, model_.horizon(), hawkes_.default_strip_height(),
                                StreamId{cfg_.seed, index}, cfg_.grid_n);
        int doublings = 0;
        while (true) {
            auto cfg = make_configuration(base, hawkes_);
            if (!cfg.realization.overflow()) {
                try {
                    compute(base, cfg, deltas, prices, tm);
                    return;
                } catch (const StripOverflow&) {
                }
            }
            if (++doublings > cfg_.max_doublings)
                throw NumericalDegeneracy("strip overflow persisted after maximum doublings on path " +
                                          std::to_string(index));
            base = extend_strip(base);
        }
    }

private:
    void compute(const BaseConfiguration& base, const Configuration& cfg, std::span<double> deltas,
                 std::span<double> prices, Timings& tm) const {
        auto t0 = Clock::now();
        const double s0 = model_.s0();
        const double T = model_.horizon();
        const bool european = cfg_.kind == OptionKind::european;
        double terminal, wiener = 0.0;
        if (european) {
            terminal = s0 * std::exp(terminal_log_price(model_, hawkes_, base.w_grid().back(), cfg.realization));
            if (need_wm_) wiener = base.w_grid().back() / (s0 * model_.sigma() * T);
        } else {
            const auto path = ctx_.simulator().simulate(base, cfg.realization);
            terminal = path.asian;
            if (need_wm_) wiener = (2.0 * path.ito_s_dw / (T * model_.sigma() * terminal) + 1.0) / s0;
        }
        if (cfg_.wiener_mode == WienerMode::jump_free && cfg.realization.count() > 0) wiener = 0.0;
        const std::size_t ns = strikes_.size();
        for (std::size_t j = 0; j < ns; ++j) prices[j] = scale_ * payoff(cfg_.kind, terminal, strikes_[j]);
        tm.common += seconds_since(t0);

        std::vector<double> pm;
        if (need_pm_) {
            t0 = Clock::now();
            pm = poisson_weights(base, cfg, terminal);
            tm.per_method[static_cast<int>(Method::pm)] += seconds_since(t0);
        }

        t0 = Clock::now();
        const double b = cfg_.fd_bump;
        for (std::size_t m = 0; m < methods_.size(); ++m) {
            for (std::size_t j = 0; j < ns; ++j) {
                const double K = strikes_[j];
                const double f = payoff(cfg_.kind, terminal, K);
                double v = 0.0;
                switch (methods_[m]) {
                    case Method::exact: v = terminal > K ? terminal / s0 : 0.0; break;
                    case Method::wm: v = f * wiener; break;
                    case Method::pm: v = f * pm[j]; break;
                    case Method::wp: v = 0.5 * f * (wiener + pm[j]); break;
                    case Method::fd:
                        v = (payoff(cfg_.kind, (1.0 + b) * terminal, K) - payoff(cfg_.kind, (1.0 - b) * terminal, K)) /
                            (2.0 * s0 * b);
                        break;
                }
                deltas[m * ns + j] = scale_ * v;
            }
        }
        const double rest = seconds_since(t0) / static_cast<double>(std::max<std::size_t>(1, methods_.size()));
        for (Method m : methods_) tm.per_method[static_cast<int>(m)] += rest;
    }

    // delta^N(u_K) for every strike; zero where the payoff vanishes
    std::vector<double> poisson_weights(const BaseConfiguration& base, const Configuration& cfg,
                                        double terminal) const {
        const std::size_t ns = strikes_.size();
        std::vector<double> delta(ns, 0.0);
        if (terminal <= min_strike_) return delta;
        const auto& grid = ctx_.grid();
        const auto kind = cfg_.kind;
        const double s0 = model_.s0();
        const auto prof0 = ctx_.profile(kind, base, cfg);
        std::vector<PerturbationProfile> loo;
        std::vector<int> cells;
        for (const auto& j : cfg.realization.jumps()) {
            const auto reduced = without_point(cfg, hawkes_, j.id);
            loo.push_back(ctx_.profile(kind, base, reduced, min_strike_));
            cells.push_back(grid.cell_of(j.t));
        }
        for (std::size_t s = 0; s < ns; ++s) {
            const double K = strikes_[s];
            if (!(terminal > K)) continue;
            const auto w0 = build_weight(prof0, kind, K, threshold_, s0, cfg_.branch_policy);
            double d = 0.0;
            for (std::size_t i = 0; i < loo.size(); ++i) {
                if (!(loo[i].terminal > K)) continue;
                d += build_weight(loo[i], kind, K, threshold_, s0, cfg_.branch_policy).u[cells[i]];
            }
            for (std::size_t k = 0; k < w0.u.size(); ++k) d -= w0.u[k] * prof0.cell_mass[k];
            delta[s] = d;
        }
        return delta;
    }

    const ModelParams& model_;
    const HawkesParams& hawkes_;
    const McConfig& cfg_;
    std::vector<double> strikes_;
    std::vector<Method> methods_;
    PerturbationContext ctx_;
    bool need_pm_ = false;
    bool need_wm_ = false;
    double threshold_ = 0.0;
    double min_strike_ = 0.0;
    double scale_ = 1.0;
};

struct RunResult {
    std::vector<double> deltas;  // path-major, width = methods * strikes
    std::vector<double> prices;  // path-major, width = strikes
    Timings timings;
};

RunResult run_paths(const ModelParams& model, const HawkesParams& hawkes, const McConfig& cfg,
                    std::span<const double> strikes, std::span<const Method> methods) {
    cfg.validate();
    const PathEvaluator eval(model, hawkes, cfg, strikes, methods);
    const std::size_t n = cfg.n_paths;
    const std::size_t dw = eval.delta_width();
    const std::size_t pw = strikes.size();
    RunResult out;
    out.deltas.assign(n * dw, 0.0);
    out.prices.assign(n * pw, 0.0);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.workers, n));
    std::vector<Timings> tms(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
            for (std::size_t i = lo; i < hi; ++i)
                eval.evaluate(i, std::span<double>(out.deltas).subspan(i * dw, dw),
                              std::span<double>(out.prices).subspan(i * pw, pw), tms[w]);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& t : tms) out.timings.merge(t);
    return out;
}

RunningStats column_stats(const std::vector<double>& data, std::size_t width, std::size_t col) {
    RunningStats s;
    for (std::size_t i = col; i < data.size(); i += width) s.add(data[i]);
    return s;
}

}  // namespace

GreeksEngine::GreeksEngine(ModelParams model, HawkesParams hawkes, McConfig cfg)
    : model_(std::move(model)), hawkes_(hawkes), cfg_(cfg) {
    cfg_.validate();
}

std::vector<PriceEstimate> GreeksEngine::prices(std::span<const double> strikes) const {
    const auto run = run_paths(model_, hawkes_, cfg_, strikes, {});
    std::vector<PriceEstimate> out;
    for (std::size_t j = 0; j < strikes.size(); ++j) {
        const auto s = column_stats(run.prices, strikes.size(), j);
        out.push_back({cfg_.kind, strikes[j], s.mean(), s.stderr_(), s.count(), run.timings.common});
    }
    return out;
}

std::vector<DeltaEstimate> GreeksEngine::deltas(std::span<const double> strikes,
                                                std::span<const Method> methods) const {
    const auto run = run_paths(model_, hawkes_, cfg_, strikes, methods);
    const std::size_t ns = strikes.size();
    std::vector<DeltaEstimate> out;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        double clock = run.timings.common + run.timings.per_method[static_cast<int>(methods[m])];
        if (methods[m] == Method::wp) clock += run.timings.per_method[static_cast<int>(Method::pm)];
        for (std::size_t j = 0; j < ns; ++j) {
            const auto s = column_stats(run.deltas, methods.size() * ns, m * ns + j);
            out.push_back({methods[m], cfg_.kind, strikes[j], s.mean(), s.stderr_(), s.count(), clock});
        }
    }
    return out;
}

std::vector<double> GreeksEngine::contributions(Method method, double strike) const {
    const double k[] = {strike};
    const Method m[] = {method};
    return run_paths(model_, hawkes_, cfg_, k, m).deltas;
}

Estimate price(const ModelParams& model, const HawkesParams& params, const McConfig& cfg) {
    const double k[] = {cfg.strike};
    const auto p = GreeksEngine(model, params, cfg).prices(k).front();
    return {p.value, p.stderr_, p.n_paths};
}

namespace {
DeltaEstimate single_delta(Method method, const ModelParams& model, const HawkesParams& params,
                           const McConfig& cfg) {
    const double k[] = {cfg.strike};
    const Method m[] = {method};
    return GreeksEngine(model, params, cfg).deltas(k, m).front();
}
}  // namespace

DeltaEstimate delta_exact(const ModelParams& model, const HawkesParams& params, const McConfig& cfg) {
    return single_delta(Method::exact, model, params, cfg);
}
DeltaEstimate delta_wm(const ModelParams& model, const HawkesParams& params, const McConfig& cfg) {
    return single_delta(Method::wm, model, params, cfg);
}
DeltaEstimate delta_pm(const ModelParams& model, const HawkesParams& params, const McConfig& cfg) {
    return single_delta(Method::pm, model, params, cfg);
}
DeltaEstimate delta_wp(const ModelParams& model, const HawkesParams& params, const McConfig& cfg) {
    return single_delta(Method::wp, model, params, cfg);
}
DeltaEstimate delta_fd(const ModelParams& model, const HawkesParams& params, const McConfig& cfg) {
    return single_delta(Method::fd, model, params, cfg);
}

std::vector<double> standard_strike_grid(double s0) {
    std::vector<double> k;
    for (int i = 1; i <= 26; ++i) k.push_back(s0 * (i * 5) / 100.0);
    return k;
}

std::uint64_t reference_seed(std::uint64_t seed) { return seed ^ 0xA5A5F00DCAFEBEEFull; }

MseTable mse_table(const ModelParams& model, const HawkesParams& params, std::span<const double> strikes,
                   std::span<const Method> methods, const McConfig& cfg) {
    MseTable t;
    if (strikes.empty() || methods.empty()) return t;
    t.curves = GreeksEngine(model, params, cfg).deltas(strikes, methods);
    McConfig ref = cfg;
    ref.n_paths = cfg.n_paths * 10;
    ref.seed = reference_seed(cfg.seed);
    const Method exact[] = {Method::exact};
    t.reference = GreeksEngine(model, params, ref).deltas(strikes, exact);
    const std::size_t ns = strikes.size();
    for (std::size_t m = 0; m < methods.size(); ++m) {
        double sum = 0.0;
        for (std::size_t j = 0; j < ns; ++j) {
            const double e = t.curves[m * ns + j].value - t.reference[j].value;
            sum += e * e;
        }
        t.rows.push_back({methods[m], cfg.kind, sum / static_cast<double>(ns), ns, cfg.n_paths});
    }
    return t;
}

}  // namespace hawkes_greeks

#include "hawkes_greeks/convergence.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "hawkes_greeks/estimators.hpp"

namespace hawkes_greeks {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("slope inputs differ in length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.empty()) return -std::numeric_limits<double>::infinity();
    if (lx.size() < 2) throw std::invalid_argument("need two non-zero points for a slope");
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

ConvergenceReport run_convergence(const ModelParams& model, const HawkesParams& params,
                                  const ConvergenceConfig& cfg) {
    if (cfg.grids.size() < 2) throw std::invalid_argument("convergence needs at least two grid sizes");
    if (cfg.n_paths < 2) throw std::invalid_argument("paths must be >= 2");
    if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
    long base_n = 1;
    for (int n : cfg.grids) {
        if (n < 1) throw std::invalid_argument("grid sizes must be >= 1");
        base_n = std::lcm(base_n, static_cast<long>(n));
    }
    if (base_n > 100000) throw std::invalid_argument("grid sizes have too large a common multiple");

    const std::size_t ng = cfg.grids.size();
    const std::size_t np = cfg.n_paths;
    std::vector<double> err(np * ng * 2);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(cfg.workers, np));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = np * w / workers; i < np * (w + 1) / workers; ++i) {
                auto base = realize_base(params, model.horizon(), StreamId{cfg.seed, i},
                                         static_cast<int>(base_n), cfg.max_doublings);
                for (int d = 0;; ++d) {
                    bool overflow = false;
                    for (int n : cfg.grids) overflow = overflow || discretize(model, params, base, n).overflow;
                    if (!overflow) break;
                    if (d >= cfg.max_doublings)
                        throw std::runtime_error("strip overflow persisted in the discretized scheme");
                    base = extend_strip(base);
                }
                const auto real = thin(base, params);
                const double lam = real.intensity_at(model.horizon());
                const double x = terminal_log_price(model, params, base.w_grid().back(), real);
                for (std::size_t g = 0; g < ng; ++g) {
                    const auto d = discretize(model, params, base, cfg.grids[g]);
                    const double el = lam - d.lambda_n.back();
                    const double ex = x - d.x_n.back();
                    err[(i * ng + g) * 2] = el * el;
                    err[(i * ng + g) * 2 + 1] = ex * ex;
                }
            }
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

    ConvergenceReport rep;
    std::vector<double> ns, ml, mx;
    for (std::size_t g = 0; g < ng; ++g) {
        RunningStats sl, sx;
        for (std::size_t i = 0; i < np; ++i) {
            sl.add(err[(i * ng + g) * 2]);
            sx.add(err[(i * ng + g) * 2 + 1]);
        }
        rep.rows.push_back({cfg.grids[g], sl.mean(), sl.stderr_(), sx.mean(), sx.stderr_()});
        ns.push_back(cfg.grids[g]);
        ml.push_back(sl.mean());
        mx.push_back(sx.mean());
    }
    rep.slope_lambda = loglog_slope(ns, ml);
    rep.slope_x = loglog_slope(ns, mx);
    rep.passed = rep.slope_lambda <= cfg.lambda_gate && rep.slope_x <= cfg.x_gate;
    rep.few_paths = np < 1000;
    return rep;
}

}  // namespace hawkes_greeks

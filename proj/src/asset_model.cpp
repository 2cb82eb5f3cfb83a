#include "hawkes_greeks/asset_model.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hawkes_greeks/csv.hpp"

namespace hawkes_greeks {

namespace {

// int_0^d e^{c r} dr
double exp_integral(double c, double d) {
    if (c == 0.0) return d;
    return std::expm1(c * d) / c;
}

template <class F>
double gk(F f, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

JumpFunction::JumpFunction(Kind kind, double gamma, std::function<double(double)> fn,
                           std::string name)
    : kind_(kind), gamma_(gamma), fn_(std::move(fn)), name_(std::move(name)) {}

JumpFunction JumpFunction::linear(double gamma) {
    if (!std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite");
    if (gamma == 0.0) return zero();
    return JumpFunction(Kind::linear, gamma, {}, "linear");
}

JumpFunction JumpFunction::zero() { return JumpFunction(Kind::zero, 0.0, {}, "zero"); }

JumpFunction JumpFunction::custom(std::function<double(double)> fn, std::string name) {
    if (!fn) throw std::invalid_argument("custom jump function is empty");
    return JumpFunction(Kind::custom, 0.0, std::move(fn), std::move(name));
}

double JumpFunction::operator()(double s) const {
    switch (kind_) {
        case Kind::linear: return gamma_ * s;
        case Kind::zero: return 0.0;
        case Kind::custom: return fn_(s);
    }
    return 0.0;
}

double JumpFunction::expm1_integral(double a, double b) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::linear: {
            const double g = gamma_, d = b - a;
            const double e = std::expm1(g * d);
            return (std::expm1(g * a) * e + (e - g * d)) / g;
        }
        case Kind::custom: return gk([this](double s) { return std::expm1(fn_(s)); }, a, b);
    }
    return 0.0;
}

double JumpFunction::decay_integral(double a, double b, double beta) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::linear: {
            const double d = b - a;
            return std::exp(gamma_ * a) * exp_integral(gamma_ - beta, d) - exp_integral(-beta, d);
        }
        case Kind::custom:
            return gk([this, a, beta](double s) { return std::expm1(fn_(s)) * std::exp(-beta * (s - a)); },
                      a, b);
    }
    return 0.0;
}

void JumpFunction::check_h1(double horizon) const {
    if (kind_ == Kind::zero) return;
    if (kind_ == Kind::linear) {
        if (!(gamma_ > 0.0)) throw std::invalid_argument("jump function must be increasing (gamma > 0)");
        return;
    }
    if (std::abs(fn_(0.0)) > 1e-14) throw std::invalid_argument("jump function must vanish at 0");
    constexpr int kProbe = 1000;
    double prev = fn_(0.0);
    for (int i = 1; i <= kProbe; ++i) {
        const double v = fn_(horizon * i / kProbe);
        if (!std::isfinite(v) || !(v > prev))
            throw std::invalid_argument("jump function must be strictly increasing on [0, T]");
        prev = v;
    }
}

ModelParams::ModelParams(double mu, double sigma, double s0, double horizon, JumpFunction jump)
    : mu_(mu), sigma_(sigma), s0_(s0), horizon_(horizon), jump_(std::move(jump)) {
    if (!std::isfinite(mu)) throw std::invalid_argument("mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
    if (!(s0 > 0.0) || !std::isfinite(s0)) throw std::invalid_argument("s0 must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("horizon must be positive");
    jump_.check_h1(horizon);
}

PathSimulator::PathSimulator(ModelParams model, HawkesParams hawkes, TimeGrid grid)
    : model_(std::move(model)), hawkes_(hawkes), grid_(grid) {
    if (std::abs(grid_.horizon() - model_.horizon()) > 1e-12 * model_.horizon())
        throw std::invalid_argument("grid horizon differs from model horizon");
    cell_i1_.resize(grid_.cells());
    cell_i2_.resize(grid_.cells());
    for (int k = 0; k < grid_.cells(); ++k) {
        cell_i1_[k] = model_.jump().expm1_integral(grid_.time(k), grid_.time(k + 1));
        cell_i2_[k] = model_.jump().decay_integral(grid_.time(k), grid_.time(k + 1), hawkes_.beta());
    }
    cell_decay_ = std::exp(-hawkes_.beta() * grid_.step());
}

namespace {

struct NodeSpec {
    double t;
    int grid_index;
    bool jump;
    double w;
    bool w_known;
};

}  // namespace

PathRealization PathSimulator::simulate(const BaseConfiguration& base, const HawkesRealization& real,
                                        std::span<const double> extra_nodes) const {
    if (base.grid().cells() % grid_.cells() != 0 ||
        std::abs(base.horizon() - grid_.horizon()) > 1e-12 * grid_.horizon())
        throw std::invalid_argument("base grid is not a refinement of the simulation grid");
    if (real.overflow()) throw StripOverflow("thinning overflowed the strip");

    const int n = grid_.cells();
    const int ratio = base.grid().cells() / n;
    std::vector<NodeSpec> specs;
    specs.reserve(n + 1 + real.count() + extra_nodes.size());
    for (int k = 0; k <= n; ++k) specs.push_back({grid_.time(k), k, false, base.w_grid()[k * ratio], true});
    for (const auto& j : real.jumps()) specs.push_back({j.t, -1, true, j.w, true});
    for (double t : extra_nodes) {
        if (!(t >= 0.0 && t <= grid_.horizon())) throw std::out_of_range("extra node outside [0, T]");
        if (const int k = grid_.node_index(t); k >= 0) t = grid_.time(k);
        specs.push_back({t, -1, false, 0.0, false});
    }
    std::stable_sort(specs.begin(), specs.end(),
                     [](const NodeSpec& a, const NodeSpec& b) { return a.t < b.t; });
    // merge coincident times; grid index and jump flag survive the merge
    std::vector<NodeSpec> merged;
    merged.reserve(specs.size());
    for (const auto& s : specs) {
        if (!merged.empty() && s.t == merged.back().t) {
            auto& m = merged.back();
            m.jump = m.jump || s.jump;
            if (m.grid_index < 0) m.grid_index = s.grid_index;
            if (!m.w_known && s.w_known) {
                m.w = s.w;
                m.w_known = true;
            }
            continue;
        }
        merged.push_back(s);
    }

    const auto& J = model_.jump();
    const double l0 = hawkes_.lambda0();
    const double beta = hawkes_.beta();
    const double sigma = model_.sigma();
    const double drift = model_.drift();

    PathRealization out{grid_, {}, {}, {}, {}, {}, model_.s0()};
    out.x.resize(n + 1);
    out.s.resize(n + 1);
    out.nodes.reserve(merged.size());

    double comp = 0.0, excess = 0.0, jumpsum = 0.0;
    double prev_t = 0.0;
    int prev_grid = 0;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        auto& m = merged[i];
        if (i > 0) {
            const double d = m.t - prev_t;
            if (prev_grid >= 0 && m.grid_index == prev_grid + 1) {
                comp += l0 * cell_i1_[prev_grid] + excess * cell_i2_[prev_grid];
                excess *= cell_decay_;
            } else {
                comp += l0 * J.expm1_integral(prev_t, m.t) + excess * J.decay_integral(prev_t, m.t, beta);
                excess *= std::exp(-beta * d);
            }
        }
        if (!m.w_known) m.w = base.brownian_at(m.t);
        PathNode node;
        node.t = m.t;
        node.grid_index = m.grid_index;
        node.jump = m.jump;
        node.lambda_left = l0 + excess;
        node.x_left = drift * m.t + sigma * m.w - comp + jumpsum;
        node.x_right = node.x_left;
        if (m.jump) {
            const double jt = J(m.t);
            jumpsum += jt;
            excess += hawkes_.alpha();
            node.x_right += jt;
            out.jump_times.push_back(m.t);
            out.jump_relative_sizes.push_back(std::expm1(jt));
        }
        node.lambda_right = l0 + excess;
        if (m.grid_index >= 0) {
            out.x[m.grid_index] = node.x_right;
            out.s[m.grid_index] = model_.s0() * std::exp(node.x_right);
        }
        out.nodes.push_back(node);
        prev_t = m.t;
        prev_grid = m.grid_index;
    }

    out.x_T = out.x[n];
    out.s_T = out.s[n];
    out.w_T = base.w_grid().back();
    double ito = 0.0;
    for (int k = 0; k < n; ++k) ito += out.s[k] * (base.w_grid()[(k + 1) * ratio] - base.w_grid()[k * ratio]);
    out.ito_s_dw = ito;
    out.asian = asian_average(out);
    return out;
}

PathRealization simulate_path(const ModelParams& model, const HawkesParams& params,
                              const BaseConfiguration& base) {
    const auto real = thin(base, params);
    return PathSimulator(model, params, base.grid()).simulate(base, real);
}

double terminal_log_price(const ModelParams& model, const HawkesParams& params, double w_T,
                          const HawkesRealization& real) {
    const double T = model.horizon();
    const auto& J = model.jump();
    double x = model.drift() * T + model.sigma() * w_T - params.lambda0() * J.expm1_integral(0.0, T);
    for (const auto& j : real.jumps())
        x += J(j.t) - params.alpha() * J.decay_integral(j.t, T, params.beta());
    return x;
}

double asian_average(std::span<const PathNode> nodes, double s0, double horizon) {
    double sum = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const auto& a = nodes[i - 1];
        const auto& b = nodes[i];
        sum += 0.5 * (std::exp(a.x_right) + std::exp(b.x_left)) * (b.t - a.t);
    }
    return s0 * sum / horizon;
}

double asian_average(const PathRealization& path) {
    return asian_average(path.nodes, path.s0, path.grid.horizon());
}

DiscretizedPath discretize(const ModelParams& model, const HawkesParams& params,
                           const BaseConfiguration& base, int n) {
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
    const TimeGrid grid(base.horizon(), n);
    const double dt = grid.step();
    const double l0 = params.lambda0(), a = params.alpha(), b = params.beta();
    const auto& J = model.jump();
    DiscretizedPath out{grid, std::vector<double>(n + 1), std::vector<double>(n + 1),
                        std::vector<double>(n + 1)};
    out.lambda_n[0] = l0;
    out.x_n[0] = 0.0;
    const auto cands = base.candidates();
    std::size_t c = 0;
    double comp = 0.0, jumpsum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t0 = grid.time(i), t1 = grid.time(i + 1);
        const double lam_i = out.lambda_n[i];
        if (lam_i + a > base.strip_height()) out.overflow = true;
        const double slope = b * (l0 - lam_i);
        const double jn = J(t0);
        int counted = 0;
        double tail = 0.0;  // sum over counted points of (t1 - p)
        while (c < cands.size() && cands[c].t <= t1) {
            const auto& p = cands[c++];
            // lambda^n(p-) inside the cell
            const double lam_p = lam_i + slope * (p.t - t0) + a * counted;
            if (p.z <= lam_p) jumpsum += jn;
            if (p.z <= lam_i) {
                ++counted;
                tail += t1 - p.t;
            }
        }
        const double lam_integral = lam_i * dt + 0.5 * slope * dt * dt + a * tail;
        comp += std::expm1(jn) * lam_integral;
        out.lambda_n[i + 1] = lam_i + slope * dt + a * counted;
        out.x_n[i + 1] = model.drift() * t1 + model.sigma() * base.brownian_at(t1) - comp + jumpsum;
    }
    for (int i = 0; i <= n; ++i) out.s_n[i] = model.s0() * std::exp(out.x_n[i]);
    return out;
}

OptionKind parse_option_kind(const std::string& text) {
    if (text == "european") return OptionKind::european;
    if (text == "asian") return OptionKind::asian;
    throw std::invalid_argument("unknown option kind '" + text + "' (expected european or asian)");
}

std::string to_string(OptionKind kind) { return kind == OptionKind::european ? "european" : "asian"; }

double payoff(OptionKind, double terminal, double strike) {
    if (!(strike >= 0.0)) throw std::invalid_argument("strike must be non-negative");
    return std::max(terminal - strike, 0.0);
}

void write_path_csv(std::ostream& out, const PathRealization& path) {
    out << "t,lambda,X,S\n";
    for (const auto& node : path.nodes) {
        if (node.jump)
            write_csv_row(out, {format_double(node.t), format_double(node.lambda_left),
                                format_double(node.x_left), format_double(path.s0 * std::exp(node.x_left))});
        write_csv_row(out, {format_double(node.t), format_double(node.lambda_right),
                            format_double(node.x_right), format_double(path.s0 * std::exp(node.x_right))});
    }
}

}  // namespace hawkes_greeks

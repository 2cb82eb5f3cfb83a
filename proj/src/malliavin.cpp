#include "hawkes_greeks/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "hawkes_greeks/csv.hpp"

namespace hawkes_greeks {

double eval_F(const ModelParams& model, const HawkesParams& params, double v, double horizon) {
    if (v < 0.0 || v > horizon) throw std::out_of_range("F evaluated outside [0, T]");
    const auto& J = model.jump();
    return J(v) - params.alpha() * J.decay_integral(v, horizon, params.beta());
}

double eval_G(const ModelParams& model, const HawkesParams& params, double v, double horizon) {
    if (v < 0.0 || v > horizon) throw std::out_of_range("G evaluated outside [0, T]");
    const auto& J = model.jump();
    return std::expm1(J(v)) - params.beta() * J.expm1_integral(v, horizon);
}

namespace {

template <class Fn>
double bisect(Fn f, double lo, double hi) {
    // f(lo) <= 0 < f(hi)
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double find_v0(const ModelParams& model, const HawkesParams& params, double horizon) {
    if (model.jump().is_zero()) return 0.0;
    auto g = [&](double v) { return eval_G(model, params, v, horizon); };
    if (g(0.0) > 0.0) return 0.0;
    return bisect(g, 0.0, horizon);
}

double find_v1(const ModelParams& model, const HawkesParams& params, double horizon) {
    if (model.jump().is_zero() || params.alpha() == 0.0) return 0.0;
    auto f = [&](double v) { return eval_F(model, params, v, horizon); };
    if (!(f(horizon) > 0.0)) throw NumericalDegeneracy("F is never positive; jump weights undefined");
    // F increases on [v0, T]; a negative value there brackets the unique crossing
    const double v0 = find_v0(model, params, horizon);
    if (f(v0) <= 0.0) return bisect(f, v0, horizon);
    // otherwise the last crossing lies below v0: scan back from v0
    constexpr int kScan = 4096;
    double hi = v0;
    for (int i = kScan - 1; i >= 0; --i) {
        const double lo = v0 * i / kScan;
        if (f(lo) <= 0.0) return bisect(f, lo, hi);
        hi = lo;
    }
    return 0.0;
}

double weight_threshold(const ModelParams& model, const HawkesParams& params, double horizon) {
    return std::max(find_v0(model, params, horizon), find_v1(model, params, horizon));
}

Configuration make_configuration(const BaseConfiguration& base, const HawkesParams& params) {
    std::vector<Candidate> c(base.candidates().begin(), base.candidates().end());
    auto real = thin(c, params, base.horizon(), base.strip_height());
    return Configuration{std::move(c), std::move(real), base.strip_height()};
}

Configuration with_candidate(const Configuration& cfg, const HawkesParams& params, Candidate c) {
    if (!(c.t >= 0.0 && c.t < cfg.realization.horizon()))
        throw std::out_of_range("added point outside [0, T)");
    std::vector<Candidate> next;
    next.reserve(cfg.candidates.size() + 1);
    bool placed = false;
    for (const auto& x : cfg.candidates) {
        if (x.t == c.t) throw std::invalid_argument("duplicate candidate time");
        if (!placed && c.t < x.t) {
            next.push_back(c);
            placed = true;
        }
        next.push_back(x);
    }
    if (!placed) next.push_back(c);
    auto real = thin(next, params, cfg.realization.horizon(), cfg.strip_height);
    return Configuration{std::move(next), std::move(real), cfg.strip_height};
}

Configuration with_added_point(const Configuration& cfg, const BaseConfiguration& base,
                               const HawkesParams& params, double t) {
    const double z = 0.5 * cfg.realization.intensity_at(t);
    return with_candidate(cfg, params, Candidate{t, z, base.brownian_at(t), kAddedPointId});
}

Configuration without_point(const Configuration& cfg, const HawkesParams& params, std::uint32_t id) {
    std::vector<Candidate> next;
    next.reserve(cfg.candidates.size());
    bool found = false;
    for (const auto& x : cfg.candidates) {
        if (x.id == id)
            found = true;
        else
            next.push_back(x);
    }
    if (!found) throw std::out_of_range("point to remove is not in the configuration");
    auto real = thin(next, params, cfg.realization.horizon(), cfg.strip_height);
    return Configuration{std::move(next), std::move(real), cfg.strip_height};
}

std::vector<Flip> acceptance_flips(const HawkesRealization& from, const HawkesRealization& to) {
    std::vector<Flip> out;
    for (const auto& j : to.jumps())
        if (!from.accepted(j.id)) out.push_back({j.t, j.id, +1});
    for (const auto& j : from.jumps())
        if (!to.accepted(j.id)) out.push_back({j.t, j.id, -1});
    std::sort(out.begin(), out.end(), [](const Flip& a, const Flip& b) { return a.t < b.t; });
    return out;
}

double closed_form_dx(const ModelParams& model, const HawkesParams& params, std::span<const Flip> flips,
                      double u) {
    const auto& J = model.jump();
    double dx = 0.0;
    for (const auto& f : flips) {
        if (f.t > u) break;
        dx += f.sign * (J(f.t) - params.alpha() * J.decay_integral(f.t, u, params.beta()));
    }
    return dx;
}

namespace {

std::vector<double> times_of(std::span<const Jump> jumps) {
    std::vector<double> t;
    t.reserve(jumps.size());
    for (const auto& j : jumps) t.push_back(j.t);
    return t;
}

PerturbationDiff make_diff(PerturbationKind kind, double t, std::uint32_t id,
                           const BaseConfiguration& base, const HawkesRealization& real,
                           Configuration pert, const ModelParams& model, const HawkesParams& params) {
    if (pert.realization.overflow()) throw StripOverflow("perturbation overflowed the strip");
    const auto& grid = base.grid();
    const int n = grid.cells();
    const PathSimulator sim(model, params, grid);
    const auto p0 = sim.simulate(base, real, times_of(pert.realization.jumps()));
    const auto p1 = sim.simulate(base, pert.realization, times_of(real.jumps()));

    std::vector<Flip> cascade;
    const auto flips = acceptance_flips(real, pert.realization);
    for (const auto& f : flips)
        if (f.id != id) cascade.push_back(f);
    std::vector<double> dl(n + 1), dx(n + 1), dxr(n + 1), ds(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double u = grid.time(k);
        dl[k] = pert.realization.intensity_at(u) - real.intensity_at(u);
        dx[k] = closed_form_dx(model, params, flips, u);
        dxr[k] = p1.x[k] - p0.x[k];
        ds[k] = p0.s[k] * std::expm1(dx[k]);
    }
    const double dxT = dx[n], dxrT = dxr[n];
    return PerturbationDiff{kind,          t,    id,   std::move(cascade), std::move(dl), std::move(dx),
                            std::move(dxr), std::move(ds), dxT, dxrT, p1.asian - p0.asian, std::move(pert)};
}

Configuration configuration_of(const BaseConfiguration& base, const HawkesRealization& real) {
    return Configuration{std::vector<Candidate>(base.candidates().begin(), base.candidates().end()), real,
                         base.strip_height()};
}

}  // namespace

PerturbationDiff add_point_diff(const BaseConfiguration& base, const HawkesRealization& real,
                                const ModelParams& model, const HawkesParams& params, double t) {
    auto pert = with_added_point(configuration_of(base, real), base, params, t);
    return make_diff(PerturbationKind::add, t, kAddedPointId, base, real, std::move(pert), model, params);
}

PerturbationDiff remove_point_diff(const BaseConfiguration& base, const HawkesRealization& real,
                                   const ModelParams& model, const HawkesParams& params,
                                   std::uint32_t id) {
    if (!real.accepted(id)) throw std::invalid_argument("point to remove is not an accepted jump");
    auto pert = without_point(configuration_of(base, real), params, id);
    const double t = base.candidate(id).t;
    return make_diff(PerturbationKind::remove, t, id, base, real, std::move(pert), model, params);
}

const char* to_string(Region r) {
    switch (r) {
        case Region::positive_branch: return "B";
        case Region::negative_branch: return "Bc";
        case Region::excluded: return "excluded";
    }
    return "?";
}

PerturbationContext::PerturbationContext(ModelParams model, HawkesParams hawkes, TimeGrid grid,
                                         double node_offset)
    : model_(std::move(model)), hawkes_(hawkes), grid_(grid), sim_(model_, hawkes_, grid_), offset_(node_offset) {
    if (!(node_offset >= 0.0 && node_offset < 1.0))
        throw std::invalid_argument("weight node offset must lie in [0, 1)");
}

PerturbationProfile PerturbationContext::profile(OptionKind kind, const BaseConfiguration& base,
                                                 const Configuration& cfg, double skip_at_or_below) const {
    const int n = grid_.cells();
    const double T = grid_.horizon();
    PerturbationProfile p;
    p.cell_mass = cfg.realization.cell_masses(grid_);
    p.node_time.resize(n);
    p.diff.resize(n);
    std::optional<PathRealization> path0;
    if (kind == OptionKind::european) {
        p.terminal = model_.s0() * std::exp(terminal_log_price(model_, hawkes_, base.w_grid().back(),
                                                               cfg.realization));
    } else {
        path0 = sim_.simulate(base, cfg.realization);
        p.terminal = path0->asian;
    }
    for (int k = 0; k < n; ++k) p.node_time[k] = node_time(k);
    if (p.terminal <= skip_at_or_below) return p;
    std::vector<double> extra0, extra1;
    for (int k = 0; k < n; ++k) {
        const double tau = p.node_time[k];
        const auto pert = with_added_point(cfg, base, hawkes_, tau);
        if (pert.realization.overflow()) throw StripOverflow("perturbation overflowed the strip");
        const auto flips = acceptance_flips(cfg.realization, pert.realization);
        if (kind == OptionKind::european) {
            p.diff[k] = closed_form_dx(model_, hawkes_, flips, T);
            continue;
        }
        // common node set for both paths so the quadrature error cancels
        extra0.clear();
        extra1.clear();
        for (const auto& f : flips) (f.sign > 0 ? extra0 : extra1).push_back(f.t);
        const double y0 = extra0.empty() ? path0->asian : sim_.simulate(base, cfg.realization, extra0).asian;
        const double y1 = sim_.simulate(base, pert.realization, extra1).asian;
        p.diff[k] = y1 - y0;
    }
    return p;
}

WeightField build_weight(const PerturbationProfile& profile, OptionKind kind, double strike, double v1,
                         double s0, BranchPolicy policy) {
    if (!(strike >= 0.0)) throw std::invalid_argument("strike must be non-negative");
    const std::size_t n = profile.node_time.size();
    const double x = profile.terminal;
    WeightField w;
    w.v1 = v1;
    w.node_time = profile.node_time;
    w.diff = profile.diff;
    w.u.assign(n, 0.0);
    w.region.assign(n, Region::excluded);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = profile.diff[k];
        const bool after = kind == OptionKind::european ? x * std::exp(d) > strike : x + d > strike;
        const double tau = profile.node_time[k];
        if (tau >= v1 && after)
            w.region[k] = Region::positive_branch;
        else if (tau <= v1 && !after)
            w.region[k] = Region::negative_branch;
        w.total_mass += profile.cell_mass[k];
        if (w.region[k] == Region::positive_branch) w.mass_positive += profile.cell_mass[k];
        if (w.region[k] == Region::negative_branch) w.mass_negative += profile.cell_mass[k];
    }
    if (!(x > strike)) return w;  // H_K = 0

    const bool whole = policy == BranchPolicy::renormalize && w.mass_negative == 0.0;
    double scale;
    if (kind == OptionKind::european)
        scale = whole ? 1.0 : 0.5 * (1.0 + strike / x);
    else
        scale = whole ? x : 0.5 * (strike + x);
    for (std::size_t k = 0; k < n; ++k) {
        if (w.region[k] == Region::positive_branch) {
            const double den = kind == OptionKind::european ? std::expm1(profile.diff[k]) : profile.diff[k];
            if (den == 0.0 || !std::isfinite(den))
                throw NumericalDegeneracy("degenerate jump model: perturbation leaves the payoff unchanged");
            w.u[k] = scale / (s0 * w.mass_positive * den);
        } else if (w.region[k] == Region::negative_branch) {
            w.u[k] = -1.0 / (2.0 * s0 * w.mass_negative);
        }
    }
    return w;
}

WeightField build_weight_european(const PerturbationProfile& profile, double strike, double v1, double s0,
                                  BranchPolicy policy) {
    return build_weight(profile, OptionKind::european, strike, v1, s0, policy);
}

WeightField build_weight_asian(const PerturbationProfile& profile, double strike, double v1, double s0,
                               BranchPolicy policy) {
    return build_weight(profile, OptionKind::asian, strike, v1, s0, policy);
}

double skorokhod_N(const Configuration& cfg, const TimeGrid& grid, const WeightProvider& weight) {
    const auto& params = cfg.realization.params();
    const auto u0 = weight(cfg);
    if (u0.size() != static_cast<std::size_t>(grid.cells()))
        throw std::invalid_argument("weight size does not match the grid");
    double sum = 0.0;
    for (const auto& j : cfg.realization.jumps()) {
        const auto ui = weight(without_point(cfg, params, j.id));
        sum += ui[grid.cell_of(j.t)];
    }
    const auto mass = cfg.realization.cell_masses(grid);
    for (std::size_t k = 0; k < mass.size(); ++k) sum -= u0[k] * mass[k];
    return sum;
}

void write_weight_csv(std::ostream& out, const WeightField& field) {
    out << "t,region,u,DX_T\n";
    for (std::size_t k = 0; k < field.u.size(); ++k)
        write_csv_row(out, {format_double(field.node_time[k]), to_string(field.region[k]),
                            format_double(field.u[k]), format_double(field.diff[k])});
}

}  // namespace hawkes_greeks

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hawkes_greeks/config.hpp"
#include "hawkes_greeks/convergence.hpp"
#include "hawkes_greeks/csv.hpp"
#include "hawkes_greeks/estimators.hpp"
#include "hawkes_greeks/malliavin.hpp"

namespace fs = std::filesystem;
using namespace hawkes_greeks;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kDegenerate = 3, kGate = 4 };

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

void write_series(const fs::path& dir, const std::vector<DeltaEstimate>& rows, const std::string& prefix) {
    std::map<std::string, std::ofstream> files;
    for (const auto& r : rows) {
        const auto name = prefix + lower(to_string(r.method)) + ".csv";
        auto it = files.find(name);
        if (it == files.end()) {
            it = files.emplace(name, open_out(dir, name)).first;
            it->second << "K,value\n";
        }
        write_csv_row(it->second, {format_double(r.strike), format_double(r.value)});
    }
}

void write_timing(const fs::path& dir, const std::vector<DeltaEstimate>& rows) {
    auto out = open_out(dir, "timing.csv");
    out << "method,wallclock\n";
    std::string last;
    for (const auto& r : rows) {
        if (to_string(r.method) == last) continue;
        last = to_string(r.method);
        write_csv_row(out, {last, format_double(r.wallclock)});
    }
}

int run_price(const RunConfig& rc) {
    const auto strikes = rc.strike_list(false);
    const auto rows = GreeksEngine(rc.model(), rc.hawkes(), rc.mc).prices(strikes);
    const fs::path dir = rc.output_dir;
    auto out = open_out(dir, "prices.csv");
    out << "kind,K,value,stderr,n_paths\n";
    for (const auto& r : rows) {
        write_csv_row(out, {to_string(r.kind), format_double(r.strike), format_double(r.value),
                            format_double(r.stderr_), std::to_string(r.n_paths)});
        std::printf("%-8s K=%-8g price=%.6f  se=%.6f\n", to_string(r.kind).c_str(), r.strike, r.value, r.stderr_);
    }
    return kOk;
}

int run_delta(const RunConfig& rc) {
    const auto strikes = rc.strike_list(false);
    const auto rows = GreeksEngine(rc.model(), rc.hawkes(), rc.mc).deltas(strikes, rc.methods);
    const fs::path dir = rc.output_dir;
    auto out = open_out(dir, "results.csv");
    out << "method,kind,K,value,stderr,n_paths\n";
    for (const auto& r : rows) {
        write_csv_row(out, {to_string(r.method), to_string(r.kind), format_double(r.strike),
                            format_double(r.value), format_double(r.stderr_), std::to_string(r.n_paths)});
        std::printf("%-5s K=%-8g delta=%.6f  se=%.6f  (%.2fs)\n", to_string(r.method).c_str(), r.strike, r.value,
                    r.stderr_, r.wallclock);
    }
    write_timing(dir, rows);
    write_series(dir, rows, "delta_");
    return kOk;
}

int run_table(const RunConfig& rc) {
    const auto strikes = rc.strike_list(true);
    const auto t = mse_table(rc.model(), rc.hawkes(), strikes, rc.methods, rc.mc);
    const fs::path dir = rc.output_dir;
    auto out = open_out(dir, "mse_table.csv");
    out << "method,kind,mse,n_strikes,n_paths\n";
    for (const auto& r : t.rows) {
        write_csv_row(out, {to_string(r.method), to_string(r.kind), format_double(r.mse),
                            std::to_string(r.n_strikes), std::to_string(r.n_paths)});
        std::printf("%-5s %-8s MSE=%.6g\n", to_string(r.method).c_str(), to_string(r.kind).c_str(), r.mse);
    }
    auto curves = open_out(dir, "curves.csv");
    curves << "method,kind,K,value,stderr,n_paths,reference\n";
    for (std::size_t i = 0; i < t.curves.size(); ++i) {
        const auto& r = t.curves[i];
        const auto& ref = t.reference[i % t.reference.size()];
        write_csv_row(curves, {to_string(r.method), to_string(r.kind), format_double(r.strike),
                               format_double(r.value), format_double(r.stderr_), std::to_string(r.n_paths),
                               format_double(ref.value)});
    }
    write_series(dir, t.curves, "curve_");
    write_series(dir, t.reference, "reference_");
    if (!t.curves.empty()) write_timing(dir, t.curves);
    return kOk;
}

int run_convergence_cmd(const RunConfig& rc) {
    const auto rep = run_convergence(rc.model(), rc.hawkes(), rc.convergence);
    if (rep.few_paths) std::fprintf(stderr, "warning: fewer than 1000 paths, slopes may be unstable\n");
    const fs::path dir = rc.output_dir;
    auto out = open_out(dir, "convergence.csv");
    out << "n,mse_lambda,stderr_lambda,mse_x,stderr_x\n";
    for (const auto& r : rep.rows) {
        write_csv_row(out, {std::to_string(r.n), format_double(r.mse_lambda), format_double(r.stderr_lambda),
                            format_double(r.mse_x), format_double(r.stderr_x)});
        std::printf("n=%-5d E|dlambda|^2=%.4e  E|dX|^2=%.4e\n", r.n, r.mse_lambda, r.mse_x);
    }
    auto slopes = open_out(dir, "slopes.csv");
    slopes << "quantity,slope,gate,passed\n";
    write_csv_row(slopes, {"lambda", format_double(rep.slope_lambda), format_double(rc.convergence.lambda_gate),
                           rep.slope_lambda <= rc.convergence.lambda_gate ? "true" : "false"});
    write_csv_row(slopes, {"X", format_double(rep.slope_x), format_double(rc.convergence.x_gate),
                           rep.slope_x <= rc.convergence.x_gate ? "true" : "false"});
    std::printf("slope lambda=%.3f (gate %.2f)  slope X=%.3f (gate %.2f)  %s\n", rep.slope_lambda,
                rc.convergence.lambda_gate, rep.slope_x, rc.convergence.x_gate, rep.passed ? "PASS" : "FAIL");
    return rep.passed ? kOk : kGate;
}

int run_dump_path(const RunConfig& rc, std::uint64_t index, bool weights) {
    const auto model = rc.model();
    const auto hawkes = rc.hawkes();
    const auto base = realize_base(hawkes, model.horizon(), StreamId{rc.mc.seed, index}, rc.mc.grid_n,
                                   rc.mc.max_doublings);
    const auto cfg = make_configuration(base, hawkes);
    const PerturbationContext ctx(model, hawkes, base.grid(), rc.mc.weight_node_offset);
    const auto path = ctx.simulator().simulate(base, cfg.realization);
    const fs::path dir = rc.output_dir;
    auto out = open_out(dir, "path.csv");
    write_path_csv(out, path);
    std::printf("path %llu: %zu jumps, S_T=%.6f, Y_T=%.6f\n", static_cast<unsigned long long>(index),
                cfg.realization.count(), path.s_T, path.asian);
    if (weights) {
        if (model.jump().is_zero()) throw NumericalDegeneracy("degenerate jump model: no Poisson weight");
        const double v = weight_threshold(model, hawkes, model.horizon());
        const auto prof = ctx.profile(rc.mc.kind, base, cfg);
        const auto field = build_weight(prof, rc.mc.kind, rc.mc.strike, v, model.s0(), rc.mc.branch_policy);
        auto w = open_out(dir, "weights.csv");
        write_weight_csv(w, field);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo prices and delta estimators for a Hawkes jump-diffusion"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_file;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> sets;
    auto flag = [&](const char* name, const char* key, const char* help) {
        app.add_option_function<std::string>(name, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                             help);
    };
    app.add_option("--config", config_file, "key=value config file");
    flag("--seed", "seed", "global RNG seed");
    flag("--paths", "paths", "Monte Carlo paths");
    flag("--grid", "grid", "time steps on [0, T]");
    flag("--strike", "strike", "strike K");
    flag("--kind", "kind", "european or asian");
    flag("--out", "output_dir", "output directory");
    flag("--workers", "workers", "worker threads (results do not depend on it)");
    app.add_option("--set", sets, "extra key=value override, repeatable");

    auto* price = app.add_subcommand("price", "option prices");
    auto* delta = app.add_subcommand("delta", "delta estimates");
    std::string method = "all";
    delta->add_option("--method", method, "exact|wm|pm|wp|fd|all");
    auto* conv = app.add_subcommand("convergence", "strong convergence of the discretized scheme");
    auto* table = app.add_subcommand("table", "MSE table over the strike grid");
    auto* dump = app.add_subcommand("dump-path", "write one path (and optionally its weight field)");
    std::uint64_t path_index = 0;
    bool weights = false;
    dump->add_option("--path-index", path_index, "path index within the seed's stream");
    dump->add_flag("--weights", weights, "also write the Poisson weight field at --strike");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
            overrides[s.substr(0, eq)] = s.substr(eq + 1);
        }
        if (delta->parsed()) overrides["methods"] = method;
        if (conv->parsed() && overrides.count("paths")) {
            overrides["convergence_paths"] = overrides["paths"];
            overrides.erase("paths");
        }
        std::optional<fs::path> file;
        if (config_file) file = *config_file;
        const auto rc = load_config(file, overrides);

        if (price->parsed()) return run_price(rc);
        if (delta->parsed()) return run_delta(rc);
        if (conv->parsed()) return run_convergence_cmd(rc);
        if (table->parsed()) return run_table(rc);
        if (dump->parsed()) return run_dump_path(rc, path_index, weights);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const NumericalDegeneracy& e) {
        std::fprintf(stderr, "numerical degeneracy: %s\n", e.what());
        return kDegenerate;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
    return kFailure;
}

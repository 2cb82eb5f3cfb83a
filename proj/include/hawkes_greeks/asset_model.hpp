#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hawkes_greeks/hawkes.hpp"

namespace hawkes_greeks {

/// Deterministic log-jump size J_s as a function of time.
class JumpFunction {
public:
    static JumpFunction linear(double gamma);
    static JumpFunction zero();
    static JumpFunction custom(std::function<double(double)> fn, std::string name);

    double operator()(double s) const;
    bool is_zero() const noexcept { return kind_ == Kind::zero; }
    const std::string& name() const noexcept { return name_; }
    double gamma() const noexcept { return gamma_; }

    /// int_a^b (e^{J_s} - 1) ds
    double expm1_integral(double a, double b) const;
    /// int_a^b (e^{J_s} - 1) e^{-beta (s - a)} ds
    double decay_integral(double a, double b, double beta) const;

    /// J_0 = 0, strictly increasing on [0, T]. The zero function is accepted as a degenerate model.
    void check_h1(double horizon) const;

private:
    enum class Kind { linear, zero, custom };
    JumpFunction(Kind kind, double gamma, std::function<double(double)> fn, std::string name);

    Kind kind_;
    double gamma_;
    std::function<double(double)> fn_;
    std::string name_;
};

class ModelParams {
public:
    ModelParams(double mu, double sigma, double s0, double horizon, JumpFunction jump);

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    double s0() const noexcept { return s0_; }
    double horizon() const noexcept { return horizon_; }
    const JumpFunction& jump() const noexcept { return jump_; }
    double drift() const noexcept { return mu_ - 0.5 * sigma_ * sigma_; }

private:
    double mu_;
    double sigma_;
    double s0_;
    double horizon_;
    JumpFunction jump_;
};

struct PathNode {
    double t = 0.0;
    double x_left = 0.0;   // X(t-)
    double x_right = 0.0;  // X(t)
    double lambda_left = 0.0;
    double lambda_right = 0.0;
    int grid_index = -1;
    bool jump = false;
};

struct PathRealization {
    TimeGrid grid;
    std::vector<double> x;   // X(t_k), right-continuous
    std::vector<double> s;   // S(t_k)
    std::vector<PathNode> nodes;  // grid, jump and extra nodes in time order
    std::vector<double> jump_times;
    std::vector<double> jump_relative_sizes;  // e^{J_{T_i}} - 1
    double s0 = 0.0;
    double x_T = 0.0;
    double s_T = 0.0;
    double asian = 0.0;
    double w_T = 0.0;
    double ito_s_dw = 0.0;   // grid Ito sum of S dW
};

/// Exact-path builder with per-cell compensator integrals cached.
class PathSimulator {
public:
    PathSimulator(ModelParams model, HawkesParams hawkes, TimeGrid grid);

    const ModelParams& model() const noexcept { return model_; }
    const HawkesParams& hawkes() const noexcept { return hawkes_; }
    const TimeGrid& grid() const noexcept { return grid_; }

    /// extra_nodes are added to the quadrature node set (they do not change the path).
    PathRealization simulate(const BaseConfiguration& base, const HawkesRealization& real,
                             std::span<const double> extra_nodes = {}) const;

private:
    ModelParams model_;
    HawkesParams hawkes_;
    TimeGrid grid_;
    std::vector<double> cell_i1_;
    std::vector<double> cell_i2_;
    double cell_decay_;
};

PathRealization simulate_path(const ModelParams& model, const HawkesParams& params,
                              const BaseConfiguration& base);

/// X_T from superposition of per-jump kernels; no grid sweep.
double terminal_log_price(const ModelParams& model, const HawkesParams& params, double w_T,
                          const HawkesRealization& real);

/// Trapezoid over the node list, every jump time being a cell boundary.
double asian_average(const PathRealization& path);
double asian_average(std::span<const PathNode> nodes, double s0, double horizon);

struct DiscretizedPath {
    TimeGrid grid;
    std::vector<double> lambda_n;
    std::vector<double> x_n;
    std::vector<double> s_n;
    bool overflow = false;
};

DiscretizedPath discretize(const ModelParams& model, const HawkesParams& params,
                           const BaseConfiguration& base, int n);

enum class OptionKind { european, asian };

OptionKind parse_option_kind(const std::string& text);
std::string to_string(OptionKind kind);

double payoff(OptionKind kind, double terminal, double strike);

/// Columns t, lambda, X, S; a jump emits its left and right limits as two rows.
void write_path_csv(std::ostream& out, const PathRealization& path);

}  // namespace hawkes_greeks

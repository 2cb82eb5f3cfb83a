#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawkes_greeks/asset_model.hpp"
#include "hawkes_greeks/hawkes.hpp"

namespace hawkes_greeks {

/// Weight or estimator cannot be formed (e.g. no jump channel); CLI exit code 3.
class NumericalDegeneracy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// F(v) = J_v - alpha int_v^T e^{-beta (s - v)} (e^{J_s} - 1) ds
double eval_F(const ModelParams& model, const HawkesParams& params, double v, double horizon);
/// G(v) = e^{J_v} - 1 - beta int_v^T (e^{J_s} - 1) ds
double eval_G(const ModelParams& model, const HawkesParams& params, double v, double horizon);

/// Root of G (increasing); 0 if G >= 0 on [0, T].
double find_v0(const ModelParams& model, const HawkesParams& params, double horizon);
/// Smallest v with F > 0 on (v, T]; 0 when F >= 0 everywhere.
double find_v1(const ModelParams& model, const HawkesParams& params, double horizon);
/// Start of the positive weight branch: max(v0, v1).
double weight_threshold(const ModelParams& model, const HawkesParams& params, double horizon);

/// A point configuration sharing the base's Brownian path.
struct Configuration {
    std::vector<Candidate> candidates;
    HawkesRealization realization;
    double strip_height = 0.0;
};

Configuration make_configuration(const BaseConfiguration& base, const HawkesParams& params);
/// Adds (t, lambda(t-)/2) with W(t) taken from the base.
Configuration with_added_point(const Configuration& cfg, const BaseConfiguration& base,
                               const HawkesParams& params, double t);
Configuration with_candidate(const Configuration& cfg, const HawkesParams& params, Candidate c);
Configuration without_point(const Configuration& cfg, const HawkesParams& params, std::uint32_t id);

struct Flip {
    double t = 0.0;
    std::uint32_t id = 0;
    int sign = 0;  // +1 accepted only after the perturbation, -1 only before
};

/// Acceptance changes from `from` to `to`, in time order.
std::vector<Flip> acceptance_flips(const HawkesRealization& from, const HawkesRealization& to);

/// sum over flips p <= u of sign * (J_p - alpha int_p^u e^{-beta(s-p)} (e^{J_s}-1) ds)
double closed_form_dx(const ModelParams& model, const HawkesParams& params, std::span<const Flip> flips,
                      double u);

enum class PerturbationKind { add, remove };

struct PerturbationDiff {
    PerturbationKind kind = PerturbationKind::add;
    double t = 0.0;
    std::uint32_t id = 0;
    std::vector<Flip> cascade;        // flips other than the perturbing point
    std::vector<double> d_lambda;     // lambda' - lambda at grid nodes (left limits)
    std::vector<double> d_x;          // closed form, grid nodes
    std::vector<double> d_x_resim;    // X' - X from two full path simulations
    std::vector<double> d_s;          // S_u (e^{DX_u} - 1)
    double d_x_T = 0.0;
    double d_x_T_resim = 0.0;
    double d_asian = 0.0;
    Configuration perturbed;
};

PerturbationDiff add_point_diff(const BaseConfiguration& base, const HawkesRealization& real,
                                const ModelParams& model, const HawkesParams& params, double t);
PerturbationDiff remove_point_diff(const BaseConfiguration& base, const HawkesRealization& real,
                                   const ModelParams& model, const HawkesParams& params,
                                   std::uint32_t id);

enum class Region : std::uint8_t { positive_branch, negative_branch, excluded };
const char* to_string(Region r);

/// What to do with the positive branch when the negative branch has no mass.
enum class BranchPolicy {
    zero,         // keep the two-branch coefficients; the missing half is dropped
    renormalize,  // positive branch carries the whole pathwise sensitivity
};

/// Per-path data that does not depend on the strike.
struct PerturbationProfile {
    double terminal = 0.0;            // S_T or Y_T
    std::vector<double> node_time;    // tau_k = t_k + theta dt
    std::vector<double> cell_mass;    // int_cell lambda
    std::vector<double> diff;         // DX_T (european) or DY_T (asian) for a point added at tau_k
};

struct WeightField {
    double v1 = 0.0;
    double mass_positive = 0.0;   // b1 / c1
    double mass_negative = 0.0;   // b2 / c2
    double total_mass = 0.0;
    std::vector<double> node_time;
    std::vector<double> u;
    std::vector<Region> region;
    std::vector<double> diff;
};

/// Shared state for building profiles on one model.
class PerturbationContext {
public:
    PerturbationContext(ModelParams model, HawkesParams hawkes, TimeGrid grid, double node_offset = 0.0);

    const ModelParams& model() const noexcept { return model_; }
    const HawkesParams& hawkes() const noexcept { return hawkes_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    const PathSimulator& simulator() const noexcept { return sim_; }
    double node_offset() const noexcept { return offset_; }
    double node_time(int k) const noexcept { return grid_.time(k) + offset_ * grid_.step(); }

    /// Perturbed differences are skipped (left 0) when the terminal value is at or below
    /// `skip_at_or_below`, since every weight then vanishes.
    PerturbationProfile profile(OptionKind kind, const BaseConfiguration& base, const Configuration& cfg,
                                double skip_at_or_below = -1.0) const;

private:
    ModelParams model_;
    HawkesParams hawkes_;
    TimeGrid grid_;
    PathSimulator sim_;
    double offset_;
};

WeightField build_weight(const PerturbationProfile& profile, OptionKind kind, double strike, double v1,
                         double s0, BranchPolicy policy = BranchPolicy::renormalize);
WeightField build_weight_european(const PerturbationProfile& profile, double strike, double v1, double s0,
                                  BranchPolicy policy = BranchPolicy::renormalize);
WeightField build_weight_asian(const PerturbationProfile& profile, double strike, double v1, double s0,
                               BranchPolicy policy = BranchPolicy::renormalize);

/// Piecewise-constant weight per grid cell, as a function of the configuration.
using WeightProvider = std::function<std::vector<double>(const Configuration&)>;

/// delta(u) = sum_i u(cell(T_i); omega \ i) - sum_k u_k(omega) int_cell_k lambda.
double skorokhod_N(const Configuration& cfg, const TimeGrid& grid, const WeightProvider& weight);

/// Columns t, region, u, DX_T.
void write_weight_csv(std::ostream& out, const WeightField& field);

}  // namespace hawkes_greeks

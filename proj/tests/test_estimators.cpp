#include <gtest/gtest.h>

#include <cmath>

#include "hawkes_greeks/estimators.hpp"
#include "oracles.hpp"

using namespace hawkes_greeks;

namespace {
const HawkesParams kHawkes(1.0, 0.3, 0.8);
const ModelParams kModel(0.05, 0.10, 5.0, 1.0, JumpFunction::linear(0.2));

McConfig small(std::size_t paths, OptionKind kind = OptionKind::european) {
    McConfig c;
    c.n_paths = paths;
    c.kind = kind;
    c.seed = 123;
    return c;
}
}  // namespace

TEST(RunningStats, MatchesTwoPass) {
    RunningStats s;
    const std::vector<double> x{1.0, 4.0, 2.5, -3.0, 7.25};
    for (double v : x) s.add(v);
    double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    double var = 0;
    for (double v : x) var += (v - m) * (v - m);
    var /= x.size() - 1;
    EXPECT_NEAR(s.mean(), m, 1e-15);
    EXPECT_NEAR(s.variance(), var, 1e-13);
    EXPECT_NEAR(s.stderr_(), std::sqrt(var / 5), 1e-14);
}

TEST(McConfig, Validation) {
    McConfig c;
    c.n_paths = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = McConfig{};
    c.fd_bump = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = McConfig{};
    c.strike = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Price, StrikeZeroIsForward) {
    auto c = small(20000);
    c.strike = 0.0;
    const auto p = price(kModel, kHawkes, c);
    EXPECT_NEAR(p.value, 5.0 * std::exp(0.05), 3.0 * p.stderr_);
}

TEST(Price, DeepOutOfTheMoney) {
    auto c = small(10000);
    c.strike = 10.0 * 5.0 * std::exp(0.05);
    const auto p = price(kModel, kHawkes, c);
    EXPECT_LT(p.value, 3.0 * p.stderr_ + 1e-300);
}

TEST(Price, DecreasingInStrike) {
    for (auto kind : {OptionKind::european, OptionKind::asian}) {
        const auto rows = GreeksEngine(kModel, kHawkes, small(2000, kind)).prices(standard_strike_grid(5.0));
        for (std::size_t j = 1; j < rows.size(); ++j) EXPECT_LE(rows[j].value, rows[j - 1].value);
    }
}

TEST(Price, DiscountFlag) {
    auto c = small(500);
    const auto a = price(kModel, kHawkes, c);
    c.discount = true;
    const auto b = price(kModel, kHawkes, c);
    EXPECT_NEAR(b.value, a.value * std::exp(-0.05), 1e-12);
}

TEST(DeltaExact, StrikeZeroAndBounds) {
    auto c = small(20000);
    c.strike = 0.0;
    const auto d = delta_exact(kModel, kHawkes, c);
    EXPECT_NEAR(d.value, std::exp(0.05), 3.0 * d.stderr_);
    c.strike = 1e6;
    EXPECT_EQ(delta_exact(kModel, kHawkes, c).value, 0.0);
    c.strike = 5.0;
    const auto e = delta_exact(kModel, kHawkes, c);
    EXPECT_GE(e.value, 0.0);
    EXPECT_LE(e.value, std::exp(0.05) * (1.0 + 3.0 * e.stderr_));
}

TEST(DeltaFd, StrikeZeroExactPathwise) {
    auto c = small(500);
    c.strike = 0.0;
    const GreeksEngine eng(kModel, kHawkes, c);
    const auto fd = eng.contributions(Method::fd, 0.0);
    const auto ex = eng.contributions(Method::exact, 0.0);
    for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_NEAR(fd[i], ex[i], 1e-12);
}

TEST(DeltaFd, BumpRichardsonOnSmoothSurrogate) {
    // f(x) = x^2: the symmetric difference is exact for quadratics, so halving b changes nothing
    // beyond rounding; for x^3 the change is O(b^2)
    const double s = 5.3;
    auto fd = [&](auto f, double b) { return (f((1 + b) * s) - f((1 - b) * s)) / (2 * b * 5.0); };
    auto sq = [](double x) { return x * x; };
    auto cube = [](double x) { return x * x * x; };
    EXPECT_NEAR(fd(sq, 0.02), fd(sq, 0.01), 1e-12);
    const double d1 = fd(cube, 0.02) - fd(cube, 0.01);
    const double d2 = fd(cube, 0.01) - fd(cube, 0.005);
    EXPECT_NEAR(d1 / d2, 4.0, 1e-6);
}

TEST(DeltaFd, CommonRandomNumbersReduceVariance) {
    // independent branches: the down-bumped payoff comes from another seed
    auto c = small(4000);
    const double b = c.fd_bump;
    const auto up = GreeksEngine(kModel, kHawkes, c).contributions(Method::exact, 0.0);  // S_T / s0 per path
    auto c2 = c;
    c2.seed = 999;
    const auto dn = GreeksEngine(kModel, kHawkes, c2).contributions(Method::exact, 0.0);
    RunningStats crn, ind;
    for (std::size_t i = 0; i < up.size(); ++i) {
        const double s = up[i] * 5.0, s2 = dn[i] * 5.0;
        crn.add((std::max((1 + b) * s - 5.0, 0.0) - std::max((1 - b) * s - 5.0, 0.0)) / (2 * 5.0 * b));
        ind.add((std::max((1 + b) * s - 5.0, 0.0) - std::max((1 - b) * s2 - 5.0, 0.0)) / (2 * 5.0 * b));
    }
    EXPECT_LT(2.0 * crn.variance(), ind.variance());
}

TEST(DeltaWm, ConstantPayoffHasZeroMean) {
    // f = 1 at strike 0 shifted: use the Wiener weight alone on the jump-free event
    RunningStats s;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const auto base = realize_base(kHawkes, 1.0, {5, i}, 10, 8);
        const bool none = thin(base, kHawkes).count() == 0;
        s.add(none ? base.w_grid().back() / (5.0 * 0.1) : 0.0);
    }
    EXPECT_NEAR(s.mean(), 0.0, 3.0 * s.stderr_());
}

TEST(DeltaWm, BlackScholesLimit) {
    const ModelParams flat(0.05, 0.10, 5.0, 1.0, JumpFunction::zero());
    for (auto mode : {WienerMode::full, WienerMode::jump_free}) {
        auto c = small(20000);
        c.wiener_mode = mode;
        const auto d = delta_wm(flat, kHawkes, c);
        if (mode == WienerMode::full)
            EXPECT_NEAR(d.value, oracle::bs_delta(5.0, 5.0, 0.05, 0.10, 1.0), 3.0 * d.stderr_);
        else
            EXPECT_LT(d.value, 0.7 * oracle::bs_delta(5.0, 5.0, 0.05, 0.10, 1.0));  // keyed on accepted jumps
    }
}

TEST(DeltaPm, DegenerateJumpModelRefused) {
    const ModelParams flat(0.05, 0.10, 5.0, 1.0, JumpFunction::zero());
    EXPECT_THROW(delta_pm(flat, kHawkes, small(10)), NumericalDegeneracy);
    EXPECT_NO_THROW(delta_wm(flat, kHawkes, small(10)));
}

TEST(DeltaPm, OutOfTheMoneyPathsContributeZero) {
    const auto c = small(300);
    const GreeksEngine eng(kModel, kHawkes, c);
    const auto pm = eng.contributions(Method::pm, 5.0);
    const auto ex = eng.contributions(Method::exact, 5.0);
    for (std::size_t i = 0; i < pm.size(); ++i)
        if (ex[i] == 0.0) EXPECT_EQ(pm[i], 0.0);
}

TEST(DeltaPm, AgreesWithExactAtStrikeZero) {
    auto c = small(4000);
    const double k[] = {0.0, 5.0};
    const Method m[] = {Method::exact, Method::pm};
    const auto rows = GreeksEngine(kModel, kHawkes, c).deltas(k, m);
    for (int j = 0; j < 2; ++j)
        EXPECT_NEAR(rows[2 + j].value, rows[j].value, 3.0 * std::hypot(rows[2 + j].stderr_, rows[j].stderr_));
}

TEST(DeltaWp, IsMeanOfWmAndPm) {
    for (auto kind : {OptionKind::european, OptionKind::asian}) {
        const auto c = small(300, kind);
        const double k[] = {4.5, 5.0};
        const Method m[] = {Method::wm, Method::pm, Method::wp};
        const auto rows = GreeksEngine(kModel, kHawkes, c).deltas(k, m);
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(rows[4 + j].value, 0.5 * (rows[j].value + rows[2 + j].value), 1e-12);
    }
}

TEST(Engine, WorkerCountDoesNotChangeResults) {
    auto c = small(200, OptionKind::asian);
    const double k[] = {4.0, 5.0};
    const auto a = GreeksEngine(kModel, kHawkes, c).deltas(k, kAllMethods);
    c.workers = 3;
    const auto b = GreeksEngine(kModel, kHawkes, c).deltas(k, kAllMethods);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_EQ(a[i].stderr_, b[i].stderr_);
    }
}

TEST(Engine, StrikeGrid) {
    const auto k = standard_strike_grid(5.0);
    ASSERT_EQ(k.size(), 26u);
    EXPECT_DOUBLE_EQ(k.front(), 0.25);
    EXPECT_DOUBLE_EQ(k[19], 5.0);
    EXPECT_DOUBLE_EQ(k.back(), 6.5);
}

TEST(MseTable, EmptyGridAndSelfConsistency) {
    auto c = small(1000);
    const Method ex[] = {Method::exact};
    EXPECT_TRUE(mse_table(kModel, kHawkes, {}, ex, c).rows.empty());
    const double k[] = {4.0, 5.0, 6.0};
    const auto t = mse_table(kModel, kHawkes, k, ex, c);
    ASSERT_EQ(t.rows.size(), 1u);
    double scale = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
        scale += t.curves[j].stderr_ * t.curves[j].stderr_ + t.reference[j].stderr_ * t.reference[j].stderr_;
    scale /= 3.0;
    EXPECT_LT(t.rows[0].mse, 10.0 * scale);
    EXPECT_EQ(t.reference[0].n_paths, 10000u);
}

TEST(Strip, OverflowDoublesInsteadOfDiscarding) {
    // a strip barely above lambda0 forces extensions; thinning stays exact
    const auto base = sample_base(kHawkes, 1.0, 1.05, {3, 3});
    auto b = base;
    int d = 0;
    while (thin(b, kHawkes).overflow()) {
        b = extend_strip(b);
        ++d;
    }
    const auto wide = thin(b, kHawkes);
    for (const auto& j : wide.jumps()) EXPECT_LE(b.candidate(j.id).z, wide.intensity_at(j.t));
    EXPECT_LE(d, 8);
}

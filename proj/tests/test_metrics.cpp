#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "spinsense/metrics.hpp"

using namespace spinsense;

namespace {

const double kOneKhz = 2 * oracle::kPi * 1e3;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST(Qnr, ZeroAtRestExactly) {
  const DirectionalPair pair = directional_spectra(PhysicalParams{}, 0.0, kOneKhz);
  for (int k = 0; k < 180; ++k) EXPECT_EQ(qnr(pair, k * oracle::kPi / 180), 0.0);
  EXPECT_EQ(qnr_optimal_angle(pair), 0.0);
}

TEST(Qnr, AntisymmetricUnderSwap) {
  const DirectionalPair pair = directional_spectra(PhysicalParams{}, 5690.0, kOneKhz);
  const DirectionalPair swapped{pair.backward, pair.forward};
  for (double phi : {0.0, 0.7, 1.9, 2.34}) EXPECT_EQ(qnr(pair, phi), -qnr(swapped, phi));
}

TEST(Qnr, RejectsNonPositiveSpectra) {
  EXPECT_THROW(qnr(0.0, 0.5), ValidationError);
  EXPECT_THROW(qnr(0.5, -1.0), ValidationError);
  EXPECT_DOUBLE_EQ(qnr(0.25, 0.5), std::log10(2.0));
}

TEST(Qnr, OptimalAngleBeatsTheGrid) {
  const DirectionalPair pair = directional_spectra(PhysicalParams{}, 5690.0, kOneKhz);
  const double best = qnr_optimal_angle(pair);
  EXPECT_GE(best, 0.0);
  EXPECT_LT(best, oracle::kPi);
  for (int k = 0; k < 2000; ++k) EXPECT_GE(qnr(pair, best), qnr(pair, k * oracle::kPi / 2000) - 1e-12);
}

TEST(EnhancementFactor, Definitions) {
  const std::vector<double> a{4.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(enhancement_factor(a, a), 1.0);
  std::vector<double> scaled(a);
  for (double& v : scaled) v /= 1000.0;
  EXPECT_NEAR(enhancement_factor(a, scaled), 1000.0, 1e-9);
  EXPECT_THROW(enhancement_factor(std::vector<double>{}, std::vector<double>{}), ValidationError);
  EXPECT_THROW(enhancement_factor(a, std::vector<double>{1.0}), ValidationError);
}

TEST(EnhancementFactor, UsesTheCommonDefinedSubset) {
  const std::vector<double> s{1.0, 5.0, 6.0};
  const std::vector<double> f{kNaN, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(enhancement_factor(s, f), 2.5);
}

TEST(QuantumAdvantage, Definitions) {
  EXPECT_EQ(quantum_advantage_db(3.0, 3.0), 0.0);
  EXPECT_NEAR(quantum_advantage_db(100.0, 1.0), 10.0, 1e-12);
  EXPECT_NEAR(quantum_advantage_db(0.25, 1.0, 10.0, false), 10 * std::log10(std::sqrt(4.0)), 1e-12);
  EXPECT_NEAR(quantum_advantage_db(0.25, 1.0, 10.0, true), 10 * std::log10(std::sqrt(11.0 / 10.25)), 1e-12);
}

TEST(QuantumAdvantage, StaticDeviceNeverBeatsItsOwnLimit) {
  MetricContext ctx;
  ctx.drive.rotation_hz = 0.0;
  for (double w : FrequencyGrid::standard().points) {
    ctx.omega = w;
    EXPECT_LE(*evaluate_metric(Metric::kAdvantageDb, ctx), 1e-9);
  }
}

TEST(EvaluateMetric, MasksUnstablePoints) {
  MetricContext ctx;
  ctx.drive.direction = Direction::kBackward;
  ctx.drive.rotation_hz = 19000.0;
  EXPECT_FALSE(evaluate_metric(Metric::kNAdd, ctx).has_value());
  EXPECT_FALSE(evaluate_metric(Metric::kQnr, ctx).has_value());
  ctx.drive.direction = Direction::kForward;
  EXPECT_TRUE(evaluate_metric(Metric::kNAdd, ctx).has_value());
}

TEST(EvaluateMetric, NamesRoundTrip) {
  for (Metric m : {Metric::kSqueezeDb, Metric::kQnr, Metric::kNAdd, Metric::kNAddRatio, Metric::kAdvantageDb,
                   Metric::kForceNoise})
    EXPECT_EQ(parse_metric(to_string(m)), m);
  for (SweepAxis a : {SweepAxis::kRotation, SweepAxis::kOmega, SweepAxis::kPhi}) EXPECT_EQ(parse_axis(to_string(a)), a);
  EXPECT_THROW(parse_metric("bogus"), ValidationError);
  EXPECT_THROW(parse_axis("bogus"), ValidationError);
}

TEST(Sweep, SinglePointEqualsDirectEvaluation) {
  MetricContext ctx;
  const SweepResult r = run_sweep(Metric::kNAddRatio, ctx, {{SweepAxis::kRotation, {5690.0}}});
  ASSERT_EQ(r.values.size(), 1u);
  EXPECT_EQ(r.values[0], *evaluate_metric(Metric::kNAddRatio, ctx));
}

TEST(Sweep, RowMajorLayoutAndMasking) {
  MetricContext ctx;
  ctx.drive.direction = Direction::kBackward;
  const std::vector<double> nus{0.0, 5000.0, 19000.0};
  const std::vector<double> phis{0.0, 1.0};
  const SweepResult r = run_sweep(Metric::kSqueezeDb, ctx, {{SweepAxis::kRotation, nus}, {SweepAxis::kPhi, phis}});
  ASSERT_EQ(r.values.size(), 6u);
  for (std::size_t i = 0; i < nus.size(); ++i)
    for (std::size_t j = 0; j < phis.size(); ++j) {
      MetricContext c = ctx;
      c.drive.rotation_hz = nus[i];
      c.drive.homodyne_angle = phis[j];
      const auto v = evaluate_metric(Metric::kSqueezeDb, c);
      EXPECT_EQ(r.is_masked(i, j), !v.has_value());
      if (v) {
        EXPECT_EQ(r.at(i, j), *v);
      }
    }
  EXPECT_EQ(r.masked_count, 2u);
  EXPECT_FALSE(r.is_masked(r.argmin / 2, r.argmin % 2));
}

TEST(Sweep, AllUnstableIsAnError) {
  MetricContext ctx;
  ctx.drive.direction = Direction::kBackward;
  EXPECT_THROW(run_sweep(Metric::kNAdd, ctx, {{SweepAxis::kRotation, {19000.0, 20000.0}}}), InstabilityError);
  EXPECT_THROW(run_sweep(Metric::kNAdd, ctx, {}), ValidationError);
  EXPECT_THROW(run_sweep(Metric::kNAdd, ctx, {{SweepAxis::kRotation, {}}}), ValidationError);
}

TEST(Sweep, Deterministic) {
  MetricContext ctx;
  const std::vector<Axis> axes{{SweepAxis::kRotation, {0.0, 3000.0, 6000.0, 9000.0}},
                               {SweepAxis::kOmega, FrequencyGrid::logarithmic(60.0, 6e7, 9).points}};
  const SweepResult a = run_sweep(Metric::kNAddRatio, ctx, axes);
  const SweepResult b = run_sweep(Metric::kNAddRatio, ctx, axes);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_EQ(std::memcmp(&a.values[i], &b.values[i], sizeof(double)), 0);
}

TEST(GoldenSection, QuadraticMinimum) {
  const Minimum m = golden_section([](double x) -> std::optional<double> { return (x - 0.3) * (x - 0.3) + 2.0; }, -1.0,
                                   4.0, 1e-10);
  // A quadratic only resolves x to about sqrt(eps).
  EXPECT_NEAR(m.x, 0.3, 1e-7);
  EXPECT_NEAR(m.value, 2.0, 1e-15);
}

TEST(Minimize, ConvexQuadratics) {
  const Optimum one = minimize([](const std::vector<double>& x) -> std::optional<double> { return std::pow(x[0] - 1.234, 2); },
                               {{-5.0, 5.0}}, 21, 1e-10);
  EXPECT_NEAR(one.x[0], 1.234, 1e-8);
  const Optimum two = minimize(
      [](const std::vector<double>& x) -> std::optional<double> {
        const double a = x[0] - 0.4, b = x[1] + 1.3;
        return a * a + 3 * b * b + 0.5 * a * b;
      },
      {{-2.0, 2.0}, {-3.0, 3.0}}, 21, 1e-10);
  EXPECT_NEAR(two.x[0], 0.4, 1e-5);
  EXPECT_NEAR(two.x[1], -1.3, 1e-5);
}

TEST(Minimize, TiesKeepTheLowestIndex) {
  const Optimum o = minimize([](const std::vector<double>&) -> std::optional<double> { return 1.0; }, {{0.0, 1.0}}, 11, 1e-8);
  EXPECT_EQ(o.x[0], 0.0);
}

TEST(Minimize, SkipsUndefinedRegions) {
  const Optimum o = minimize(
      [](const std::vector<double>& x) -> std::optional<double> {
        if (x[0] < 0.5) return std::nullopt;
        return x[0];
      },
      {{0.0, 1.0}}, 11, 1e-10);
  EXPECT_NEAR(o.x[0], 0.5, 1e-9);
  EXPECT_THROW(minimize([](const std::vector<double>&) -> std::optional<double> { return std::nullopt; }, {{0.0, 1.0}},
                        5, 1e-6),
               InstabilityError);
}

TEST(Minimize, AnalyticAddedNoiseReachesTheLimit) {
  const PhysicalParams p;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lw(1.0, 6.0);
  for (int i = 0; i < 10; ++i) {
    const double w = 2 * oracle::kPi * std::pow(10.0, lw(rng));
    const double chi = oracle::chi_m_abs(p.mechanical_frequency(), p.gamma_m, w);
    const double g_opt = std::sqrt(p.kappa / (4 * chi));
    const Optimum o = minimize(
        [&](const std::vector<double>& x) -> std::optional<double> {
          return analytic_added_noise(g_opt * std::pow(10.0, x[0]), p.kappa, p.gamma_m, chi);
        },
        {{-3.0, 3.0}}, 61, 1e-9);
    const double sql = 1.0 / (2 * p.gamma_m * chi);
    EXPECT_NEAR(o.value / sql, 1.0, 1e-6);
    EXPECT_NEAR(o.x[0], 0.0, 1e-4);
  }
}

TEST(OptimizeMetric, QnrOptimumConsistentWithGrid) {
  MetricContext ctx;
  const std::vector<double> nus = [] {
    std::vector<double> v;
    for (int i = 0; i <= 40; ++i) v.push_back(500.0 * i);
    return v;
  }();
  std::vector<double> phis;
  for (int k = 0; k <= 40; ++k) phis.push_back(k * oracle::kPi / 40);
  const SweepResult grid = run_sweep(Metric::kQnr, ctx, {{SweepAxis::kRotation, nus}, {SweepAxis::kPhi, phis}});
  const Optimum o = optimize_metric(Metric::kQnr, Goal::kMaximize, ctx, {SweepAxis::kRotation, SweepAxis::kPhi},
                                    {{0.0, 2e4}, {0.0, oracle::kPi}});
  EXPECT_GE(o.value, grid.values[grid.argmax]);
  // The ridge is shallow in nu_rot, so allow two grid steps.
  EXPECT_NEAR(o.x[0], nus[grid.argmax / phis.size()], 1000.0);
  EXPECT_GT(o.x[0], 0.0);
  EXPECT_LT(o.x[0], 2e4);
}

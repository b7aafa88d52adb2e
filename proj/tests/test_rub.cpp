#include <gtest/gtest.h>

#include <cmath>

#include "tacgrip/rub_singulation.hpp"
#include "tacgrip/seed.hpp"

using namespace tacgrip;
using namespace tacgrip::rub;

TEST(StrokeRange, Examples) {
  RubConfig cfg;
  cfg.k_p = 0.5;
  cfg.b = 0.0;
  EXPECT_EQ(stroke_range(0.0, cfg), 0.0);
  cfg.b = 2.0;
  EXPECT_EQ(stroke_range(30.0, cfg), 17.0);
  EXPECT_EQ(stroke_range(100.0, cfg), kActuatorTravel);
  cfg.k_p = 0.0;
  cfg.b = 5.0;
  for (double p : {0.0, 12.0, 40.0}) EXPECT_EQ(stroke_range(p, cfg), 5.0);
  EXPECT_THROW(stroke_range(-1.0, cfg), std::domain_error);
}

TEST(ServoPolicy, StrictThreshold) {
  const RubConfig cfg;
  EXPECT_EQ(servo_policy(10.0, cfg), cfg.retract_angle);
  EXPECT_EQ(servo_policy(41.0, cfg), 0.0);
  EXPECT_EQ(servo_policy(15.0, cfg), 0.0);
  EXPECT_LE(std::abs(servo_policy(14.99, cfg)), kServoRange);
}

TEST(ServoPolicy, AngleOutsideRangeRejected) {
  RubConfig cfg;
  cfg.retract_angle = 50.0 * kPi / 180.0;
  EXPECT_THROW(servo_policy(10.0, cfg), std::invalid_argument);
  EXPECT_THROW(cfg.validate(5500.0), std::invalid_argument);
}

TEST(RubConfig, Invariants) {
  RubConfig cfg;
  EXPECT_NO_THROW(cfg.validate(5500.0));
  cfg.drop_area_floor = 6000.0;
  EXPECT_THROW(cfg.validate(5500.0), std::invalid_argument);
  cfg = RubConfig{};
  cfg.stroke_freq = 0.0;
  EXPECT_THROW(cfg.validate(5500.0), std::invalid_argument);
}

TEST(Profile, WidthPeriodAndPositivity) {
  for (const auto& obj : default_catalog()) {
    for (double phi = -3.0; phi < 7.0; phi += 0.173) {
      EXPECT_GT(obj.width(phi), 0.0) << obj.label;
      EXPECT_NEAR(obj.width(phi), obj.width(phi + kPi), 1e-9) << obj.label;
    }
  }
}

TEST(RubStep, SphereWidthInvariant) {
  const auto ball = ObjectProfile::sphere("ball", 20.0);
  double phi = 0.3;
  for (double d : {1.0, -4.0, 7.5}) {
    const auto r = rub_step(phi, d, ball);
    EXPECT_EQ(r.width, 20.0);
    phi = r.phi;
  }
}

TEST(RubStep, EllipseRollsMinorToMajor) {
  const auto ell = ObjectProfile::ellipse("ell", 12.0, 8.0);
  EXPECT_NEAR(ell.width(0.0), 8.0, 1e-12);
  // Rolling distance b * pi/2 takes phi from 0 to pi/2.
  const auto r = rub_step(0.0, 4.0 * kPi / 2.0, ell);
  EXPECT_NEAR(r.phi, kPi / 2.0, 1e-12);
  EXPECT_NEAR(r.width, 12.0, 1e-12);
}

TEST(RubStep, ZeroStrokeIdentity) {
  const auto ell = ObjectProfile::ellipse("ell", 14.0, 9.0);
  const auto r = rub_step(0.7, 0.0, ell);
  EXPECT_EQ(r.phi, 0.7);
  EXPECT_EQ(r.width, ell.width(0.7));
}

TEST(Grains, ZeroStrokeUnchanged) {
  const GrainField g(50, 0.02, 7);
  EXPECT_EQ(grain_step(g, 0.0, 5500.0, 5500.0).n_grains(), 50);
}

TEST(Grains, HugeRateClearsInOneStep) {
  const GrainField g(50, 1e6, 7);
  EXPECT_EQ(grain_step(g, 1.0, 5500.0, 5500.0).n_grains(), 0);
}

TEST(Grains, BinomialMeanWithinThreeSigma) {
  constexpr int kRuns = 10000;
  const double q = 0.02 * 10.0;  // rate * stroke at area = c_desired
  const double mean = 50.0 * q;
  const double var = 50.0 * q * (1.0 - q);
  double sum = 0.0;
  for (int i = 0; i < kRuns; ++i) {
    const GrainField g(50, 0.02, trial_seed(123, static_cast<std::uint64_t>(i)));
    sum += 50 - grain_step(g, 10.0, 5500.0, 5500.0).n_grains();
  }
  const double empirical = sum / kRuns;
  EXPECT_NEAR(mean, 10.0, 1e-12);
  EXPECT_NEAR(empirical, mean, 3.0 * std::sqrt(var / kRuns));
}

TEST(Grains, NeverIncrease) {
  GrainField g(80, 0.05, 3);
  int prev = g.n_grains();
  for (int i = 0; i < 200; ++i) {
    g = g.step(0.5 * std::sin(0.1 * i), 4000.0 + 20.0 * i, 5500.0);
    EXPECT_LE(g.n_grains(), prev);
    prev = g.n_grains();
  }
}

namespace {

TrialOutcome run(const ObjectProfile& obj, std::uint64_t seed, TrialSetup setup = {}) {
  return run_singulation_trial(obj, setup, GrainField(setup.n_grains, setup.removal_rate, substream(seed, 3)),
                               seed);
}

}  // namespace

TEST(Trial, GolfBallRetained) {
  const auto out = run(ObjectProfile::sphere("golf_ball", 41.0), 5);
  EXPECT_TRUE(out.retained);
  EXPECT_FALSE(out.aborted);
  EXPECT_EQ(out.strokes_executed, RubConfig{}.n_strokes);
  EXPECT_NEAR(out.min_area, 5500.0, 0.15 * 5500.0);
  EXPECT_EQ(out.servo_angle, 0.0);
}

TEST(Trial, SphereWidthConstantInTrace) {
  const auto out = run(ObjectProfile::sphere("seed", 10.0), 6);
  for (const auto& r : out.trace) EXPECT_EQ(r.width, 10.0);
  EXPECT_EQ(out.servo_angle, RubConfig{}.retract_angle);
}

TEST(Trial, AlmondWidthSwings) {
  const auto out = run(ObjectProfile::ellipse("almond", 14.0, 9.0), 7);
  double lo = 1e9;
  double hi = 0.0;
  for (const auto& r : out.trace) {
    lo = std::min(lo, r.width);
    hi = std::max(hi, r.width);
  }
  EXPECT_GE(lo, 9.0 - 1e-9);
  EXPECT_LE(hi, 14.0 + 1e-9);
  EXPECT_GT(hi - lo, 1.0);
}

TEST(Trial, NoStrokesKeepsEverything) {
  TrialSetup setup;
  setup.rub.n_strokes = 0;
  const auto out = run(ObjectProfile::ellipse("peanut", 16.0, 10.0), 8, setup);
  EXPECT_TRUE(out.retained);
  EXPECT_EQ(out.residual_grains, out.initial_grains);
  EXPECT_EQ(out.strokes_executed, 0);
}

TEST(Trial, SeedDeterminism) {
  const auto obj = ObjectProfile::irregular("berry", {30.0, 32.0, 35.0, 38.0, 36.0, 33.0, 31.0, 29.0});
  TrialSetup setup;
  setup.gel.noise_sigma = 20.0;
  const auto a = run(obj, 99, setup);
  const auto b = run(obj, 99, setup);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    EXPECT_EQ(rub_trace_csv_row(a.trace[i]), rub_trace_csv_row(b.trace[i]));
  EXPECT_EQ(a.residual_grains, b.residual_grains);
  EXPECT_EQ(a.min_area, b.min_area);
}

TEST(Trial, GrainsMonotoneAndStrokeBound) {
  for (const auto& obj : default_catalog()) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto out = run(obj, trial_seed(17, s));
      int prev = out.initial_grains;
      for (const auto& r : out.trace) {
        EXPECT_LE(r.n_grains, prev) << obj.label;
        prev = r.n_grains;
      }
      EXPECT_LE(out.strokes_executed, RubConfig{}.n_strokes);
      EXPECT_LE(std::abs(out.servo_angle), kServoRange);
    }
  }
}

TEST(Trial, DropDetectorFires) {
  // Gel saturates under the drop floor, so the area can never be held.
  TrialSetup setup;
  setup.gel.c_max = 2000.0;
  const auto out = run(ObjectProfile::sphere("pebble", 10.0), 4, setup);
  EXPECT_FALSE(out.retained);
  EXPECT_LT(out.strokes_executed, RubConfig{}.n_strokes);
}

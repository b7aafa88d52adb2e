#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tacgrip/scoop_statics.hpp"

using namespace tacgrip::scoop;

namespace {

constexpr double kDeg = kPi / 180.0;

ScoopProblem random_problem(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoopProblem p;
  p.h = 0.2 + 3.0 * u(rng);
  p.l = 5.0 + 120.0 * u(rng);
  p.d = p.h * u(rng);
  p.theta = (1.0 + 87.0 * u(rng)) * kDeg;
  p.mu1 = u(rng);
  p.mu2 = u(rng);
  p.m = 0.05 * u(rng);
  p.F_L = 5.0 * u(rng);
  return p;
}

// Force balances written out independently of solve_forces.
void expect_balanced(const ScoopProblem& p, const ScoopSolution& s) {
  const double scale = 1.0 + p.F_L + p.weight() + std::abs(s.F_Rx) + std::abs(s.F_By);
  EXPECT_NEAR(s.F_Ry, p.mu1 * s.F_Rx, 1e-12 * scale);
  EXPECT_NEAR(s.F_Bx, p.mu2 * s.F_By, 1e-12 * scale);
  EXPECT_NEAR(s.F_Bx, s.F_Rx - p.F_L * std::cos(p.theta), 1e-12 * scale);
  EXPECT_NEAR(s.F_By, p.F_L * std::sin(p.theta) - s.F_Ry + p.weight(), 1e-12 * scale);
}

}  // namespace

TEST(Forces, UnloadedCard) {
  ScoopProblem p;
  p.F_L = 0.0;
  p.mu2 = 0.0;
  const auto s = solve_forces(p);
  EXPECT_EQ(s.F_Rx, 0.0);
  EXPECT_EQ(s.F_Ry, 0.0);
  EXPECT_EQ(s.F_Bx, 0.0);
  EXPECT_NEAR(s.F_By, p.m * p.g, 1e-15);
}

TEST(Forces, MasslessFrictionless45) {
  ScoopProblem p;
  p.m = 0.0;
  p.mu1 = p.mu2 = 0.0;
  p.theta = 45.0 * kDeg;
  p.F_L = 1.0;
  const auto s = solve_forces(p);
  EXPECT_NEAR(s.F_Rx, std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(s.F_By, std::sqrt(0.5), 1e-12);
}

TEST(Forces, CardLikeValue) {
  const ScoopProblem p;  // mu 0.3/0.4, 30 deg, 5 g, 1 N
  const auto s = solve_forces(p);
  const double oracle = (1.0 * (0.4 * 0.5 + std::sqrt(3.0) / 2.0) + 0.4 * 0.005 * 9.81) / (1.0 + 0.3 * 0.4);
  EXPECT_NEAR(s.F_Rx, oracle, 1e-12);
  EXPECT_NEAR(s.F_Rx, 0.969326, 1e-6);
  expect_balanced(p, s);
}

TEST(Forces, RandomBalances) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const auto p = random_problem(rng);
    expect_balanced(p, solve_forces(p));
  }
}

TEST(Forces, RejectsBadGeometry) {
  ScoopProblem p;
  p.d = 2.0;
  EXPECT_THROW(solve_forces(p), std::domain_error);
  p = ScoopProblem{};
  p.theta = 0.0;
  EXPECT_THROW(solve_forces(p), std::domain_error);
}

TEST(Moment, DirectZeroForces) {
  ScoopProblem p;
  p.F_L = 0.0;
  EXPECT_EQ(moment_direct(p, ScoopSolution{}), 0.0);
}

TEST(Moment, SingleTableNormal) {
  ScoopProblem p;
  p.l = 10.0;
  p.h = 1.0;
  p.d = 0.5;
  p.mu2 = 0.0;
  p.F_L = 0.0;
  ScoopSolution s;
  s.F_By = 1.0;
  EXPECT_NEAR(moment_direct(p, s), -5.0, 1e-15);
}

TEST(Moment, ZeroLoadFrictionlessTable) {
  ScoopProblem p;
  p.F_L = 0.0;
  p.mu2 = 0.0;
  const auto s = analyze(p);
  EXPECT_EQ(s.F_Rx, 0.0);
  // M_all = -l m g / 2: the card's own weight at the table contact.
  EXPECT_NEAR(s.M_all, -0.5 * p.l * p.weight(), 1e-12);
  EXPECT_NEAR(s.K2, s.M_all, 1e-12);
}

TEST(Moment, CardLikeIdentityAndVerdict) {
  const ScoopProblem p;
  const auto s = solve_forces(p);
  const double direct = moment_direct(p, s);
  const auto red = moment_reduced(p, s);
  EXPECT_NEAR(red.M_all, direct, 1e-9 * (1.0 + std::abs(direct)));
  EXPECT_GT(direct, 0.0);
  EXPECT_GT(red.K1, 0.0);
  EXPECT_EQ(flip_predicate(p), FlipVerdict::kFlipsCcw);
}

TEST(Moment, PrintedReductionMissesWeightTerm) {
  // Without the 1/2 m g (h mu2 - l) term the reduction differs by exactly that amount.
  const ScoopProblem p;
  const auto s = solve_forces(p);
  const auto red = moment_reduced(p, s);
  const double s_t = std::sin(p.theta);
  const double c_t = std::cos(p.theta);
  const double lever = s_t * (p.h * p.mu2 - p.l) + c_t * (p.l * std::tan(p.theta) - p.h);
  const double printed_k2 = -0.5 * p.mu2 * p.weight() * lever / (p.mu2 * s_t + c_t);
  EXPECT_NEAR(red.K2 - printed_k2, 0.5 * p.weight() * (p.h * p.mu2 - p.l), 1e-12);
}

TEST(Moment, RandomIdentity) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5000; ++i) {
    const auto p = random_problem(rng);
    const auto s = solve_forces(p);
    const double direct = moment_direct(p, s);
    EXPECT_NEAR(moment_reduced(p, s).M_all, direct, 1e-9 * (1.0 + std::abs(direct))) << i;
  }
}

TEST(Moment, AffineInFRxWithSlopeK1) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto p = random_problem(rng);
    p.F_L = 1.0;
    const auto a = analyze(p);
    p.F_L = 3.0;
    const auto b = analyze(p);
    const double slope = (b.M_all - a.M_all) / (b.F_Rx - a.F_Rx);
    EXPECT_NEAR(slope, a.K1, 1e-9 * (1.0 + std::abs(a.K1))) << i;
  }
}

TEST(Moment, GravityEntersOnlyThroughTableNormal) {
  // With mu2 = 0, doubling m leaves K1 alone and shifts M by -l/2 times the added weight.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    auto p = random_problem(rng);
    p.mu2 = 0.0;
    const auto a = analyze(p);
    p.m *= 2.0;
    const auto b = analyze(p);
    EXPECT_NEAR(b.K1, a.K1, 1e-12 * (1.0 + std::abs(a.K1)));
    EXPECT_NEAR(b.M_all - a.M_all, -0.5 * p.l * 0.5 * p.weight(), 1e-9 * (1.0 + std::abs(a.M_all)));
  }
}

TEST(Moment, RejectsNearVertical) {
  ScoopProblem p;
  p.theta = 89.5 * kDeg;
  EXPECT_THROW(moment_reduced(p, solve_forces(p)), std::domain_error);
  EXPECT_THROW(flip_predicate(p), std::domain_error);
}

TEST(Flip, BoundaryNoFlip) {
  ScoopProblem p;
  p.F_L = 0.0;
  p.mu2 = 0.0;
  p.m = 0.0;
  EXPECT_EQ(flip_predicate(p), FlipVerdict::kNoFlip);
}

TEST(Flip, InfeasibleExactlyWhenTableWouldPull) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    const auto p = random_problem(rng);
    const auto s = solve_forces(p);
    const auto v = flip_predicate(p);
    EXPECT_EQ(v == FlipVerdict::kInfeasible, s.F_By < 0.0 || s.F_Rx < 0.0) << i;
  }
}

TEST(Flip, LargeLoadGoesInfeasibleWhenShallow) {
  ScoopProblem p;
  p.theta = 10.0 * kDeg;  // tan < mu1: F_By falls with F_L
  p.F_L = 100.0;
  EXPECT_LT(solve_forces(p).F_By, 0.0);
  EXPECT_EQ(flip_predicate(p), FlipVerdict::kInfeasible);
}

TEST(Sweep, SinglePoint) {
  SweepSpec spec;
  spec.base.F_L = 0.0;
  spec.base.mu2 = 0.0;
  spec.base.m = 0.0;
  spec.F_L = {0.0, 0.0, 1};
  spec.mu2 = {0.0, 0.0, 1};
  const auto rows = sweep(spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].verdict, "no_flip");
}

TEST(Sweep, TenThousandRows) {
  SweepSpec spec;
  spec.theta = {5.0 * kDeg, 85.0 * kDeg, 10};
  spec.mu1 = {0.0, 0.9, 10};
  spec.mu2 = {0.0, 0.9, 10};
  spec.F_L = {0.0, 50.0, 10};
  const auto rows = sweep(spec);
  EXPECT_EQ(rows.size(), 10000u);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  int lines = 0;
  for (char c : os.str()) lines += c == '\n';
  EXPECT_EQ(lines, 10001);
}

TEST(Sweep, FeasibleThenInfeasibleAlongLoad) {
  SweepSpec spec;
  spec.theta = {5.0 * kDeg, 40.0 * kDeg, 5};
  spec.mu1 = {0.1, 0.9, 3};
  spec.mu2 = {0.1, 0.5, 3};
  spec.F_L = {0.0, 200.0, 41};
  const auto rows = sweep(spec);
  int flips = 0;
  for (std::size_t start = 0; start < rows.size(); start += 41) {
    bool infeasible_seen = false;
    for (std::size_t k = start; k < start + 41; ++k) {
      const bool inf = rows[k].verdict == "infeasible";
      if (infeasible_seen) EXPECT_TRUE(inf) << k;
      infeasible_seen = infeasible_seen || inf;
    }
    flips += infeasible_seen;
  }
  EXPECT_GT(flips, 0);
}

TEST(Sweep, OutOfModelPointsKept) {
  SweepSpec spec;
  spec.theta = {80.0 * kDeg, 89.5 * kDeg, 3};
  const auto rows = sweep(spec);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].verdict, "out_of_model");
  EXPECT_TRUE(std::isnan(rows[2].M_all));
}

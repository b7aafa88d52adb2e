#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "tacgrip/qp.hpp"

using namespace tacgrip;

namespace {

double objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& f, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(H * x) + f.dot(x);
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  return A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(Qp, UnconstrainedMinimum) {
  Eigen::MatrixXd H(2, 2);
  H << 2, 0, 0, 4;
  Eigen::VectorXd f(2);
  f << -2, -8;
  const auto r = qp::solve(H, f, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  ASSERT_EQ(r.status, qp::Status::kOptimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 2.0, 1e-12);
}

TEST(Qp, ActiveBoxBound) {
  // min (x-3)^2 s.t. x <= 1  ->  x = 1, multiplier 4.
  Eigen::MatrixXd H(1, 1);
  H << 2;
  Eigen::VectorXd f(1);
  f << -6;
  Eigen::MatrixXd C(1, 1);
  C << -1;
  Eigen::VectorXd d(1);
  d << 1;
  const auto r = qp::solve(H, f, C, d);
  ASSERT_EQ(r.status, qp::Status::kOptimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.multipliers(0), 4.0, 1e-12);
  EXPECT_LT(qp::kkt_residual(H, f, C, d, r.x, r.multipliers), 1e-12);
}

TEST(Qp, DetectsInfeasible) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd C(2, 1);
  C << 1, -1;
  Eigen::VectorXd d(2);
  d << -2, 1;  // x >= 2 and x <= 1
  EXPECT_EQ(qp::solve(H, f, C, d).status, qp::Status::kInfeasible);
}

TEST(Qp, RejectsIndefinite) {
  Eigen::MatrixXd H(1, 1);
  H << -1;
  EXPECT_EQ(qp::solve(H, Eigen::VectorXd::Zero(1), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0)).status,
            qp::Status::kNotConvex);
}

TEST(Qp, DuplicateConstraintRows) {
  // Same bound twice: linearly dependent active set.
  Eigen::MatrixXd H = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd f(2);
  f << -6, -6;
  Eigen::MatrixXd C(3, 2);
  C << -1, 0, -1, 0, -1, -1;
  Eigen::VectorXd d(3);
  d << 1, 1, 3;
  const auto r = qp::solve(H, f, C, d);
  ASSERT_EQ(r.status, qp::Status::kOptimal);
  EXPECT_NEAR(r.x(0), 1.0, 1e-10);
  EXPECT_NEAR(r.x(1), 2.0, 1e-10);
  EXPECT_LT(qp::kkt_residual(H, f, C, d, r.x, r.multipliers), 1e-10);
}

TEST(Qp, RandomBoxQpsBeatSampledPoints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    const Eigen::MatrixXd H = random_spd(rng, n);
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f(i) = 5.0 * u(rng);
    // |x_i| <= 1 as 2n rows.
    Eigen::MatrixXd C(2 * n, n);
    C << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd d = Eigen::VectorXd::Ones(2 * n);
    const auto r = qp::solve(H, f, C, d);
    ASSERT_EQ(r.status, qp::Status::kOptimal) << trial;
    EXPECT_LT(qp::kkt_residual(H, f, C, d, r.x, r.multipliers), 1e-9) << trial;
    const double best = objective(H, f, r.x);
    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) y(i) = u(rng);
      EXPECT_LE(best, objective(H, f, y) + 1e-9) << trial;
    }
  }
}

TEST(Qp, GeneralInequalitiesKkt) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 6;
    const int m = 3 * n;
    const Eigen::MatrixXd H = random_spd(rng, n);
    Eigen::VectorXd f(n);
    Eigen::MatrixXd C(m, n);
    Eigen::VectorXd d(m);
    for (int i = 0; i < n; ++i) f(i) = 3.0 * g(rng);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) C(i, j) = g(rng);
      d(i) = 1.0 + std::abs(g(rng));  // x = 0 strictly feasible
    }
    const auto r = qp::solve(H, f, C, d);
    ASSERT_EQ(r.status, qp::Status::kOptimal) << trial;
    EXPECT_LT(qp::kkt_residual(H, f, C, d, r.x, r.multipliers), 1e-9) << trial;
    EXPECT_GE((C * r.x + d).minCoeff(), -1e-10) << trial;
  }
}

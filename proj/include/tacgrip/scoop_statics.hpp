// Quasi-static scooping model for a thin card lifted by a fingernail: force
// balance, nail/finger force relation, equivalent moment at the center of
// mass in direct and reduced (affine in F_Rx) form, flip predicate, sweeps.
//
// Axes: x toward the nail, y up. Counterclockwise moments are positive.
// Lengths in mm, forces in N, moments in N*mm.
#pragma once

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tacgrip/format.hpp"

namespace tacgrip::scoop {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;
/// Reduced form is evaluated only below this angle (tan blows up at 90 deg).
inline constexpr double kMaxTheta = 89.0 * kPi / 180.0;

struct ScoopProblem {
  double h = 1.2;    // card thickness / contact height
  double l = 85.5;   // card length in the section
  double d = 0.6;    // nail contact offset, 0 <= d <= h
  double theta = 30.0 * kPi / 180.0;  // angle between F_L and the ground
  double mu1 = 0.3;  // nail-card
  double mu2 = 0.4;  // card-table
  double m = 0.005;  // kg
  double g = kGravity;
  double F_L = 1.0;  // N

  void validate() const {
    if (!(h > 0.0) || !(l > 0.0)) throw std::domain_error("ScoopProblem: h and l must be > 0");
    if (!(d >= 0.0 && d <= h)) throw std::domain_error("ScoopProblem: d must lie in [0, h]");
    if (!(theta > 0.0 && theta < kPi / 2.0))
      throw std::domain_error("ScoopProblem: theta must lie in (0, pi/2)");
    if (!(mu1 >= 0.0) || !(mu2 >= 0.0)) throw std::domain_error("ScoopProblem: mu must be >= 0");
    if (!(m >= 0.0) || !(F_L >= 0.0) || !(g >= 0.0))
      throw std::domain_error("ScoopProblem: m, g, F_L must be >= 0");
  }
  [[nodiscard]] double weight() const { return m * g; }
};

struct ScoopSolution {
  double F_Rx = 0.0;
  double F_Ry = 0.0;
  double F_Bx = 0.0;
  double F_By = 0.0;
  double M_all = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  bool feasible = false;
};

/// Forces from the x/y balances with both friction contacts at their limit.
inline ScoopSolution solve_forces(const ScoopProblem& prob) {
  prob.validate();
  const double s = std::sin(prob.theta);
  const double c = std::cos(prob.theta);
  ScoopSolution sol;
  sol.F_Rx = (prob.F_L * (prob.mu2 * s + c) + prob.mu2 * prob.weight()) / (1.0 + prob.mu1 * prob.mu2);
  sol.F_Ry = prob.mu1 * sol.F_Rx;
  sol.F_By = prob.F_L * s - sol.F_Ry + prob.weight();
  sol.F_Bx = prob.mu2 * sol.F_By;
  sol.feasible = sol.F_By >= 0.0 && sol.F_Rx >= 0.0;
  return sol;
}

/// Literal sum of the moments of the nail, table and left-finger forces.
inline double moment_direct(const ScoopProblem& prob, const ScoopSolution& sol) {
  const double c = std::cos(prob.theta);
  return 0.5 * (-(prob.h - 2.0 * prob.d) * sol.F_Rx + prob.l * sol.F_Ry) +
         0.5 * (prob.h * sol.F_Bx - prob.l * sol.F_By) +
         0.5 * ((prob.l * std::tan(prob.theta) - prob.h) * prob.F_L * c);
}

struct ReducedMoment {
  double M_all = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
};

/// M_all = K1 * F_Rx + K2 after eliminating F_L and F_By. K2 carries both
/// weight contributions: the one routed through F_L and the direct m*g in F_By.
inline ReducedMoment moment_reduced(const ScoopProblem& prob, const ScoopSolution& sol) {
  prob.validate();
  if (prob.theta >= kMaxTheta) throw std::domain_error("moment_reduced: theta >= 89 deg");
  const double s = std::sin(prob.theta);
  const double c = std::cos(prob.theta);
  const double mu12 = prob.mu1 * prob.mu2;
  const double lever = s * (prob.h * prob.mu2 - prob.l) + c * (prob.l * std::tan(prob.theta) - prob.h);
  const double denom = prob.mu2 * s + c;
  ReducedMoment r;
  r.K1 = 0.5 * (2.0 * prob.d - prob.h + 2.0 * prob.l * prob.mu1 - mu12 * prob.h +
                (1.0 + mu12) * lever / denom);
  r.K2 = 0.5 * prob.weight() * (prob.h * prob.mu2 - prob.l) -
         0.5 * prob.mu2 * prob.weight() * lever / denom;
  r.M_all = r.K1 * sol.F_Rx + r.K2;
  return r;
}

enum class FlipVerdict { kFlipsCcw, kNoFlip, kInfeasible };

inline const char* to_string(FlipVerdict v) {
  switch (v) {
    case FlipVerdict::kFlipsCcw: return "flips_ccw";
    case FlipVerdict::kNoFlip: return "no_flip";
    case FlipVerdict::kInfeasible: return "infeasible";
  }
  return "?";
}

/// Full solve: forces, moment and reduced coefficients.
inline ScoopSolution analyze(const ScoopProblem& prob) {
  ScoopSolution sol = solve_forces(prob);
  const ReducedMoment red = moment_reduced(prob, sol);
  sol.K1 = red.K1;
  sol.K2 = red.K2;
  sol.M_all = moment_direct(prob, sol);
  return sol;
}

/// Infeasible when the table contact would have to pull (card leaves the
/// three-contact configuration).
inline FlipVerdict flip_predicate(const ScoopProblem& prob) {
  if (prob.theta >= kMaxTheta) throw std::domain_error("flip_predicate: theta >= 89 deg");
  const ScoopSolution sol = analyze(prob);
  if (!sol.feasible) return FlipVerdict::kInfeasible;
  return sol.M_all > 0.0 ? FlipVerdict::kFlipsCcw : FlipVerdict::kNoFlip;
}

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;

  [[nodiscard]] double at(int i) const {
    return count <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
};

struct SweepSpec {
  ScoopProblem base;  // fixed geometry and mass
  Axis theta{30.0 * kPi / 180.0, 30.0 * kPi / 180.0, 1};
  Axis mu1{0.3, 0.3, 1};
  Axis mu2{0.4, 0.4, 1};
  Axis F_L{1.0, 1.0, 1};
};

struct SweepRow {
  double theta = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double F_L = 0.0;
  double F_Rx = 0.0;
  double F_By = 0.0;
  double M_all = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  std::string verdict;
};

inline constexpr const char* kSweepCsvHeader =
    "theta_rad,mu1,mu2,F_L_N,F_Rx_N,F_By_N,M_all_Nmm,K1_mm,K2_Nmm,verdict";

/// Grid over theta x mu1 x mu2 x F_L (F_L fastest). Points outside the model
/// are kept with verdict out_of_model.
inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  for (const Axis* a : {&spec.theta, &spec.mu1, &spec.mu2, &spec.F_L})
    if (a->count < 1) throw std::invalid_argument("sweep: every axis needs >= 1 point");
  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(spec.theta.count) * spec.mu1.count * spec.mu2.count *
               spec.F_L.count);
  for (int it = 0; it < spec.theta.count; ++it)
    for (int i1 = 0; i1 < spec.mu1.count; ++i1)
      for (int i2 = 0; i2 < spec.mu2.count; ++i2)
        for (int iF = 0; iF < spec.F_L.count; ++iF) {
          ScoopProblem p = spec.base;
          p.theta = spec.theta.at(it);
          p.mu1 = spec.mu1.at(i1);
          p.mu2 = spec.mu2.at(i2);
          p.F_L = spec.F_L.at(iF);
          SweepRow row{p.theta, p.mu1, p.mu2, p.F_L};
          try {
            const ScoopSolution sol = analyze(p);
            row.F_Rx = sol.F_Rx;
            row.F_By = sol.F_By;
            row.M_all = sol.M_all;
            row.K1 = sol.K1;
            row.K2 = sol.K2;
            row.verdict = to_string(flip_predicate(p));
          } catch (const std::domain_error&) {
            row.F_Rx = row.F_By = row.M_all = row.K1 = row.K2 = std::nan("");
            row.verdict = "out_of_model";
          }
          rows.push_back(std::move(row));
        }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << fmt_num(r.theta) << ',' << fmt_num(r.mu1) << ',' << fmt_num(r.mu2) << ','
        << fmt_num(r.F_L) << ',' << fmt_num(r.F_Rx) << ',' << fmt_num(r.F_By) << ','
        << fmt_num(r.M_all) << ',' << fmt_num(r.K1) << ',' << fmt_num(r.K2) << ',' << r.verdict
        << '\n';
  }
}

}  // namespace tacgrip::scoop

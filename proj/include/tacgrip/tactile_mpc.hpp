// Tactile-reactive MPC grasp controller: contact-area/gripper prediction
// model, quadratic tracking cost, condensed box-constrained QP, and a
// closed-loop runner against an arbitrary contact plant.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tacgrip/format.hpp"
#include "tacgrip/qp.hpp"

namespace tacgrip::mpc {

/// c in px, p in mm (gripper opening), v in mm/s (positive = opening).
struct GraspState {
  double c = 0.0;
  double p = 0.0;
  double v = 0.0;
  std::int64_t tick = 0;
};

struct MpcParams {
  double c_desired = 5500.0;
  double q_a = 1.0;
  double q_c = 1.0;
  double q_v = 2.0;
  double terminal_weight = 10.0;  // P
  int horizon = 30;               // N
  double k_c = 50000.0;           // raw table value
  double k_c_unit_scale = 1e-2;   // raw value -> px/mm
  double dt = 1.0 / 60.0;
  double freq = 60.0;

  [[nodiscard]] double k_c_eff() const { return k_c * k_c_unit_scale; }

  void validate() const {
    if (!(q_a >= 0.0 && q_c >= 0.0 && q_v >= 0.0))
      throw std::invalid_argument("MpcParams: weights must be >= 0");
    if (!(terminal_weight >= 1.0)) throw std::invalid_argument("MpcParams: P must be >= 1");
    if (horizon < 1) throw std::invalid_argument("MpcParams: N must be >= 1");
    if (!(dt > 0.0) || !(freq > 0.0)) throw std::invalid_argument("MpcParams: dt, freq must be > 0");
    if (std::abs(dt * freq - 1.0) > 1e-9) throw std::invalid_argument("MpcParams: dt*freq must be 1");
    if (!(k_c_eff() >= 0.0)) throw std::invalid_argument("MpcParams: K_c must be >= 0");
    if (!(c_desired >= 0.0)) throw std::invalid_argument("MpcParams: c_desired must be >= 0");
  }
};

struct Limits {
  double p_min = 0.0;
  double p_max = 55.0;
  double v_max = 20.0;
  double a_max = 200.0;

  void validate() const {
    if (!(p_min < p_max)) throw std::invalid_argument("Limits: p_min must be < p_max");
    if (!(v_max > 0.0) || !(a_max > 0.0))
      throw std::invalid_argument("Limits: v_max and a_max must be > 0");
  }
  [[nodiscard]] bool contains(const GraspState& s, double tol = 0.0) const {
    return s.p >= p_min - tol && s.p <= p_max + tol && std::abs(s.v) <= v_max + tol;
  }
};

enum class PlanStatus { kOptimal, kInfeasible };

struct ControlPlan {
  std::vector<double> a;
  double cost = 0.0;
  double kkt_residual = 0.0;
  PlanStatus status = PlanStatus::kOptimal;
  int iterations = 0;
};

/// One step of the discrete model.
inline GraspState advance(const GraspState& s, double a, const MpcParams& params) {
  const double dt = params.dt;
  return {s.c - params.k_c_eff() * dt * s.v, s.p + dt * s.v + 0.5 * dt * dt * a, s.v + dt * a,
          s.tick + 1};
}

/// Trajectory of len(a) + 1 states starting at `state`.
inline std::vector<GraspState> predict(const GraspState& state, std::span<const double> a,
                                       const MpcParams& params) {
  if (a.empty()) throw std::invalid_argument("predict: empty input sequence");
  std::vector<GraspState> traj;
  traj.reserve(a.size() + 1);
  traj.push_back(state);
  for (double ak : a) traj.push_back(advance(traj.back(), ak, params));
  return traj;
}

inline double stage_error(const GraspState& s, const MpcParams& params) {
  const double ec = s.c - params.c_desired;
  return params.q_c * ec * ec + params.q_v * s.v * s.v;
}

/// Tracking cost over the horizon; the terminal error is weighted by P.
inline double cost(const GraspState& state, std::span<const double> a, const MpcParams& params) {
  if (static_cast<int>(a.size()) != params.horizon)
    throw std::invalid_argument("cost: input sequence length must equal N");
  const auto traj = predict(state, a, params);
  double j = 0.0;
  for (int k = 0; k < params.horizon; ++k) {
    j += stage_error(traj[k], params) + params.q_a * a[k] * a[k];
  }
  return j + params.terminal_weight * stage_error(traj.back(), params);
}

/// Precomputed condensed form of the horizon problem. Only the linear term
/// and the constraint offsets depend on the current state.
class Controller {
 public:
  Controller(const MpcParams& params, const Limits& limits) : params_(params), limits_(limits) {
    params_.validate();
    limits_.validate();
    const int n = params_.horizon;
    const double dt = params_.dt;
    Eigen::Matrix3d A;
    A << 1.0, 0.0, -params_.k_c_eff() * dt, 0.0, 1.0, dt, 0.0, 0.0, 1.0;
    const Eigen::Vector3d B(0.0, 0.5 * dt * dt, dt);

    phi_.resize(n + 1);
    gamma_.resize(n + 1);
    phi_[0] = Eigen::Matrix3d::Identity();
    gamma_[0] = Eigen::MatrixXd::Zero(3, n);
    for (int k = 1; k <= n; ++k) {
      phi_[k] = A * phi_[k - 1];
      gamma_[k] = A * gamma_[k - 1];
      gamma_[k].col(k - 1) += B;
    }

    const Eigen::Vector2d qdiag(params_.q_c, params_.q_v);
    hessian_ = 2.0 * params_.q_a * Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k <= n; ++k) {
      const double w = (k == n) ? params_.terminal_weight : 1.0;
      Eigen::MatrixXd M(2, n);
      M.row(0) = gamma_[k].row(0);
      M.row(1) = gamma_[k].row(2);
      hessian_ += 2.0 * w * M.transpose() * qdiag.asDiagonal() * M;
    }
    obj_scale_ = std::max(1.0, hessian_.diagonal().maxCoeff());
    hessian_scaled_ = hessian_ / obj_scale_;

    // Rows: p >= p_min, p <= p_max, v >= -v_max, v <= v_max per step, then |a| box.
    const int m = 6 * n;
    cons_ = Eigen::MatrixXd::Zero(m, n);
    row_scale_ = Eigen::VectorXd::Ones(m);
    for (int k = 1; k <= n; ++k) {
      const int r = 4 * (k - 1);
      cons_.row(r) = gamma_[k].row(1);
      cons_.row(r + 1) = -gamma_[k].row(1);
      cons_.row(r + 2) = gamma_[k].row(2);
      cons_.row(r + 3) = -gamma_[k].row(2);
    }
    for (int i = 0; i < n; ++i) {
      cons_(4 * n + 2 * i, i) = 1.0;
      cons_(4 * n + 2 * i + 1, i) = -1.0;
    }
    for (int r = 0; r < m; ++r) {
      row_scale_(r) = cons_.row(r).lpNorm<Eigen::Infinity>();
      cons_.row(r) /= row_scale_(r);
    }
  }

  [[nodiscard]] const MpcParams& params() const { return params_; }
  [[nodiscard]] const Limits& limits() const { return limits_; }
  [[nodiscard]] const Eigen::MatrixXd& hessian() const { return hessian_; }

  /// Linear term of 1/2 a'Ha + f'a (unscaled).
  [[nodiscard]] Eigen::VectorXd gradient_at_zero(const GraspState& s) const {
    const int n = params_.horizon;
    const Eigen::Vector3d x0(s.c, s.p, s.v);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    for (int k = 0; k <= n; ++k) {
      const double w = (k == n) ? params_.terminal_weight : 1.0;
      const Eigen::Vector3d xk = phi_[k] * x0;
      const double ec = xk(0) - params_.c_desired;
      const double ev = xk(2);
      f += 2.0 * w * (params_.q_c * ec * gamma_[k].row(0).transpose() +
                      params_.q_v * ev * gamma_[k].row(2).transpose());
    }
    return f;
  }

  /// Scaled constraint offsets d in C a + d >= 0.
  [[nodiscard]] Eigen::VectorXd offsets(const GraspState& s) const {
    const int n = params_.horizon;
    const Eigen::Vector3d x0(s.c, s.p, s.v);
    Eigen::VectorXd d(6 * n);
    for (int k = 1; k <= n; ++k) {
      const Eigen::Vector3d xk = phi_[k] * x0;
      const int r = 4 * (k - 1);
      d(r) = xk(1) - limits_.p_min;
      d(r + 1) = limits_.p_max - xk(1);
      d(r + 2) = xk(2) + limits_.v_max;
      d(r + 3) = limits_.v_max - xk(2);
    }
    for (int i = 0; i < n; ++i) {
      d(4 * n + 2 * i) = limits_.a_max;
      d(4 * n + 2 * i + 1) = limits_.a_max;
    }
    return d.cwiseQuotient(row_scale_);
  }

  [[nodiscard]] ControlPlan solve(const GraspState& state) const {
    const int n = params_.horizon;
    const Eigen::VectorXd f = gradient_at_zero(state) / obj_scale_;
    Eigen::VectorXd d = offsets(state);

    ControlPlan plan;
    auto result = qp::solve(hessian_scaled_, f, cons_, d);
    if (result.status == qp::Status::kOptimal) {
      plan.kkt_residual = qp::kkt_residual(hessian_scaled_, f, cons_, d, result.x, result.multipliers);
    } else {
      // Clamp-and-report: keep only the input box, which is always feasible.
      const Eigen::MatrixXd box = cons_.bottomRows(2 * n);
      const Eigen::VectorXd dbox = d.tail(2 * n);
      result = qp::solve(hessian_scaled_, f, box, dbox);
      plan.status = PlanStatus::kInfeasible;
      plan.kkt_residual = qp::kkt_residual(hessian_scaled_, f, box, dbox, result.x, result.multipliers);
    }
    plan.iterations = result.iterations;
    plan.a.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      plan.a[i] = std::clamp(result.x(i), -limits_.a_max, limits_.a_max);
    }
    plan.cost = cost(state, plan.a, params_);
    return plan;
  }

 private:
  MpcParams params_;
  Limits limits_;
  std::vector<Eigen::Matrix3d> phi_;
  std::vector<Eigen::MatrixXd> gamma_;
  Eigen::MatrixXd hessian_;
  Eigen::MatrixXd hessian_scaled_;
  double obj_scale_ = 1.0;
  Eigen::MatrixXd cons_;
  Eigen::VectorXd row_scale_;
};

inline ControlPlan solve(const GraspState& state, const MpcParams& params, const Limits& limits) {
  if (!limits.contains(state, 1e-9)) throw std::domain_error("solve: state outside limits");
  return Controller(params, limits).solve(state);
}

/// Gripper kinematics (p, v rows of the model), held inside the travel limits.
inline GraspState apply_input(const GraspState& s, double a, const MpcParams& params,
                              const Limits& limits) {
  GraspState next = s;
  const double dt = params.dt;
  next.p = s.p + dt * s.v + 0.5 * dt * dt * a;
  next.v = s.v + dt * a;
  if (next.p < limits.p_min || next.p > limits.p_max) {
    next.p = std::clamp(next.p, limits.p_min, limits.p_max);
    next.v = 0.0;
  }
  next.tick = s.tick + 1;
  return next;
}

struct TraceRow {
  std::int64_t tick = 0;
  double t = 0.0;
  double c = 0.0;
  double p = 0.0;
  double v = 0.0;
  double a = 0.0;
  double cost = 0.0;
  double kkt = 0.0;
};

struct ClosedLoopTrace {
  std::vector<TraceRow> rows;
  int infeasible_ticks = 0;
};

inline constexpr const char* kTraceCsvHeader = "tick,t_s,c_px,p_mm,v_mms,a_mms2,cost,kkt";

inline std::string trace_csv_row(const TraceRow& r) {
  return std::to_string(r.tick) + ',' + fmt_num(r.t) + ',' + fmt_num(r.c) + ',' + fmt_num(r.p) +
         ',' + fmt_num(r.v) + ',' + fmt_num(r.a) + ',' + fmt_num(r.cost) + ',' + fmt_num(r.kkt);
}

/// A contact plant maps the gripper opening to a contact-area reading, once per tick.
template <class P>
concept ContactPlantLike = requires(P plant, double p) {
  { plant.step(p) } -> std::convertible_to<double>;
};

template <ContactPlantLike Plant>
ClosedLoopTrace run_closed_loop(Plant& plant, const MpcParams& params, const Limits& limits,
                                GraspState initial, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("run_closed_loop: duration must be > 0");
  const Controller controller(params, limits);
  const auto ticks = static_cast<std::int64_t>(std::llround(duration * params.freq));
  ClosedLoopTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(ticks));
  GraspState s = initial;
  for (std::int64_t k = 0; k < ticks; ++k) {
    s.c = plant.step(s.p);
    const ControlPlan plan = controller.solve(s);
    if (plan.status == PlanStatus::kInfeasible) ++trace.infeasible_ticks;
    trace.rows.push_back({s.tick, static_cast<double>(s.tick) * params.dt, s.c, s.p, s.v,
                          plan.a.front(), plan.cost, plan.kkt_residual});
    s = apply_input(s, plan.a.front(), params, limits);
  }
  return trace;
}

/// First time after which c stays within c_desired*(1 +- band) with |v| < v_tol
/// to the end of the trace; nullopt if it never settles.
inline std::optional<double> settling_time(const ClosedLoopTrace& trace, double c_desired, double band,
                                           double v_tol) {
  std::optional<double> t;
  for (const auto& r : trace.rows) {
    const bool inside = std::abs(r.c - c_desired) <= band * c_desired && std::abs(r.v) < v_tol;
    if (!inside) t.reset();
    else if (!t) t = r.t;
  }
  return t;
}

/// Largest |c - c_desired| / c_desired over rows with t >= from.
inline double max_relative_deviation(const ClosedLoopTrace& trace, double c_desired, double from) {
  double worst = 0.0;
  for (const auto& r : trace.rows)
    if (r.t >= from) worst = std::max(worst, std::abs(r.c - c_desired) / c_desired);
  return worst;
}

}  // namespace tacgrip::mpc

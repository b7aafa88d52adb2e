// Rubbing / singulation maneuver: stroke-range law, servo retract rule,
// rolling kinematics of the held object, stochastic grain shedding, and full
// seeded singulation trials with the tactile MPC holding the grasp.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tacgrip/format.hpp"
#include "tacgrip/gel_contact.hpp"
#include "tacgrip/seed.hpp"
#include "tacgrip/tactile_mpc.hpp"

namespace tacgrip::rub {

inline constexpr double kPi = gel::kPi;
inline constexpr double kActuatorTravel = 30.0;     // mm, linear finger actuator
inline constexpr double kServoRange = kPi / 4.0;    // +-45 deg
inline constexpr double kRetractThreshold = 15.0;   // mm

enum class ObjectKind { kSphere, kEllipse, kIrregular };

inline const char* to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kSphere: return "sphere";
    case ObjectKind::kEllipse: return "ellipse";
    case ObjectKind::kIrregular: return "irregular";
  }
  return "?";
}

/// Effective width presented to the two fingers as a function of the
/// object's roll angle. Periodic with period pi.
struct ObjectProfile {
  ObjectKind kind = ObjectKind::kSphere;
  std::string label;
  double nominal_width = 0.0;  // mm
  double semi_major = 0.0;     // ellipse a
  double semi_minor = 0.0;     // ellipse b
  std::vector<double> table;   // irregular: widths sampled uniformly on [0, pi)

  static ObjectProfile sphere(std::string label, double diameter) {
    ObjectProfile p;
    p.kind = ObjectKind::kSphere;
    p.label = std::move(label);
    p.nominal_width = diameter;
    p.validate();
    return p;
  }
  /// Widths are full axes (2a, 2b); width(0) is the minor axis.
  static ObjectProfile ellipse(std::string label, double major, double minor) {
    ObjectProfile p;
    p.kind = ObjectKind::kEllipse;
    p.label = std::move(label);
    p.semi_major = 0.5 * major;
    p.semi_minor = 0.5 * minor;
    p.nominal_width = major;
    p.validate();
    return p;
  }
  static ObjectProfile irregular(std::string label, std::vector<double> widths) {
    ObjectProfile p;
    p.kind = ObjectKind::kIrregular;
    p.label = std::move(label);
    p.table = std::move(widths);
    if (!p.table.empty()) p.nominal_width = *std::max_element(p.table.begin(), p.table.end());
    p.validate();
    return p;
  }

  void validate() const {
    switch (kind) {
      case ObjectKind::kSphere:
        if (!(nominal_width > 0.0)) throw std::invalid_argument("sphere diameter must be > 0");
        break;
      case ObjectKind::kEllipse:
        if (!(semi_minor > 0.0) || semi_major < semi_minor)
          throw std::invalid_argument("ellipse needs major >= minor > 0");
        break;
      case ObjectKind::kIrregular:
        if (table.size() < 2) throw std::invalid_argument("irregular profile needs >= 2 samples");
        for (double w : table)
          if (!(w > 0.0)) throw std::invalid_argument("irregular widths must be > 0");
        break;
    }
  }

  [[nodiscard]] double width(double phi) const {
    switch (kind) {
      case ObjectKind::kSphere:
        return nominal_width;
      case ObjectKind::kEllipse: {
        const double s = std::sin(phi);
        const double c = std::cos(phi);
        return 2.0 * std::sqrt(semi_major * semi_major * s * s + semi_minor * semi_minor * c * c);
      }
      case ObjectKind::kIrregular: {
        const double n = static_cast<double>(table.size());
        double u = std::fmod(phi, kPi);
        if (u < 0.0) u += kPi;
        const double pos = u / kPi * n;
        const auto i0 = static_cast<std::size_t>(pos) % table.size();
        const std::size_t i1 = (i0 + 1) % table.size();
        const double frac = pos - std::floor(pos);
        return table[i0] + frac * (table[i1] - table[i0]);
      }
    }
    return nominal_width;
  }
};

struct RubConfig {
  double k_p = 0.5;
  double b = 2.0;  // mm
  double retract_threshold = kRetractThreshold;
  double retract_angle = 10.0 * kPi / 180.0;
  double stroke_freq = 1.0;  // Hz
  int n_strokes = 6;
  double drop_area_floor = 2200.0;  // px, 40% of the default c_desired
  double drop_dwell = 0.25;         // s

  void validate(double c_desired) const {
    if (!(stroke_freq > 0.0)) throw std::invalid_argument("RubConfig: stroke_freq must be > 0");
    if (n_strokes < 0) throw std::invalid_argument("RubConfig: n_strokes must be >= 0");
    if (!(drop_area_floor > 0.0) || !(drop_area_floor < c_desired))
      throw std::invalid_argument("RubConfig: drop_area_floor must lie in (0, c_desired)");
    if (!(drop_dwell >= 0.0)) throw std::invalid_argument("RubConfig: drop_dwell must be >= 0");
    if (std::abs(retract_angle) > kServoRange)
      throw std::invalid_argument("RubConfig: retract_angle outside +-45 deg");
  }
};

/// Actuator stroke range L = k_p * p_stable + b, limited to the actuator travel.
inline double stroke_range(double p_stable, const RubConfig& cfg) {
  if (!(p_stable >= 0.0)) throw std::domain_error("stroke_range: p_stable must be >= 0");
  return std::clamp(cfg.k_p * p_stable + cfg.b, 0.0, kActuatorTravel);
}

/// Servo retract for small objects (strictly below the threshold).
inline double servo_policy(double nominal_width, const RubConfig& cfg) {
  if (!(nominal_width > 0.0)) throw std::domain_error("servo_policy: width must be > 0");
  if (std::abs(cfg.retract_angle) > kServoRange)
    throw std::invalid_argument("servo_policy: retract_angle outside +-45 deg");
  return nominal_width < cfg.retract_threshold ? cfg.retract_angle : 0.0;
}

struct RollState {
  double phi = 0.0;  // rad
  double width = 0.0;  // mm
};

/// Pure rolling under opposed fingertip motion.
inline RollState rub_step(double phi, double stroke_delta, const ObjectProfile& profile) {
  if (!std::isfinite(stroke_delta)) throw std::domain_error("rub_step: stroke must be finite");
  const double next = phi + stroke_delta / (0.5 * profile.width(phi));
  return {next, profile.width(next)};
}

/// Grains trapped between pad and object.
class GrainField {
 public:
  GrainField() : rng_(0) {}
  GrainField(int n_grains, double removal_rate, std::uint64_t seed)
      : n_grains_(n_grains), removal_rate_(removal_rate), seed_(seed), rng_(seed) {
    if (n_grains < 0) throw std::invalid_argument("GrainField: n_grains must be >= 0");
    if (!(removal_rate >= 0.0)) throw std::invalid_argument("GrainField: removal_rate must be >= 0");
  }

  [[nodiscard]] int n_grains() const { return n_grains_; }
  [[nodiscard]] double removal_rate() const { return removal_rate_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Each grain leaves independently with probability
  /// min(1, rate * |stroke| * area / c_desired).
  [[nodiscard]] GrainField step(double stroke_delta, double contact_area, double c_desired) const {
    if (!(contact_area >= 0.0)) throw std::domain_error("grain_step: contact_area must be >= 0");
    GrainField next = *this;
    if (stroke_delta == 0.0 || n_grains_ == 0 || contact_area == 0.0) return next;
    const double q =
        std::min(1.0, removal_rate_ * std::abs(stroke_delta) * contact_area / c_desired);
    std::binomial_distribution<int> removed(n_grains_, q);
    next.n_grains_ -= removed(next.rng_);
    return next;
  }

 private:
  int n_grains_ = 0;
  double removal_rate_ = 0.0;
  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_;
};

inline GrainField grain_step(const GrainField& field, double stroke_delta, double contact_area,
                             double c_desired) {
  return field.step(stroke_delta, contact_area, c_desired);
}

/// Gel/object response shared by all objects in a batch.
struct GelResponse {
  double c_max = 20000.0;
  double indent_sat = 20.0;
  double noise_sigma = 0.0;
};

struct TrialSetup {
  mpc::MpcParams mpc;
  mpc::Limits limits;
  GelResponse gel;
  RubConfig rub;
  int n_grains = 50;
  double removal_rate = 0.02;  // per mm of stroke
  double close_timeout = 3.0;  // s
  double open_margin = 5.0;    // mm beyond the object width at the start
  double settle_hold = 0.25;   // s inside the settle band before rubbing starts
};

struct RubTraceRow {
  mpc::TraceRow mpc;
  double phi = 0.0;
  double width = 0.0;
  int n_grains = 0;
};

inline constexpr const char* kRubTraceCsvHeader =
    "tick,t_s,c_px,p_mm,v_mms,a_mms2,cost,kkt,phi_rad,w_mm,n_grains";

inline std::string rub_trace_csv_row(const RubTraceRow& r) {
  return mpc::trace_csv_row(r.mpc) + ',' + fmt_num(r.phi) + ',' + fmt_num(r.width) + ',' +
         std::to_string(r.n_grains);
}

struct TrialOutcome {
  bool retained = true;
  bool aborted = false;  // controller reported infeasibility
  int initial_grains = 0;
  int residual_grains = 0;
  double min_area = 0.0;  // px, over the rubbing phase
  int strokes_executed = 0;
  double p_stable = 0.0;
  double stroke_range = 0.0;
  double servo_angle = 0.0;
  std::string trace_path;
  std::vector<RubTraceRow> trace;
};

/// Close under MPC until settled, then rub with n sinusoidal strokes of
/// amplitude L/2 while the MPC keeps regulating the contact area.
inline TrialOutcome run_singulation_trial(const ObjectProfile& profile, const TrialSetup& setup,
                                          GrainField grains, std::uint64_t seed) {
  profile.validate();
  setup.rub.validate(setup.mpc.c_desired);
  const mpc::Controller controller(setup.mpc, setup.limits);
  const auto& params = controller.params();
  const auto& limits = controller.limits();
  const double dt = params.dt;
  const double band = 0.02 * params.c_desired;

  std::mt19937_64 pose_rng(substream(seed, 1));
  double phi = std::uniform_real_distribution<double>(0.0, kPi)(pose_rng);
  double width = profile.width(phi);
  gel::ContactPlant plant(width, setup.gel.c_max, setup.gel.indent_sat, setup.gel.noise_sigma,
                          substream(seed, 2));

  TrialOutcome out;
  out.initial_grains = grains.n_grains();
  out.servo_angle = servo_policy(profile.nominal_width, setup.rub);

  mpc::GraspState s{0.0, std::clamp(width + setup.open_margin, limits.p_min, limits.p_max), 0.0, 0};
  auto record = [&](const mpc::ControlPlan& plan) {
    out.trace.push_back({{s.tick, static_cast<double>(s.tick) * dt, s.c, s.p, s.v, plan.a.front(),
                          plan.cost, plan.kkt_residual},
                         phi, width, grains.n_grains()});
  };

  // Close until the area holds inside the settle band.
  const auto close_ticks = static_cast<std::int64_t>(std::llround(setup.close_timeout / dt));
  const auto hold_ticks = static_cast<std::int64_t>(std::llround(setup.settle_hold / dt));
  std::int64_t in_band = 0;
  for (std::int64_t k = 0; k < close_ticks && in_band < hold_ticks; ++k) {
    s.c = plant.step(s.p);
    const auto plan = controller.solve(s);
    record(plan);
    if (plan.status == mpc::PlanStatus::kInfeasible) {
      out.aborted = true;
      out.retained = false;
      out.residual_grains = grains.n_grains();
      return out;
    }
    in_band = (std::abs(s.c - params.c_desired) <= band && std::abs(s.v) < 0.05) ? in_band + 1 : 0;
    s = mpc::apply_input(s, plan.a.front(), params, limits);
  }
  out.p_stable = s.p;
  out.stroke_range = stroke_range(std::max(0.0, s.p), setup.rub);
  out.min_area = s.c;

  const double amplitude = 0.5 * out.stroke_range;
  const double omega = 2.0 * kPi * setup.rub.stroke_freq;
  const auto rub_ticks = static_cast<std::int64_t>(
      std::llround(setup.rub.n_strokes / setup.rub.stroke_freq / dt));
  double below = 0.0;
  double x_prev = 0.0;
  for (std::int64_t k = 0; k < rub_ticks; ++k) {
    const double x = amplitude * std::sin(omega * static_cast<double>(k + 1) * dt);
    const double delta = x - x_prev;
    x_prev = x;
    const RollState roll = rub_step(phi, delta, profile);
    phi = roll.phi;
    width = roll.width;
    plant.object_width = width;

    s.c = plant.step(s.p);
    const auto plan = controller.solve(s);
    grains = grains.step(delta, s.c, params.c_desired);
    record(plan);
    out.min_area = std::min(out.min_area, s.c);
    out.strokes_executed = std::min(
        setup.rub.n_strokes,
        static_cast<int>(std::floor(static_cast<double>(k) * dt * setup.rub.stroke_freq)) + 1);
    if (plan.status == mpc::PlanStatus::kInfeasible) {
      out.aborted = true;
      out.retained = false;
      break;
    }
    below = (s.c < setup.rub.drop_area_floor) ? below + dt : 0.0;
    if (below >= setup.rub.drop_dwell - 1e-12) {
      out.retained = false;
      break;
    }
    s = mpc::apply_input(s, plan.a.front(), params, limits);
  }
  out.residual_grains = grains.n_grains();
  return out;
}

/// Reference object set. Sizes are desk-scale stand-ins.
inline std::vector<ObjectProfile> default_catalog() {
  return {
      ObjectProfile::sphere("tree_seed_1", 10.0),
      ObjectProfile::sphere("tree_seed_2", 11.0),
      ObjectProfile::ellipse("almond", 14.0, 9.0),
      ObjectProfile::ellipse("peanut", 16.0, 10.0),
      ObjectProfile::sphere("soft_ball", 30.0),
      ObjectProfile::sphere("pla_ball_1", 20.0),
      ObjectProfile::sphere("pla_ball_2", 20.0),
      ObjectProfile::sphere("pla_ball_3", 20.0),
      ObjectProfile::irregular("artificial_strawberry",
                               {30.0, 32.0, 35.0, 38.0, 36.0, 33.0, 31.0, 29.0}),
      ObjectProfile::sphere("golf_ball", 41.0),
  };
}

}  // namespace tacgrip::rub

// Tactile card exploration and insertion as a finite-state machine over a
// simulated card, gripper and reader.
//
//   Scoop -> OrientCheck -> (FlipInHand -> OrientCheck)* -> ExploreX* ->
//   RotateVertical -> ExploreY* -> Insert -> Done
//
// Any phase may end in Fail. Card coordinates: x along the long edge from the
// leading (inserted) end, y along the short edge. Regrasp steps are slip-free.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tacgrip/format.hpp"
#include "tacgrip/gel_contact.hpp"
#include "tacgrip/scoop_statics.hpp"
#include "tacgrip/seed.hpp"

namespace tacgrip::card {

inline constexpr double kPi = gel::kPi;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct CardSpec {
  double length = 85.5;
  double width = 54.0;
  double thickness = 0.8;
  double raised_thickness = 1.2;
  Interval digit_band{8.0, 78.0};  // along the long edge; hi is the last digit's end
  double digit_row_edge = 30.0;    // y of the digit-row boundary tracked along the short edge

  void validate() const {
    if (!(length > 0.0 && width > 0.0)) throw std::invalid_argument("CardSpec: size must be > 0");
    if (!(digit_band.lo >= 0.0 && digit_band.lo < digit_band.hi && digit_band.hi <= length))
      throw std::invalid_argument("CardSpec: digit band must lie inside [0, length]");
    if (!(digit_row_edge > 0.0 && digit_row_edge < width))
      throw std::invalid_argument("CardSpec: digit row edge must lie inside (0, width)");
  }

  /// Thickness at the leading short edge (x = 0): raised when digits reach it.
  [[nodiscard]] double leading_edge_thickness() const {
    return digit_band.lo <= 0.0 ? raised_thickness : thickness;
  }
};

struct ReaderSpec {
  double slot_length = 56.0;
  double slot_width = 1.5;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  void validate(const CardSpec& card) const {
    if (!(slot_length > 0.0 && slot_width > 0.0))
      throw std::invalid_argument("ReaderSpec: slot dimensions must be > 0");
    if (!(slot_length > card.width))
      throw std::invalid_argument("ReaderSpec: slot shorter than the card's leading edge");
  }
};

enum class Phase { kScoop, kOrientCheck, kFlipInHand, kExploreX, kRotateVertical, kExploreY, kInsert, kDone, kFail };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::kScoop: return "Scoop";
    case Phase::kOrientCheck: return "OrientCheck";
    case Phase::kFlipInHand: return "FlipInHand";
    case Phase::kExploreX: return "ExploreX";
    case Phase::kRotateVertical: return "RotateVertical";
    case Phase::kExploreY: return "ExploreY";
    case Phase::kInsert: return "Insert";
    case Phase::kDone: return "Done";
    case Phase::kFail: return "Fail";
  }
  return "?";
}

/// Edges of the declared transition graph (self-loops for repeated steps).
inline bool legal_transition(Phase from, Phase to) {
  if (to == Phase::kFail) return from != Phase::kDone && from != Phase::kFail;
  switch (from) {
    case Phase::kScoop: return to == Phase::kOrientCheck;
    case Phase::kOrientCheck: return to == Phase::kFlipInHand || to == Phase::kExploreX;
    case Phase::kFlipInHand: return to == Phase::kOrientCheck;
    case Phase::kExploreX: return to == Phase::kExploreX || to == Phase::kRotateVertical;
    case Phase::kRotateVertical: return to == Phase::kExploreY;
    case Phase::kExploreY: return to == Phase::kExploreY || to == Phase::kInsert;
    case Phase::kInsert: return to == Phase::kDone;
    default: return false;
  }
}

enum class FailReason { kNone, kScoopInfeasible, kSensorInconsistent, kBudgetExhausted, kTargetBehind, kRotationUnsafe, kMisaligned };

inline const char* to_string(FailReason r) {
  switch (r) {
    case FailReason::kNone: return "none";
    case FailReason::kScoopInfeasible: return "scoop_infeasible";
    case FailReason::kSensorInconsistent: return "sensor_inconsistent";
    case FailReason::kBudgetExhausted: return "budget_exhausted";
    case FailReason::kTargetBehind: return "target_behind";
    case FailReason::kRotationUnsafe: return "rotation_unsafe";
    case FailReason::kMisaligned: return "misaligned";
  }
  return "?";
}

enum class Side { kDigits, kBack };       // card face toward the sensor
enum class EdgeDown { kLong, kShort };    // card edge resting on the table

struct CardPose {
  Side facing = Side::kDigits;
  EdgeDown edge_down = EdgeDown::kLong;
  double yaw = 0.0;  // rad, card edges relative to the pad axes
};

struct ExplorationState {
  Phase phase = Phase::kScoop;
  double grasp_x = 0.0;  // mm, true grasp point on the card
  double grasp_y = 0.0;
  CardPose pose;
  double last_edge_reading = std::numeric_limits<double>::quiet_NaN();
  double x_estimate = std::numeric_limits<double>::quiet_NaN();
  double y_estimate = std::numeric_limits<double>::quiet_NaN();
  int steps_taken = 0;
  int consecutive_flips = 0;
  double normal_offset = 0.0;  // card mid-plane offset from the finger centerline, mm
  double last_step = 0.0;
  std::string last_action = "none";
  FailReason reason = FailReason::kNone;
  double miss_distance = 0.0;

  void fail(FailReason why) {
    phase = Phase::kFail;
    reason = why;
  }
};

struct ExploreConfig {
  std::array<double, 3> steps{-2.0, -4.0, -8.0};
  double x_d = 80.0;
  double y_d = 27.0;
  double edge_tolerance = 1.0;
  int max_steps = 64;
  double rotate_margin = 8.0;  // max distance of the grasp from the card's far end

  void validate(const CardSpec& card) const {
    for (double s : steps)
      if (!(s < 0.0)) throw std::invalid_argument("ExploreConfig: steps must be negative");
    if (!(x_d > 0.0 && x_d < card.length)) throw std::invalid_argument("ExploreConfig: x_d out of card");
    if (!(y_d > 0.0 && y_d < card.width)) throw std::invalid_argument("ExploreConfig: y_d out of card");
    if (max_steps <= 0) throw std::invalid_argument("ExploreConfig: max_steps must be > 0");
    if (!(edge_tolerance >= 0.0)) throw std::invalid_argument("ExploreConfig: edge_tolerance must be >= 0");
  }
};

/// Gel pad pressed on the grasped card.
struct SensorModel {
  gel::GelPadSpec pad;
  double base_indent = 0.1;  // mm over the flat card face
  double relief = gel::kDigitRelief;
  double relief_threshold = 0.3;  // separates embossed digits from the flat face
  std::int64_t min_relief_px = 50;
};

struct CardWorld {
  CardSpec card;
  SensorModel sensor;
};

enum class Orientation { kDigitsPresent, kDigitsAbsent };

/// Embossed digits show as cells raised above the relief threshold.
inline Orientation detect_orientation(const gel::TactileFrame& frame, double relief_threshold = 0.3,
                                      std::int64_t min_pixels = 50) {
  const auto raised = std::count_if(frame.depth.begin(), frame.depth.end(),
                                    [&](double d) { return d >= relief_threshold; });
  return raised >= min_pixels ? Orientation::kDigitsPresent : Orientation::kDigitsAbsent;
}

namespace detail {

struct TrackedEdge {
  double edge = 0.0;   // card coordinate of the relief boundary
  double grasp = 0.0;  // true grasp coordinate along the same axis
};

inline TrackedEdge tracked_edge(const ExplorationState& s, const CardSpec& card) {
  if (s.pose.edge_down == EdgeDown::kShort) return {card.digit_row_edge, s.grasp_y};
  return {card.digit_band.hi, s.grasp_x};
}

}  // namespace detail

/// Pad image at the current grasp. The pad's row axis runs along the axis
/// being explored; digits appear as a relief half-plane behind the tracked edge.
inline gel::TactileFrame render_card_frame(const ExplorationState& s, const CardWorld& world) {
  const auto& sensor = world.sensor;
  const double off_pad = -(sensor.pad.half_height_mm() + sensor.pad.half_width_mm() + 1.0);
  if (s.pose.facing == Side::kBack) {
    return gel::render_edge_contact(sensor.pad, off_pad, 0.0, sensor.base_indent);
  }
  const auto te = detail::tracked_edge(s, world.card);
  const double edge_offset = te.grasp - te.edge;
  // Base contact covers the pad; the relief starts at the tracked edge.
  return gel::render_edge_contact(
      sensor.pad, off_pad, s.pose.yaw, sensor.base_indent,
      gel::ReliefBand{edge_offset - off_pad, std::numeric_limits<double>::infinity(), sensor.relief});
}

/// Tactile estimate of the grasp coordinate along the explored axis. When the
/// tracked edge is off-pad the estimate saturates toward the unexplored side,
/// so a step chosen from it never overshoots.
inline double read_grasp_estimate(const ExplorationState& s, const CardWorld& world) {
  const auto frame = render_card_frame(s, world);
  const auto te = detail::tracked_edge(s, world.card);
  const double reach = world.sensor.pad.half_height_mm();
  const auto patch = gel::extract_patch(frame, world.sensor.relief_threshold);
  if (patch.area == 0) return te.edge + reach;
  if (patch.area == world.sensor.pad.cell_count() || !patch.edge) return te.edge - reach;
  return te.edge + patch.edge->offset_mm;
}

/// Largest-magnitude step that does not pass the target; the smallest step
/// is still allowed when it passes by no more than the tolerance.
inline std::optional<double> choose_step(double distance, const ExploreConfig& cfg) {
  std::array<double, 3> by_size = cfg.steps;
  std::sort(by_size.begin(), by_size.end());  // most negative first
  for (double s : by_size) {
    if (-s <= distance) return s;
  }
  if (-by_size.back() <= distance + cfg.edge_tolerance) return by_size.back();
  return std::nullopt;
}

/// Scoop the card off the table; requires the statics to predict a
/// counterclockwise flip.
struct TableFriction {
  double mu1 = 0.3;  // nail-card
  double mu2 = 0.4;  // card-table
};

struct InitialPose {
  double x_offset = 0.0;  // mm along the long edge
  double y_offset = 0.0;  // mm along the short edge
  double yaw = 0.0;       // rad
  Side facing = Side::kDigits;
};

struct PoseRange {
  double x = 10.0;
  double y = 4.0;
  double yaw = 5.0 * kPi / 180.0;

  [[nodiscard]] bool contains(const InitialPose& p) const {
    return std::abs(p.x_offset) <= x && std::abs(p.y_offset) <= y && std::abs(p.yaw) <= yaw;
  }
};

inline constexpr double kNominalGraspX = 40.0;
inline constexpr double kNominalGraspY = 10.0;

inline ExplorationState scoop_card(const CardSpec& card, const TableFriction& friction,
                                   const scoop::ScoopProblem& geom, const InitialPose& pose = {},
                                   const SensorModel& sensor = {}) {
  card.validate();
  ExplorationState s;
  s.phase = Phase::kScoop;
  scoop::ScoopProblem p = geom;
  p.mu1 = friction.mu1;
  p.mu2 = friction.mu2;
  s.last_action = "scoop";
  if (scoop::flip_predicate(p) != scoop::FlipVerdict::kFlipsCcw) {
    s.fail(FailReason::kScoopInfeasible);
    return s;
  }
  s.grasp_x = std::clamp(kNominalGraspX + pose.x_offset, 0.0, card.length);
  s.grasp_y = std::clamp(kNominalGraspY + pose.y_offset, 0.0, card.width);
  s.pose = CardPose{pose.facing, EdgeDown::kLong, pose.yaw};
  s.normal_offset = 0.5 * sensor.base_indent;
  s.phase = Phase::kOrientCheck;
  return s;
}

inline ExplorationState check_orientation(ExplorationState s, const CardWorld& world) {
  if (s.phase != Phase::kOrientCheck) throw std::logic_error("check_orientation: phase must be OrientCheck");
  const auto verdict = detect_orientation(render_card_frame(s, world), world.sensor.relief_threshold,
                                          world.sensor.min_relief_px);
  s.last_action = "orient_check";
  s.last_step = 0.0;
  if (verdict == Orientation::kDigitsPresent) {
    s.consecutive_flips = 0;
    s.phase = Phase::kExploreX;
  } else {
    s.phase = Phase::kFlipInHand;
  }
  return s;
}

/// In-hand reorientation. A second flip in a row without the digits showing
/// means the sensor disagrees with the model.
inline ExplorationState flip_in_hand(ExplorationState s) {
  if (s.phase != Phase::kFlipInHand) throw std::logic_error("flip_in_hand: phase must be FlipInHand");
  s.pose.facing = (s.pose.facing == Side::kDigits) ? Side::kBack : Side::kDigits;
  s.last_action = "flip";
  s.last_step = 0.0;
  if (++s.consecutive_flips >= 2) {
    s.fail(FailReason::kSensorInconsistent);
  } else {
    s.phase = Phase::kOrientCheck;
  }
  return s;
}

namespace detail {

inline ExplorationState explore_step(ExplorationState s, const CardWorld& world,
                                     const ExploreConfig& cfg, double target, Phase next) {
  const double estimate = read_grasp_estimate(s, world);
  s.last_edge_reading = estimate;
  s.last_step = 0.0;
  const double distance = target - estimate;
  if (std::abs(distance) <= cfg.edge_tolerance) {
    s.last_action = "converged";
    s.phase = next;
    return s;
  }
  const auto step = choose_step(distance, cfg);
  if (!step) {
    s.last_action = "stop";
    s.fail(FailReason::kTargetBehind);
    return s;
  }
  if (s.steps_taken >= cfg.max_steps) {
    s.last_action = "stop";
    s.fail(FailReason::kBudgetExhausted);
    return s;
  }
  // Release, shift the grasp by |step| along the card, grasp again.
  s.last_action = "regrasp";
  s.last_step = *step;
  ++s.steps_taken;
  if (s.pose.edge_down == EdgeDown::kLong) {
    s.grasp_x = std::min(s.grasp_x - *step, world.card.length);
  } else {
    s.grasp_y = std::min(s.grasp_y - *step, world.card.width);
  }
  return s;
}

}  // namespace detail

inline ExplorationState step_explore_x(ExplorationState s, const CardWorld& world,
                                       const ExploreConfig& cfg) {
  if (s.phase != Phase::kExploreX || s.pose.edge_down != EdgeDown::kLong)
    throw std::logic_error("step_explore_x: needs phase ExploreX with the long edge down");
  s = detail::explore_step(std::move(s), world, cfg, cfg.x_d, Phase::kRotateVertical);
  if (s.phase == Phase::kRotateVertical) s.x_estimate = s.last_edge_reading;
  return s;
}

/// Gravity-assisted rotation about a grasp near the card's far end.
inline ExplorationState rotate_vertical(ExplorationState s, const CardSpec& card,
                                        const ExploreConfig& cfg) {
  if (s.phase != Phase::kRotateVertical || s.pose.edge_down != EdgeDown::kLong)
    throw std::logic_error("rotate_vertical: card is not waiting for rotation");
  s.last_action = "rotate";
  s.last_step = 0.0;
  if (card.length - s.grasp_x > cfg.rotate_margin) {
    s.fail(FailReason::kRotationUnsafe);
    return s;
  }
  s.pose.edge_down = EdgeDown::kShort;
  s.phase = Phase::kExploreY;
  return s;
}

inline ExplorationState step_explore_y(ExplorationState s, const CardWorld& world,
                                       const ExploreConfig& cfg) {
  if (s.phase != Phase::kExploreY || s.pose.edge_down != EdgeDown::kShort)
    throw std::logic_error("step_explore_y: needs phase ExploreY with the short edge down");
  s = detail::explore_step(std::move(s), world, cfg, cfg.y_d, Phase::kInsert);
  if (s.phase == Phase::kInsert) s.y_estimate = s.last_edge_reading;
  return s;
}

/// Geometric clearance check after the final tactile correction. Lateral
/// error is along the slot length, normal error across the slot width.
inline ExplorationState insert(ExplorationState s, const CardSpec& card, const ReaderSpec& reader) {
  if (s.phase != Phase::kInsert) throw std::logic_error("insert: phase must be Insert");
  reader.validate(card);
  s.last_action = "insert";
  s.last_step = 0.0;
  const double normal_clearance = 0.5 * (reader.slot_width - card.leading_edge_thickness());
  const double lateral_clearance = 0.5 * (reader.slot_length - card.width);
  const double lateral = std::isnan(s.y_estimate) ? 0.0 : s.grasp_y - s.y_estimate;
  if (std::abs(s.normal_offset) > normal_clearance) {
    s.miss_distance = s.normal_offset;
    s.fail(FailReason::kMisaligned);
  } else if (std::abs(lateral) > lateral_clearance) {
    s.miss_distance = lateral;
    s.fail(FailReason::kMisaligned);
  } else {
    s.phase = Phase::kDone;
  }
  return s;
}

struct CardTraceRow {
  int step = 0;
  Phase phase = Phase::kScoop;
  double grasp_x = 0.0;
  double grasp_y = 0.0;
  double edge = 0.0;
  std::string action;
  double step_mm = 0.0;
  Phase next = Phase::kScoop;
  FailReason reason = FailReason::kNone;
};

inline constexpr const char* kCardTraceCsvHeader =
    "step,phase,grasp_x_mm,grasp_y_mm,edge_mm,action,step_mm,verdict";

inline std::string card_trace_csv_row(const CardTraceRow& r) {
  const std::string verdict = r.next == Phase::kFail ? std::string("Fail:") + to_string(r.reason)
                                                     : std::string(to_string(r.next));
  return std::to_string(r.step) + ',' + to_string(r.phase) + ',' + fmt_num(r.grasp_x) + ',' +
         fmt_num(r.grasp_y) + ',' + (std::isnan(r.edge) ? std::string() : fmt_num(r.edge)) + ',' +
         r.action + ',' + fmt_num(r.step_mm) + ',' + verdict;
}

struct InsertionSetup {
  CardWorld world;
  ExploreConfig explore;
  ReaderSpec reader;
  TableFriction friction;
  scoop::ScoopProblem scoop_geometry;
  PoseRange pose_range;
};

struct InsertionOutcome {
  Phase final_phase = Phase::kScoop;
  FailReason reason = FailReason::kNone;
  InitialPose pose;
  int steps_taken = 0;
  double miss_distance = 0.0;
  std::vector<CardTraceRow> trace;
  std::string trace_path;

  [[nodiscard]] bool done() const { return final_phase == Phase::kDone; }
};

inline InitialPose sample_initial_pose(std::uint64_t seed, const PoseRange& range) {
  std::mt19937_64 rng(substream(seed, 7));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  InitialPose pose;
  pose.x_offset = range.x * unit(rng);
  pose.y_offset = range.y * unit(rng);
  pose.yaw = range.yaw * unit(rng);
  pose.facing = std::bernoulli_distribution(0.5)(rng) ? Side::kDigits : Side::kBack;
  return pose;
}

/// Whole task from scoop to insertion.
inline InsertionOutcome run_insertion_trial(const InitialPose& pose, const InsertionSetup& setup) {
  if (!setup.pose_range.contains(pose))
    throw std::invalid_argument("run_insertion_trial: initial pose outside the assumed range");
  setup.world.card.validate();
  setup.explore.validate(setup.world.card);
  setup.reader.validate(setup.world.card);

  InsertionOutcome out;
  out.pose = pose;
  ExplorationState s = scoop_card(setup.world.card, setup.friction, setup.scoop_geometry, pose,
                                  setup.world.sensor);
  int row = 0;
  auto log = [&](Phase from, const ExplorationState& st) {
    out.trace.push_back({row++, from, st.grasp_x, st.grasp_y, st.last_edge_reading, st.last_action,
                         st.last_step, st.phase, st.reason});
  };
  log(Phase::kScoop, s);

  const int budget = setup.explore.max_steps + 16;
  for (int guard = 0; guard < budget && s.phase != Phase::kDone && s.phase != Phase::kFail; ++guard) {
    const Phase from = s.phase;
    switch (from) {
      case Phase::kOrientCheck: s = check_orientation(std::move(s), setup.world); break;
      case Phase::kFlipInHand: s = flip_in_hand(std::move(s)); break;
      case Phase::kExploreX: s = step_explore_x(std::move(s), setup.world, setup.explore); break;
      case Phase::kRotateVertical: s = rotate_vertical(std::move(s), setup.world.card, setup.explore); break;
      case Phase::kExploreY: s = step_explore_y(std::move(s), setup.world, setup.explore); break;
      case Phase::kInsert: s = insert(std::move(s), setup.world.card, setup.reader); break;
      default: break;
    }
    log(from, s);
  }
  if (s.phase != Phase::kDone && s.phase != Phase::kFail) s.fail(FailReason::kBudgetExhausted);
  out.final_phase = s.phase;
  out.reason = s.reason;
  out.steps_taken = s.steps_taken;
  out.miss_distance = s.miss_distance;
  return out;
}

}  // namespace tacgrip::card

// Scenario configuration: YAML with a versioned schema, defaults filled in,
// unknown keys rejected, errors anchored to file lines.
#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tacgrip/card_explore.hpp"
#include "tacgrip/format.hpp"
#include "tacgrip/rub_singulation.hpp"
#include "tacgrip/scoop_statics.hpp"
#include "tacgrip/tactile_mpc.hpp"

namespace tacgrip::harness {

inline constexpr int kSchemaVersion = 1;

enum class Scenario { kMpcSim, kSingulate, kScoopAnalyze, kCardInsert, kSweep };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kMpcSim: return "mpc-sim";
    case Scenario::kSingulate: return "singulate";
    case Scenario::kScoopAnalyze: return "scoop-analyze";
    case Scenario::kCardInsert: return "card-insert";
    case Scenario::kSweep: return "sweep";
  }
  return "?";
}

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kParse, kValidation };
  ConfigError(Kind kind, const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                           (kind == Kind::kParse ? "parse error: " : "validation error: ") + what),
        kind_(kind), line_(line) {}
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

/// Closed-loop plant for mpc-sim and sweep.
struct PlantBlock {
  double object_width = 30.0;
  double c_max = 20000.0;
  double indent_sat = 20.0;
  double noise_sigma = 0.0;
  double width_amplitude = 0.0;  // mm, 0 = rigid object
  double width_freq = 1.0;       // Hz
  double duration = 3.0;         // s
  double initial_opening = 35.0; // mm
};

/// MPC parameter sweep: closed loop run once per value.
struct SweepBlock {
  std::string parameter = "P";
  std::vector<double> values{1.0, 10.0, 100.0};
};

struct CardBlock {
  card::InsertionSetup setup;
};

struct ScenarioConfig {
  int schema = kSchemaVersion;
  Scenario scenario = Scenario::kMpcSim;
  std::uint64_t seed = 0;
  int trials = 1;
  std::string output_dir = "out";
  mpc::MpcParams mpc;
  mpc::Limits limits;
  PlantBlock plant;
  rub::TrialSetup singulate;  // mpc/limits copied in at load time
  std::vector<rub::ObjectProfile> objects = rub::default_catalog();
  scoop::SweepSpec scoop;
  CardBlock card;
  SweepBlock sweep;
};

inline bool uses_block(Scenario s, const std::string& block) {
  if (block == "mpc" || block == "limits")
    return s == Scenario::kMpcSim || s == Scenario::kSingulate || s == Scenario::kSweep;
  if (block == "plant") return s == Scenario::kMpcSim || s == Scenario::kSweep;
  if (block == "rub" || block == "objects") return s == Scenario::kSingulate;
  if (block == "scoop") return s == Scenario::kScoopAnalyze || s == Scenario::kCardInsert;
  if (block == "card") return s == Scenario::kCardInsert;
  if (block == "sweep") return s == Scenario::kSweep;
  return false;
}

namespace detail {

inline constexpr double kDeg = scoop::kPi / 180.0;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[nodiscard]] int line(const YAML::Node& n) const {
    const auto m = n.Mark();
    return m.line >= 0 ? m.line + 1 : 0;
  }
  [[noreturn]] void parse_fail(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(ConfigError::Kind::kParse, source_, line(n), msg);
  }
  [[noreturn]] void invalid(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(ConfigError::Kind::kValidation, source_, line(n), msg);
  }

  void require_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) parse_fail(n, what + " must be a mapping");
  }

  void reject_unknown(const YAML::Node& map, const std::set<std::string>& known,
                      const std::string& where) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!known.count(key)) invalid(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <class T>
  void get(const YAML::Node& map, const std::string& key, T& out) const {
    const YAML::Node n = map[key];
    if (!n) return;
    if (!n.IsScalar()) parse_fail(n, "'" + key + "' must be a scalar");
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      parse_fail(n, "'" + key + "' has the wrong type");
    }
  }

  void get_deg(const YAML::Node& map, const std::string& key, double& out_rad) const {
    double deg = out_rad / kDeg;
    get(map, key, deg);
    out_rad = deg * kDeg;
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& key) const {
    if (!n.IsSequence()) parse_fail(n, "'" + key + "' must be a list");
    std::vector<double> out;
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        parse_fail(item, "'" + key + "' entries must be numbers");
      }
    }
    return out;
  }

  /// Scalar (single point) or {lo, hi, count}.
  void axis(const YAML::Node& map, const std::string& key, scoop::Axis& out, double scale) const {
    const YAML::Node n = map[key];
    if (!n) return;
    if (n.IsScalar()) {
      double v = 0.0;
      get(map, key, v);
      out = {v * scale, v * scale, 1};
      return;
    }
    require_map(n, key);
    reject_unknown(n, {"lo", "hi", "count"}, key);
    double lo = out.lo / scale;
    double hi = out.hi / scale;
    int count = out.count;
    get(n, "lo", lo);
    get(n, "hi", hi);
    get(n, "count", count);
    if (count < 1) invalid(n, key + ".count must be >= 1");
    if (hi < lo) invalid(n, key + ".hi must be >= lo");
    out = {lo * scale, hi * scale, count};
  }

  /// Runs a module validator and re-raises its complaint at the block's line.
  void check(const YAML::Node& at, const std::function<void()>& validate) const {
    try {
      validate();
    } catch (const std::exception& e) {
      invalid(at, e.what());
    }
  }

  [[nodiscard]] const std::string& source() const { return source_; }

 private:
  std::string source_;
};

inline void read_mpc(const Reader& r, const YAML::Node& n, mpc::MpcParams& p) {
  r.require_map(n, "mpc");
  r.reject_unknown(n, {"c_desired", "Q_a", "Q_c", "Q_v", "P", "N", "K_c", "k_c_unit_scale", "dt", "freq"},
                   "mpc");
  r.get(n, "c_desired", p.c_desired);
  r.get(n, "Q_a", p.q_a);
  r.get(n, "Q_c", p.q_c);
  r.get(n, "Q_v", p.q_v);
  r.get(n, "P", p.terminal_weight);
  r.get(n, "N", p.horizon);
  r.get(n, "K_c", p.k_c);
  r.get(n, "k_c_unit_scale", p.k_c_unit_scale);
  r.get(n, "dt", p.dt);
  r.get(n, "freq", p.freq);
  if (n["freq"] && !n["dt"]) p.dt = 1.0 / p.freq;
  if (n["dt"] && !n["freq"]) p.freq = 1.0 / p.dt;
}

inline void read_limits(const Reader& r, const YAML::Node& n, mpc::Limits& l) {
  r.require_map(n, "limits");
  r.reject_unknown(n, {"p_min", "p_max", "v_max", "a_max"}, "limits");
  r.get(n, "p_min", l.p_min);
  r.get(n, "p_max", l.p_max);
  r.get(n, "v_max", l.v_max);
  r.get(n, "a_max", l.a_max);
}

inline void read_plant(const Reader& r, const YAML::Node& n, PlantBlock& p) {
  r.require_map(n, "plant");
  r.reject_unknown(n, {"object_width", "c_max", "indent_sat", "noise_sigma", "width_amplitude",
                       "width_freq", "duration", "initial_opening"},
                   "plant");
  r.get(n, "object_width", p.object_width);
  r.get(n, "c_max", p.c_max);
  r.get(n, "indent_sat", p.indent_sat);
  r.get(n, "noise_sigma", p.noise_sigma);
  r.get(n, "width_amplitude", p.width_amplitude);
  r.get(n, "width_freq", p.width_freq);
  r.get(n, "duration", p.duration);
  r.get(n, "initial_opening", p.initial_opening);
  if (!(p.object_width > 0.0 && p.c_max > 0.0 && p.indent_sat > 0.0))
    r.invalid(n, "plant: object_width, c_max, indent_sat must be > 0");
  if (!(p.noise_sigma >= 0.0)) r.invalid(n, "plant: noise_sigma must be >= 0");
  if (!(p.width_amplitude >= 0.0 && p.width_amplitude < p.object_width))
    r.invalid(n, "plant: width_amplitude must lie in [0, object_width)");
  if (!(p.width_freq > 0.0)) r.invalid(n, "plant: width_freq must be > 0");
  if (!(p.duration > 0.0)) r.invalid(n, "plant: duration must be > 0");
}

inline void read_rub(const Reader& r, const YAML::Node& n, rub::TrialSetup& s) {
  r.require_map(n, "rub");
  r.reject_unknown(n, {"k_p", "b", "retract_threshold", "retract_angle_deg", "stroke_freq", "n_strokes",
                       "drop_area_floor", "drop_dwell", "n_grains", "removal_rate", "close_timeout",
                       "open_margin", "settle_hold", "c_max", "indent_sat", "noise_sigma"},
                   "rub");
  r.get(n, "k_p", s.rub.k_p);
  r.get(n, "b", s.rub.b);
  r.get(n, "retract_threshold", s.rub.retract_threshold);
  r.get_deg(n, "retract_angle_deg", s.rub.retract_angle);
  r.get(n, "stroke_freq", s.rub.stroke_freq);
  r.get(n, "n_strokes", s.rub.n_strokes);
  r.get(n, "drop_area_floor", s.rub.drop_area_floor);
  r.get(n, "drop_dwell", s.rub.drop_dwell);
  r.get(n, "n_grains", s.n_grains);
  r.get(n, "removal_rate", s.removal_rate);
  r.get(n, "close_timeout", s.close_timeout);
  r.get(n, "open_margin", s.open_margin);
  r.get(n, "settle_hold", s.settle_hold);
  r.get(n, "c_max", s.gel.c_max);
  r.get(n, "indent_sat", s.gel.indent_sat);
  r.get(n, "noise_sigma", s.gel.noise_sigma);
  if (s.n_grains < 0) r.invalid(n, "rub: n_grains must be >= 0");
  if (!(s.removal_rate >= 0.0)) r.invalid(n, "rub: removal_rate must be >= 0");
  if (!(s.close_timeout > 0.0 && s.settle_hold >= 0.0 && s.open_margin >= 0.0))
    r.invalid(n, "rub: close_timeout must be > 0, settle_hold and open_margin >= 0");
  if (!(s.gel.c_max > 0.0 && s.gel.indent_sat > 0.0 && s.gel.noise_sigma >= 0.0))
    r.invalid(n, "rub: c_max, indent_sat must be > 0, noise_sigma >= 0");
}

inline std::vector<rub::ObjectProfile> read_objects(const Reader& r, const YAML::Node& n) {
  if (!n.IsSequence() || n.size() == 0) r.parse_fail(n, "objects must be a non-empty list");
  std::vector<rub::ObjectProfile> out;
  for (const auto& o : n) {
    r.require_map(o, "object");
    std::string kind;
    std::string label;
    r.get(o, "kind", kind);
    r.get(o, "label", label);
    if (label.empty()) r.invalid(o, "object needs a label");
    r.check(o, [&] {
      if (kind == "sphere") {
        r.reject_unknown(o, {"kind", "label", "diameter"}, "object");
        double d = 0.0;
        r.get(o, "diameter", d);
        out.push_back(rub::ObjectProfile::sphere(label, d));
      } else if (kind == "ellipse") {
        r.reject_unknown(o, {"kind", "label", "major", "minor"}, "object");
        double major = 0.0;
        double minor = 0.0;
        r.get(o, "major", major);
        r.get(o, "minor", minor);
        out.push_back(rub::ObjectProfile::ellipse(label, major, minor));
      } else if (kind == "irregular") {
        r.reject_unknown(o, {"kind", "label", "widths"}, "object");
        if (!o["widths"]) throw std::invalid_argument("irregular object needs widths");
        out.push_back(rub::ObjectProfile::irregular(label, r.numbers(o["widths"], "widths")));
      } else {
        throw std::invalid_argument("object kind must be sphere, ellipse or irregular");
      }
    });
  }
  return out;
}

inline void read_scoop(const Reader& r, const YAML::Node& n, scoop::SweepSpec& s) {
  r.require_map(n, "scoop");
  r.reject_unknown(n, {"h", "l", "d", "m", "g", "theta_deg", "mu1", "mu2", "F_L"}, "scoop");
  r.get(n, "h", s.base.h);
  r.get(n, "l", s.base.l);
  r.get(n, "d", s.base.d);
  r.get(n, "m", s.base.m);
  r.get(n, "g", s.base.g);
  r.axis(n, "theta_deg", s.theta, kDeg);
  r.axis(n, "mu1", s.mu1, 1.0);
  r.axis(n, "mu2", s.mu2, 1.0);
  r.axis(n, "F_L", s.F_L, 1.0);
  s.base.theta = s.theta.lo;
  s.base.mu1 = s.mu1.lo;
  s.base.mu2 = s.mu2.lo;
  s.base.F_L = s.F_L.lo;
  r.check(n, [&] { s.base.validate(); });
}

inline void read_card(const Reader& r, const YAML::Node& n, card::InsertionSetup& s) {
  r.require_map(n, "card");
  r.reject_unknown(n, {"length", "width", "thickness", "raised_thickness", "digit_band", "digit_row_edge",
                       "slot_length", "slot_width", "x_d", "y_d", "edge_tolerance", "max_steps",
                       "rotate_margin", "steps", "base_indent", "relief_threshold", "pose_range"},
                   "card");
  auto& c = s.world.card;
  r.get(n, "length", c.length);
  r.get(n, "width", c.width);
  r.get(n, "thickness", c.thickness);
  r.get(n, "raised_thickness", c.raised_thickness);
  if (n["digit_band"]) {
    const auto band = r.numbers(n["digit_band"], "digit_band");
    if (band.size() != 2) r.parse_fail(n["digit_band"], "digit_band must be [lo, hi]");
    c.digit_band = {band[0], band[1]};
  }
  r.get(n, "digit_row_edge", c.digit_row_edge);
  r.get(n, "slot_length", s.reader.slot_length);
  r.get(n, "slot_width", s.reader.slot_width);
  auto& e = s.explore;
  r.get(n, "x_d", e.x_d);
  r.get(n, "y_d", e.y_d);
  r.get(n, "edge_tolerance", e.edge_tolerance);
  r.get(n, "max_steps", e.max_steps);
  r.get(n, "rotate_margin", e.rotate_margin);
  if (n["steps"]) {
    const auto steps = r.numbers(n["steps"], "steps");
    if (steps.size() != e.steps.size()) r.parse_fail(n["steps"], "steps must list exactly 3 values");
    std::copy(steps.begin(), steps.end(), e.steps.begin());
  }
  r.get(n, "base_indent", s.world.sensor.base_indent);
  r.get(n, "relief_threshold", s.world.sensor.relief_threshold);
  if (const YAML::Node pr = n["pose_range"]) {
    r.require_map(pr, "pose_range");
    r.reject_unknown(pr, {"x", "y", "yaw_deg"}, "pose_range");
    r.get(pr, "x", s.pose_range.x);
    r.get(pr, "y", s.pose_range.y);
    r.get_deg(pr, "yaw_deg", s.pose_range.yaw);
  }
  r.check(n, [&] {
    c.validate();
    e.validate(c);
    s.reader.validate(c);
    s.world.sensor.pad.validate();
  });
}

inline void read_sweep(const Reader& r, const YAML::Node& n, SweepBlock& s) {
  r.require_map(n, "sweep");
  r.reject_unknown(n, {"parameter", "values"}, "sweep");
  r.get(n, "parameter", s.parameter);
  static const std::set<std::string> kSweepable{"c_desired", "Q_a", "Q_c", "Q_v", "P", "N", "K_c"};
  if (!kSweepable.count(s.parameter))
    r.invalid(n, "sweep.parameter must be one of c_desired, Q_a, Q_c, Q_v, P, N, K_c");
  if (n["values"]) s.values = r.numbers(n["values"], "values");
  if (s.values.empty()) r.invalid(n, "sweep.values must not be empty");
}

}  // namespace detail

/// Applies one sweep value to a copy of the MPC parameters.
inline mpc::MpcParams with_sweep_value(mpc::MpcParams p, const std::string& parameter, double value) {
  if (parameter == "c_desired") p.c_desired = value;
  else if (parameter == "Q_a") p.q_a = value;
  else if (parameter == "Q_c") p.q_c = value;
  else if (parameter == "Q_v") p.q_v = value;
  else if (parameter == "P") p.terminal_weight = value;
  else if (parameter == "N") p.horizon = static_cast<int>(value);
  else if (parameter == "K_c") p.k_c = value;
  else throw std::invalid_argument("unknown sweep parameter " + parameter);
  return p;
}

inline ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  const detail::Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(ConfigError::Kind::kParse, source, e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(ConfigError::Kind::kParse, source, 0, "empty config");
  if (!root.IsMap()) r.parse_fail(root, "top level must be a mapping");

  ScenarioConfig cfg;
  r.reject_unknown(root, {"schema", "scenario", "seed", "trials", "output_dir", "mpc", "limits", "plant",
                          "rub", "objects", "scoop", "card", "sweep"},
                   "top level");
  r.get(root, "schema", cfg.schema);
  if (cfg.schema != kSchemaVersion)
    r.invalid(root["schema"], "unsupported schema " + std::to_string(cfg.schema));
  if (!root["scenario"]) r.invalid(root, "missing 'scenario'");
  std::string name;
  r.get(root, "scenario", name);
  const std::map<std::string, Scenario> names{{"mpc-sim", Scenario::kMpcSim},
                                              {"singulate", Scenario::kSingulate},
                                              {"scoop-analyze", Scenario::kScoopAnalyze},
                                              {"card-insert", Scenario::kCardInsert},
                                              {"sweep", Scenario::kSweep}};
  const auto it = names.find(name);
  if (it == names.end()) r.invalid(root["scenario"], "unknown scenario '" + name + "'");
  cfg.scenario = it->second;

  r.get(root, "seed", cfg.seed);
  r.get(root, "trials", cfg.trials);
  r.get(root, "output_dir", cfg.output_dir);
  if (cfg.trials < 1) r.invalid(root["trials"], "trials must be >= 1");

  for (const char* block : {"mpc", "limits", "plant", "rub", "objects", "scoop", "card", "sweep"}) {
    if (root[block] && !uses_block(cfg.scenario, block))
      r.invalid(root[block], std::string("block '") + block + "' is not used by scenario " + name);
  }
  if (root["mpc"]) detail::read_mpc(r, root["mpc"], cfg.mpc);
  r.check(root["mpc"] ? root["mpc"] : root, [&] { cfg.mpc.validate(); });
  if (root["limits"]) detail::read_limits(r, root["limits"], cfg.limits);
  r.check(root["limits"] ? root["limits"] : root, [&] { cfg.limits.validate(); });
  if (root["plant"]) detail::read_plant(r, root["plant"], cfg.plant);
  if (root["rub"]) detail::read_rub(r, root["rub"], cfg.singulate);
  cfg.singulate.mpc = cfg.mpc;
  cfg.singulate.limits = cfg.limits;
  r.check(root["rub"] ? root["rub"] : root, [&] { cfg.singulate.rub.validate(cfg.mpc.c_desired); });
  if (root["objects"]) cfg.objects = detail::read_objects(r, root["objects"]);
  if (root["scoop"]) detail::read_scoop(r, root["scoop"], cfg.scoop);
  cfg.card.setup.scoop_geometry = cfg.scoop.base;
  cfg.card.setup.friction = {cfg.scoop.base.mu1, cfg.scoop.base.mu2};
  if (root["card"]) detail::read_card(r, root["card"], cfg.card.setup);
  if (root["sweep"]) detail::read_sweep(r, root["sweep"], cfg.sweep);
  if (cfg.scenario == Scenario::kSweep) {
    for (double v : cfg.sweep.values)
      r.check(root["sweep"] ? root["sweep"] : root,
              [&] { with_sweep_value(cfg.mpc, cfg.sweep.parameter, v).validate(); });
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigError::Kind::kParse, path.string(), 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

/// Every parameter that can affect a run of this scenario, as key/value pairs.
inline std::vector<std::pair<std::string, std::string>> config_echo(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&](const std::string& k, double v) { kv.emplace_back(k, fmt_num(v)); };
  kv.emplace_back("schema", std::to_string(c.schema));
  kv.emplace_back("scenario", to_string(c.scenario));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("trials", std::to_string(c.trials));
  kv.emplace_back("output_dir", c.output_dir);
  if (uses_block(c.scenario, "mpc")) {
    add("mpc.c_desired", c.mpc.c_desired);
    add("mpc.Q_a", c.mpc.q_a);
    add("mpc.Q_c", c.mpc.q_c);
    add("mpc.Q_v", c.mpc.q_v);
    add("mpc.P", c.mpc.terminal_weight);
    add("mpc.N", c.mpc.horizon);
    add("mpc.K_c", c.mpc.k_c);
    add("mpc.k_c_unit_scale", c.mpc.k_c_unit_scale);
    add("mpc.dt", c.mpc.dt);
    add("mpc.freq", c.mpc.freq);
    add("limits.p_min", c.limits.p_min);
    add("limits.p_max", c.limits.p_max);
    add("limits.v_max", c.limits.v_max);
    add("limits.a_max", c.limits.a_max);
  }
  if (uses_block(c.scenario, "plant")) {
    add("plant.object_width", c.plant.object_width);
    add("plant.c_max", c.plant.c_max);
    add("plant.indent_sat", c.plant.indent_sat);
    add("plant.noise_sigma", c.plant.noise_sigma);
    add("plant.width_amplitude", c.plant.width_amplitude);
    add("plant.width_freq", c.plant.width_freq);
    add("plant.duration", c.plant.duration);
    add("plant.initial_opening", c.plant.initial_opening);
  }
  if (uses_block(c.scenario, "rub")) {
    const auto& s = c.singulate;
    add("rub.k_p", s.rub.k_p);
    add("rub.b", s.rub.b);
    add("rub.retract_threshold", s.rub.retract_threshold);
    add("rub.retract_angle_deg", s.rub.retract_angle / detail::kDeg);
    add("rub.stroke_freq", s.rub.stroke_freq);
    add("rub.n_strokes", s.rub.n_strokes);
    add("rub.drop_area_floor", s.rub.drop_area_floor);
    add("rub.drop_dwell", s.rub.drop_dwell);
    add("rub.n_grains", s.n_grains);
    add("rub.removal_rate", s.removal_rate);
    add("rub.close_timeout", s.close_timeout);
    add("rub.open_margin", s.open_margin);
    add("rub.settle_hold", s.settle_hold);
    add("rub.c_max", s.gel.c_max);
    add("rub.indent_sat", s.gel.indent_sat);
    add("rub.noise_sigma", s.gel.noise_sigma);
    for (const auto& o : c.objects) {
      std::string desc = rub::to_string(o.kind);
      switch (o.kind) {
        case rub::ObjectKind::kSphere: desc += " diameter=" + fmt_num(o.nominal_width); break;
        case rub::ObjectKind::kEllipse:
          desc += " major=" + fmt_num(2.0 * o.semi_major) + " minor=" + fmt_num(2.0 * o.semi_minor);
          break;
        case rub::ObjectKind::kIrregular: {
          desc += " widths=";
          for (std::size_t i = 0; i < o.table.size(); ++i) desc += (i ? "/" : "") + fmt_num(o.table[i]);
          break;
        }
      }
      kv.emplace_back("objects." + o.label, desc);
    }
  }
  if (uses_block(c.scenario, "scoop")) {
    const auto& s = c.scoop;
    add("scoop.h", s.base.h);
    add("scoop.l", s.base.l);
    add("scoop.d", s.base.d);
    add("scoop.m", s.base.m);
    add("scoop.g", s.base.g);
    auto axis = [&](const std::string& k, const scoop::Axis& a, double scale) {
      kv.emplace_back(k, fmt_num(a.lo / scale) + ".." + fmt_num(a.hi / scale) + " x" + std::to_string(a.count));
    };
    axis("scoop.theta_deg", s.theta, detail::kDeg);
    axis("scoop.mu1", s.mu1, 1.0);
    axis("scoop.mu2", s.mu2, 1.0);
    axis("scoop.F_L", s.F_L, 1.0);
  }
  if (uses_block(c.scenario, "card")) {
    const auto& s = c.card.setup;
    add("card.length", s.world.card.length);
    add("card.width", s.world.card.width);
    add("card.thickness", s.world.card.thickness);
    add("card.raised_thickness", s.world.card.raised_thickness);
    kv.emplace_back("card.digit_band",
                    fmt_num(s.world.card.digit_band.lo) + ".." + fmt_num(s.world.card.digit_band.hi));
    add("card.digit_row_edge", s.world.card.digit_row_edge);
    add("card.slot_length", s.reader.slot_length);
    add("card.slot_width", s.reader.slot_width);
    add("card.x_d", s.explore.x_d);
    add("card.y_d", s.explore.y_d);
    add("card.edge_tolerance", s.explore.edge_tolerance);
    add("card.max_steps", s.explore.max_steps);
    add("card.rotate_margin", s.explore.rotate_margin);
    kv.emplace_back("card.steps", fmt_num(s.explore.steps[0]) + "/" + fmt_num(s.explore.steps[1]) + "/" +
                                      fmt_num(s.explore.steps[2]));
    add("card.base_indent", s.world.sensor.base_indent);
    add("card.relief_threshold", s.world.sensor.relief_threshold);
    add("card.pose_range.x", s.pose_range.x);
    add("card.pose_range.y", s.pose_range.y);
    add("card.pose_range.yaw_deg", s.pose_range.yaw / detail::kDeg);
  }
  if (uses_block(c.scenario, "sweep")) {
    kv.emplace_back("sweep.parameter", c.sweep.parameter);
    std::string vals;
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i) vals += (i ? "," : "") + fmt_num(c.sweep.values[i]);
    kv.emplace_back("sweep.values", vals);
  }
  return kv;
}

}  // namespace tacgrip::harness

// Synthetic gel-pad tactile sensing: depth-image rendering, contact patch
// extraction, and the ground-truth contact plant used in closed-loop tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tacgrip::gel {

inline constexpr double kPi = 3.14159265358979323846;

/// Default binarization threshold (mm of indentation).
inline constexpr double kDefaultThreshold = 0.05;

/// Relief height of embossed card digits, (1.2 - 0.8) / 2 mm.
inline constexpr double kDigitRelief = 0.4;

struct GelPadSpec {
  int width_px = 320;
  int height_px = 240;
  double resolution = 10.0;  // px per mm
  double max_indent = 2.0;   // mm
  double noise_sigma = 0.0;  // px

  void validate() const {
    if (width_px <= 0 || height_px <= 0)
      throw std::invalid_argument("GelPadSpec: pixel dimensions must be positive");
    if (!(resolution > 0.0)) throw std::invalid_argument("GelPadSpec: resolution must be > 0");
    if (!(max_indent > 0.0)) throw std::invalid_argument("GelPadSpec: max_indent must be > 0");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("GelPadSpec: noise_sigma must be >= 0");
  }

  [[nodiscard]] std::int64_t cell_count() const {
    return static_cast<std::int64_t>(width_px) * height_px;
  }
  [[nodiscard]] double half_width_mm() const { return 0.5 * width_px / resolution; }
  [[nodiscard]] double half_height_mm() const { return 0.5 * height_px / resolution; }

  // Pixel-center coordinates in mm, origin at the pad center, y growing with row.
  [[nodiscard]] double x_mm(int col) const { return (col + 0.5 - 0.5 * width_px) / resolution; }
  [[nodiscard]] double y_mm(int row) const { return (row + 0.5 - 0.5 * height_px) / resolution; }
};

/// Indentation image in mm, row-major.
struct TactileFrame {
  GelPadSpec pad;
  std::vector<double> depth;
  std::int64_t tick = 0;

  TactileFrame() = default;
  explicit TactileFrame(const GelPadSpec& spec, std::int64_t t = 0)
      : pad(spec), depth(static_cast<std::size_t>(spec.cell_count()), 0.0), tick(t) {}

  [[nodiscard]] int width() const { return pad.width_px; }
  [[nodiscard]] int height() const { return pad.height_px; }
  [[nodiscard]] double at(int col, int row) const {
    return depth[static_cast<std::size_t>(row) * pad.width_px + col];
  }
  double& at(int col, int row) { return depth[static_cast<std::size_t>(row) * pad.width_px + col]; }
};

struct EdgeFit {
  double offset_mm = 0.0;  // signed distance of the edge line from the pad center
  double angle_rad = 0.0;  // line direction; the normal (-sin, cos) points into contact
};

struct ContactPatch {
  std::int64_t area = 0;  // px
  double centroid_x = 0.0;  // px
  double centroid_y = 0.0;  // px
  std::optional<EdgeFit> edge;
};

/// Raised strip overlaid on an edge contact: cells whose signed distance from
/// the contact edge lies in [near_mm, far_mm] are lifted by height_mm.
struct ReliefBand {
  double near_mm = 0.0;
  double far_mm = std::numeric_limits<double>::infinity();
  double height_mm = kDigitRelief;
};

inline TactileFrame render_sphere_contact(const GelPadSpec& pad, double radius, double indent) {
  pad.validate();
  if (!(radius > 0.0)) throw std::domain_error("render_sphere_contact: radius must be > 0");
  if (!(indent >= 0.0) || indent > std::min(radius, pad.max_indent))
    throw std::domain_error("render_sphere_contact: indent outside [0, min(radius, max_indent)]");
  TactileFrame frame(pad);
  if (indent == 0.0) return frame;
  const double inv_2r = 1.0 / (2.0 * radius);
  for (int row = 0; row < pad.height_px; ++row) {
    const double y = pad.y_mm(row);
    for (int col = 0; col < pad.width_px; ++col) {
      const double x = pad.x_mm(col);
      frame.at(col, row) = std::max(0.0, indent - (x * x + y * y) * inv_2r);
    }
  }
  return frame;
}

/// Half-plane imprint. Contact occupies the side where
/// -x*sin(angle) + y*cos(angle) - offset >= 0.
inline TactileFrame render_edge_contact(const GelPadSpec& pad, double offset, double angle,
                                        double indent,
                                        const std::optional<ReliefBand>& digits = std::nullopt) {
  pad.validate();
  if (!std::isfinite(offset) || !std::isfinite(angle))
    throw std::domain_error("render_edge_contact: offset and angle must be finite");
  if (!(indent >= 0.0) || indent > pad.max_indent)
    throw std::domain_error("render_edge_contact: indent outside [0, max_indent]");
  TactileFrame frame(pad);
  const double s = std::sin(angle);
  const double c = std::cos(angle);
  for (int row = 0; row < pad.height_px; ++row) {
    const double y = pad.y_mm(row);
    for (int col = 0; col < pad.width_px; ++col) {
      const double d = -pad.x_mm(col) * s + y * c - offset;
      if (d < 0.0) continue;
      double depth = indent;
      if (digits && d >= digits->near_mm && d <= digits->far_mm) depth += digits->height_mm;
      frame.at(col, row) = std::min(depth, pad.max_indent);
    }
  }
  return frame;
}

namespace detail {

// 4-connected labelling; returns the label image and the size of each label.
inline std::pair<std::vector<int>, std::vector<std::int64_t>> label_components(
    const std::vector<std::uint8_t>& mask, int width, int height) {
  std::vector<int> labels(mask.size(), -1);
  std::vector<std::int64_t> sizes;
  std::vector<int> stack;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (!mask[seed] || labels[seed] >= 0) continue;
    const int label = static_cast<int>(sizes.size());
    std::int64_t count = 0;
    labels[seed] = label;
    stack.push_back(static_cast<int>(seed));
    while (!stack.empty()) {
      const int idx = stack.back();
      stack.pop_back();
      ++count;
      const int col = idx % width;
      const int row = idx / width;
      const int nbrs[4][2] = {{col - 1, row}, {col + 1, row}, {col, row - 1}, {col, row + 1}};
      for (const auto& n : nbrs) {
        if (n[0] < 0 || n[0] >= width || n[1] < 0 || n[1] >= height) continue;
        const int j = n[1] * width + n[0];
        if (mask[j] && labels[j] < 0) {
          labels[j] = label;
          stack.push_back(j);
        }
      }
    }
    sizes.push_back(count);
  }
  return {std::move(labels), std::move(sizes)};
}

}  // namespace detail

/// Threshold, keep the largest 4-connected component, and fit a line to its
/// in-frame boundary by total least squares over crack midpoints.
inline ContactPatch extract_patch(const TactileFrame& frame,
                                  double threshold = kDefaultThreshold) {
  if (!(threshold > 0.0)) throw std::domain_error("extract_patch: threshold must be > 0");
  const int w = frame.width();
  const int h = frame.height();
  std::vector<std::uint8_t> mask(frame.depth.size(), 0);
  ContactPatch patch;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (frame.depth[i] >= threshold) {
      mask[i] = 1;
      ++patch.area;
    }
  }
  if (patch.area == 0) return patch;

  auto [labels, sizes] = detail::label_components(mask, w, h);
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  double sx = 0.0, sy = 0.0;
  std::int64_t n_comp = 0;
  std::vector<std::pair<double, double>> cracks;
  const GelPadSpec& pad = frame.pad;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (labels[row * w + col] != best) continue;
      sx += col;
      sy += row;
      ++n_comp;
      const int nbrs[4][2] = {{col - 1, row}, {col + 1, row}, {col, row - 1}, {col, row + 1}};
      for (const auto& n : nbrs) {
        if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
        if (labels[n[1] * w + n[0]] == best) continue;
        cracks.emplace_back(0.5 * (pad.x_mm(col) + pad.x_mm(n[0])),
                            0.5 * (pad.y_mm(row) + pad.y_mm(n[1])));
      }
    }
  }
  patch.centroid_x = sx / static_cast<double>(n_comp);
  patch.centroid_y = sy / static_cast<double>(n_comp);
  if (cracks.size() < 2) return patch;

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : cracks) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(cracks.size());
  my /= static_cast<double>(cracks.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : cracks) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  // Major axis of the 2x2 scatter matrix.
  double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  // Orient the normal (-sin, cos) toward the component body.
  const double body_x = pad.x_mm(0) + patch.centroid_x / pad.resolution;
  const double body_y = pad.y_mm(0) + patch.centroid_y / pad.resolution;
  if (-(body_x - mx) * std::sin(angle) + (body_y - my) * std::cos(angle) < 0.0) angle += kPi;
  if (angle > kPi) angle -= 2.0 * kPi;
  patch.edge = EdgeFit{-mx * std::sin(angle) + my * std::cos(angle), angle};
  return patch;
}

/// Saturating-linear gel/object contact response with seeded additive noise.
class ContactPlant {
 public:
  double object_width = 30.0;  // mm
  double c_max = 20000.0;      // px
  double indent_sat = 20.0;    // mm
  double noise_sigma = 0.0;    // px

  ContactPlant() : rng_(0) {}
  ContactPlant(double width, double cmax, double sat, double sigma, std::uint64_t seed)
      : object_width(width), c_max(cmax), indent_sat(sat), noise_sigma(sigma), seed_(seed),
        rng_(seed) {
    if (!(width > 0.0) || !(cmax > 0.0) || !(sat > 0.0) || !(sigma >= 0.0))
      throw std::invalid_argument("ContactPlant: width, c_max, indent_sat must be > 0, sigma >= 0");
  }

  void validate_against(const GelPadSpec& pad) const {
    if (c_max > static_cast<double>(pad.cell_count()))
      throw std::invalid_argument("ContactPlant: c_max exceeds pad pixel count");
  }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Noise-free contact area at gripper opening p (mm).
  [[nodiscard]] double true_area(double p) const {
    return c_max * std::clamp((object_width - p) / indent_sat, 0.0, 1.0);
  }

  /// Contact area reading at opening p; advances the noise stream.
  double step(double p) {
    if (!(p >= 0.0)) throw std::domain_error("plant_step: opening must be >= 0");
    double c = true_area(p);
    if (noise_sigma > 0.0) c += noise_sigma * normal_(rng_);
    return std::max(0.0, c);
  }

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double plant_step(ContactPlant& plant, double p) { return plant.step(p); }

}  // namespace tacgrip::gel

namespace tacgrip::gel {

/// Contact plant whose object width oscillates sinusoidally, as during rubbing.
class OscillatingWidthPlant {
 public:
  OscillatingWidthPlant(ContactPlant base, double amplitude, double freq_hz, double dt)
      : base_(std::move(base)), mean_width_(base_.object_width), amplitude_(amplitude),
        freq_(freq_hz), dt_(dt) {}

  double step(double p) {
    base_.object_width =
        mean_width_ + amplitude_ * std::sin(2.0 * kPi * freq_ * dt_ * static_cast<double>(tick_++));
    return base_.step(p);
  }
  [[nodiscard]] double current_width() const { return base_.object_width; }

 private:
  ContactPlant base_;
  double mean_width_;
  double amplitude_;
  double freq_;
  double dt_;
  std::int64_t tick_ = 0;
};

}  // namespace tacgrip::gel

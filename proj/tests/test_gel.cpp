#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tacgrip/gel_contact.hpp"
#include "tacgrip/gel_io.hpp"

using namespace tacgrip::gel;

namespace {

std::int64_t naive_count(const TactileFrame& f, double threshold) {
  std::int64_t n = 0;
  for (int r = 0; r < f.pad.height_px; ++r)
    for (int c = 0; c < f.pad.width_px; ++c)
      if (f.at(c, r) > threshold) ++n;
  return n;
}

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

TEST(GelPad, RejectsBadSpec) {
  GelPadSpec pad;
  pad.width_px = 0;
  EXPECT_THROW(pad.validate(), std::invalid_argument);
  pad = GelPadSpec{};
  pad.noise_sigma = -1.0;
  EXPECT_THROW(pad.validate(), std::invalid_argument);
}

TEST(SphereContact, ZeroIndentIsEmpty) {
  const auto f = render_sphere_contact(GelPadSpec{}, 20.5, 0.0);
  EXPECT_EQ(naive_count(f, 0.0), 0);
}

TEST(SphereContact, GolfBallDiscRadius) {
  const GelPadSpec pad;
  const auto f = render_sphere_contact(pad, 20.5, 0.5);
  const double r_px = std::sqrt(2.0 * 20.5 * 0.5) * pad.resolution;
  EXPECT_NEAR(r_px, 45.3, 0.05);
  // Widest contact run through the centre rows matches the disc diameter.
  int widest = 0;
  for (int r = 0; r < pad.height_px; ++r) {
    int run = 0;
    for (int c = 0; c < pad.width_px; ++c) run += f.at(c, r) > 0.0;
    widest = std::max(widest, run);
  }
  EXPECT_NEAR(widest, 2.0 * r_px, 2.0);
}

TEST(SphereContact, AreaWithinOneRingOfDisc) {
  const GelPadSpec pad;
  const auto f = render_sphere_contact(pad, 20.5, 0.2);
  const double r_px = std::sqrt(2.0 * 20.5 * 0.2) * pad.resolution;
  const double disc = kPi * r_px * r_px;
  EXPECT_NEAR(static_cast<double>(naive_count(f, 0.0)), disc, 2.0 * kPi * r_px);
}

TEST(SphereContact, RejectsIndentOutOfRange) {
  const GelPadSpec pad;
  EXPECT_THROW(render_sphere_contact(pad, 20.5, -0.1), std::domain_error);
  EXPECT_THROW(render_sphere_contact(pad, 20.5, pad.max_indent + 0.1), std::domain_error);
  EXPECT_THROW(render_sphere_contact(pad, 0.5, 0.6), std::domain_error);
}

TEST(SphereContact, DepthFollowsParaboloidCap) {
  const GelPadSpec pad;
  const auto f = render_sphere_contact(pad, 20.5, 0.5);
  for (int r = 0; r < pad.height_px; r += 17)
    for (int c = 0; c < pad.width_px; c += 13) {
      const double x = pad.x_mm(c);
      const double y = pad.y_mm(r);
      EXPECT_NEAR(f.at(c, r), std::max(0.0, 0.5 - (x * x + y * y) / (2.0 * 20.5)), 1e-12);
    }
}

TEST(EdgeContact, OffPadIsEmpty) {
  const GelPadSpec pad;
  for (double angle : {0.0, 0.7, -2.0}) {
    const auto f = render_edge_contact(pad, 50.0, angle, 0.3);
    EXPECT_EQ(naive_count(f, 0.0), 0);
  }
}

TEST(EdgeContact, CenteredEdgeCoversHalf) {
  const GelPadSpec pad;
  const auto f = render_edge_contact(pad, 0.0, 0.0, 0.3);
  EXPECT_EQ(naive_count(f, 0.0), pad.cell_count() / 2);
}

TEST(EdgeContact, OffsetThreeMmBoundaryAtThirtyPx) {
  const GelPadSpec pad;
  const auto f = render_edge_contact(pad, 3.0, 0.0, 0.3);
  const auto patch = extract_patch(f, kDefaultThreshold);
  ASSERT_TRUE(patch.edge.has_value());
  EXPECT_NEAR(patch.edge->offset_mm * pad.resolution, 30.0, 1.0);
  EXPECT_NEAR(patch.edge->angle_rad, 0.0, 2.0 * kPi / 180.0);
}

TEST(ExtractPatch, EmptyFrame) {
  const TactileFrame f(GelPadSpec{});
  const auto patch = extract_patch(f, kDefaultThreshold);
  EXPECT_EQ(patch.area, 0);
  EXPECT_FALSE(patch.edge.has_value());
}

TEST(ExtractPatch, CenteredEdgeOffsetZero) {
  const auto f = render_edge_contact(GelPadSpec{}, 0.0, 0.0, 0.3);
  const auto patch = extract_patch(f, kDefaultThreshold);
  ASSERT_TRUE(patch.edge.has_value());
  EXPECT_NEAR(patch.edge->offset_mm, 0.0, 0.1);
}

TEST(ExtractPatch, SphereAreaMatchesRecount) {
  const auto f = render_sphere_contact(GelPadSpec{}, 20.5, 0.5);
  EXPECT_EQ(extract_patch(f, kDefaultThreshold).area, naive_count(f, kDefaultThreshold));
}

TEST(ExtractPatch, RandomFramesAreaOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(-10.0, 10.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> ind(0.1, 1.5);
  std::uniform_real_distribution<double> rad(5.0, 40.0);
  const GelPadSpec pad;
  for (int i = 0; i < 100; ++i) {
    const auto f = (i % 2) ? render_edge_contact(pad, off(rng), ang(rng), ind(rng))
                           : render_sphere_contact(pad, rad(rng), std::min(0.1 + 0.01 * i, 2.0 * 0.99));
    EXPECT_EQ(extract_patch(f, kDefaultThreshold).area, naive_count(f, kDefaultThreshold)) << i;
  }
}

TEST(ExtractPatch, RoundTripRandomEdges) {
  std::mt19937_64 rng(12);
  const GelPadSpec pad;
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double angle = ang(rng);
    const double offset = 9.0 * unit(rng);  // keeps the edge on-pad for every angle
    const auto f = render_edge_contact(pad, offset, angle, 0.3);
    const auto patch = extract_patch(f, kDefaultThreshold);
    ASSERT_TRUE(patch.edge.has_value()) << i;
    EXPECT_NEAR(patch.edge->offset_mm, offset, 1.0 / pad.resolution) << i;
    EXPECT_NEAR(wrap_angle(patch.edge->angle_rad - angle), 0.0, 2.0 * kPi / 180.0) << i;
  }
}

TEST(ExtractPatch, ReliefBandLiftsCells) {
  const GelPadSpec pad;
  const auto f = render_edge_contact(pad, -20.0, 0.0, 0.1, ReliefBand{20.0 + 2.0, 1e9, kDigitRelief});
  const auto patch = extract_patch(f, 0.3);
  ASSERT_TRUE(patch.edge.has_value());
  EXPECT_NEAR(patch.edge->offset_mm, 2.0, 0.1);
}

TEST(Plant, NoContactWhenOpen) {
  ContactPlant plant(30.0, 20000.0, 20.0, 0.0, 1);
  EXPECT_EQ(plant.step(35.0), 0.0);
}

TEST(Plant, Saturates) {
  ContactPlant plant(30.0, 20000.0, 20.0, 0.0, 1);
  EXPECT_EQ(plant.step(10.0), 20000.0);
  EXPECT_EQ(plant.step(0.0), 20000.0);
}

TEST(Plant, DesiredAreaPoint) {
  ContactPlant plant(30.0, 20000.0, 1.0, 0.0, 1);
  EXPECT_NEAR(plant_step(plant, 29.725), 5500.0, 1e-9);
}

TEST(Plant, NegativeOpeningRejected) {
  ContactPlant plant;
  EXPECT_THROW(plant.step(-0.1), std::domain_error);
}

TEST(Plant, MonotoneNonIncreasing) {
  ContactPlant plant(30.0, 20000.0, 20.0, 0.0, 1);
  double prev = plant.step(0.0);
  for (double p = 0.05; p < 40.0; p += 0.05) {
    const double c = plant.step(p);
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(Plant, SeedDeterminism) {
  ContactPlant a(30.0, 20000.0, 20.0, 15.0, 99);
  ContactPlant b(30.0, 20000.0, 20.0, 15.0, 99);
  for (int i = 0; i < 500; ++i) {
    const double p = 20.0 + 0.01 * i;
    EXPECT_EQ(a.step(p), b.step(p));
  }
}

TEST(Plant, NoisyOutputNonNegative) {
  ContactPlant plant(30.0, 20000.0, 20.0, 500.0, 3);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(plant.step(29.99), 0.0);
}

TEST(Plant, CMaxBoundByPad) {
  GelPadSpec pad;
  pad.width_px = 100;
  pad.height_px = 100;
  const ContactPlant plant(30.0, 20000.0, 20.0, 0.0, 1);
  EXPECT_THROW(plant.validate_against(pad), std::invalid_argument);
}

TEST(Io, PgmHeaderAndSize) {
  GelPadSpec pad;
  pad.width_px = 4;
  pad.height_px = 3;
  const auto f = render_edge_contact(pad, 0.0, 0.0, 0.3);
  std::ostringstream os;
  write_pgm(os, f);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("P5\n4 3\n", 0), 0u);
  EXPECT_EQ(s.size(), std::string("P5\n4 3\n65535\n").size() + 4 * 3 * 2);
}

TEST(Io, PatchRowWithoutEdge) {
  ContactPatch p;
  EXPECT_EQ(patch_csv_row(5, p), "5,0,,");
}

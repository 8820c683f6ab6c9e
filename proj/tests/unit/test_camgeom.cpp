#include <gtest/gtest.h>

#include <random>

#include "avm/camgeom.hpp"
#include "avm/config.hpp"
#include "avm/errors.hpp"
#include "oracles.hpp"

using namespace avm;
using namespace avm::camgeom;

namespace {

CameraMount mount(double alpha, double beta, double d, double h = 2.0) {
  CameraMount m;
  m.name = "cam";
  m.alpha_deg = alpha;
  m.beta_deg = beta;
  m.distance_m = d;
  m.height_m = h;
  m.position_m = {0, 0, h};
  return m;
}

LensSpec lens(double fov) {
  LensSpec l;
  l.fov_deg = fov;
  l.width_px = 1600;
  l.height_px = 1200;
  return l;
}

}  // namespace

TEST(ImageRange, FrontRowMatchesScalarOracle) {
  const auto want = oracle::image_range(9.80, 6.50, 24.40, 10.80);
  const auto got = image_range({9.80, 6.50}, mount(24.40, 10.80, 3.63));
  EXPECT_NEAR(got.width_m, want.w, 1e-12);
  EXPECT_NEAR(got.depth_m, want.h, 1e-12);
  EXPECT_NEAR(got.width_m, 10.844, 1e-3);
  EXPECT_NEAR(got.depth_m, 19.901, 1e-3);
}

TEST(ImageRange, ZeroBetaKeepsWidth) {
  const auto got = image_range({15.60, 6.55}, mount(33.90, 0.0, 3.94));
  EXPECT_EQ(got.width_m, 15.60);
  EXPECT_NEAR(got.depth_m, oracle::image_range(15.60, 6.55, 33.90, 0.0).h, 1e-12);
  EXPECT_NEAR(got.depth_m, 11.744, 1e-3);
}

TEST(ImageRange, StraightDownEqualsDisplay) {
  const auto got = image_range({4.0, 3.0}, mount(90.0, 0.0, 2.0));
  EXPECT_DOUBLE_EQ(got.width_m, 4.0);
  EXPECT_DOUBLE_EQ(got.depth_m, 3.0);
}

TEST(ImageRange, ZeroAlphaIsDomainError) {
  EXPECT_THROW(image_range({4.0, 3.0}, mount(0.0, 0.0, 2.0)), DomainError);
}

TEST(FovFromImageRange, MatchesOracle) {
  const auto front = oracle::image_range(9.80, 6.50, 24.40, 10.80);
  EXPECT_NEAR(fov_from_image_range({front.w, front.h}, 3.63), oracle::fov_deg(front, 3.63), 1e-10);
  EXPECT_NEAR(fov_from_image_range({front.w, front.h}, 3.63), 144.5, 0.05);
  const auto side = oracle::image_range(15.60, 6.55, 33.90, 0.0);
  EXPECT_NEAR(fov_from_image_range({side.w, side.h}, 3.94), 136.1, 0.1);
}

TEST(FovFromImageRange, DiagonalTwiceDistanceIsRightAngle) {
  EXPECT_NEAR(fov_from_image_range({3.0, 4.0}, 2.5), 90.0, 1e-12);
}

TEST(FovFromImageRange, NonPositiveDistanceIsDomainError) {
  EXPECT_THROW(fov_from_image_range({3.0, 4.0}, 0.0), DomainError);
  EXPECT_THROW(fov_from_image_range({3.0, 4.0}, -1.0), DomainError);
}

TEST(MinKOverF, ReferenceRigRows) {
  const auto rig = reference_rig();
  const double expected[] = {6.24, 4.96, 3.75, 4.96};
  ASSERT_EQ(rig.cameras.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& c = rig.cameras[i];
    const auto fp = oracle::image_range(c.display.width_m, c.display.depth_m, c.mount.alpha_deg, c.mount.beta_deg);
    const double want = oracle::k_over_f(oracle::fov_deg(fp, c.mount.distance_m));
    EXPECT_NEAR(min_k_over_f(c.display, c.mount), want, 1e-9) << c.mount.name;
    EXPECT_NEAR(min_k_over_f(c.display, c.mount), expected[i], 0.01) << c.mount.name;
  }
}

TEST(MinKOverF, RoundTripEqualsDiagonalOverDistance) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> w(0.5, 20), a(1, 90), b(0, 89.9), d(0.5, 10);
  for (int i = 0; i < 1000; ++i) {
    const DisplayRange dr{w(rng), w(rng)};
    const auto m = mount(a(rng), b(rng), d(rng));
    const auto ir = image_range(dr, m);
    const double direct = std::hypot(ir.width_m, ir.depth_m) / m.distance_m;
    EXPECT_NEAR(min_k_over_f(dr, m), direct, 1e-9 * direct);
  }
}

TEST(MinKOverF, Monotonicity) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> w(0.5, 20), a(5, 90), b(0, 80), d(0.5, 10);
  for (int i = 0; i < 500; ++i) {
    const DisplayRange dr{w(rng), w(rng)};
    const auto m = mount(a(rng), b(rng), d(rng));
    const double base = min_k_over_f(dr, m);
    EXPECT_LT(base, min_k_over_f({dr.width_m * 1.01, dr.depth_m}, m));
    EXPECT_LT(base, min_k_over_f({dr.width_m, dr.depth_m * 1.01}, m));
    auto farther = m;
    farther.distance_m *= 1.01;
    EXPECT_GT(base, min_k_over_f(dr, farther));
  }
}

TEST(LensSatisfies, StrictInequality) {
  EXPECT_TRUE(lens_satisfies(lens(148), 6.24));
  EXPECT_TRUE(lens_satisfies(lens(148), 3.75));
  EXPECT_FALSE(lens_satisfies(lens(90), 2.0));
  EXPECT_NEAR(lens(148).k_over_f(), oracle::k_over_f(148), 1e-12);
  EXPECT_NEAR(lens(148).k_over_f(), 6.97, 0.01);
}

TEST(LensSpec, SensorAndFocalMustAgreeWithFov) {
  auto l = lens(90);
  l.sensor_size = 2.0;
  l.focal_length = 1.0;
  EXPECT_NO_THROW(validate(l));
  EXPECT_DOUBLE_EQ(l.k_over_f(), 2.0);
  l.focal_length = 2.0;
  EXPECT_THROW(validate(l), ConfigError);
}

TEST(PlanningReport, ReferenceRigAllPassAt148) {
  const auto rig = reference_rig();
  const auto report = planning_report(rig.cameras, lens(148));
  ASSERT_EQ(report.rows.size(), 4u);
  for (const auto& row : report.rows) EXPECT_TRUE(row.pass) << row.camera;
}

TEST(PlanningReport, NinetyDegreeLensFailsFrontAndSides) {
  const auto rig = reference_rig();
  const auto report = planning_report(rig.cameras, lens(90));
  for (const auto& row : report.rows) {
    // 2 tan(45 deg) = 2 is below every requirement of the reference rig.
    EXPECT_FALSE(row.pass) << row.camera;
  }
}

TEST(PlanningReport, EmptyRigGivesEmptyTable) {
  const auto report = planning_report({}, lens(148));
  EXPECT_TRUE(report.rows.empty());
  const auto text = to_text_table(report);
  EXPECT_NE(text.find("camera"), std::string::npos);
}

TEST(PlanningReport, TextTableRoundsToTwoDecimals) {
  const auto rig = reference_rig();
  const auto text = to_text_table(planning_report(rig.cameras, lens(148)));
  EXPECT_NE(text.find("6.24"), std::string::npos);
  EXPECT_NE(text.find("4.96"), std::string::npos);
  EXPECT_NE(text.find("3.75"), std::string::npos);
}

TEST(Azimuth, NamesRoundTrip) {
  for (auto a : {Azimuth::Front, Azimuth::Right, Azimuth::Rear, Azimuth::Left}) {
    EXPECT_EQ(azimuth_from_string(to_string(a)), a);
  }
  EXPECT_THROW(azimuth_from_string("up"), ConfigError);
  EXPECT_DOUBLE_EQ(azimuth_heading_deg(Azimuth::Front), 90.0);
  EXPECT_DOUBLE_EQ(azimuth_heading_deg(Azimuth::Right), 0.0);
}

TEST(CameraMount, ValidateRejectsBadValues) {
  EXPECT_NO_THROW(validate(mount(30, 0, 3)));
  EXPECT_THROW(validate(mount(0, 0, 3)), ConfigError);
  EXPECT_THROW(validate(mount(91, 0, 3)), ConfigError);
  EXPECT_THROW(validate(mount(30, 90, 3)), ConfigError);
  EXPECT_THROW(validate(mount(30, 0, 0)), ConfigError);
  EXPECT_THROW(validate(mount(30, 0, 3, -1)), ConfigError);
}

#include <gtest/gtest.h>

#include <random>

#include "avm/errors.hpp"
#include "avm/kinematics.hpp"
#include "oracles.hpp"

using namespace avm;
using namespace avm::kinematics;

namespace {

const LinkGeometry kLinks{4.6, 2.5, 1.0, 1.2, 0.0};

}  // namespace

TEST(ForwardKinematics, AllZeroAngles) {
  const auto s = forward_kinematics(kLinks, {0, 0, 0, 0});
  EXPECT_NEAR(s.boom_tip.x(), 4.6, 1e-12);
  EXPECT_NEAR(s.boom_tip.y(), 0.0, 1e-12);
  EXPECT_NEAR(s.arm_tip.x(), 7.1, 1e-12);
  EXPECT_NEAR(s.arm_tip.y(), 0.0, 1e-12);
  EXPECT_NEAR(s.bucket_tip.x(), 7.1, 1e-12);
  EXPECT_NEAR(s.bucket_tip.y(), -1.0, 1e-12);
  EXPECT_NEAR(s.ground_distance_m, 0.2, 1e-12);
  EXPECT_NEAR(s.radius_m, 7.1, 1e-12);
}

TEST(ForwardKinematics, BoomOnlyScalarOracle) {
  const auto s = forward_kinematics(kLinks, {30, 0, 0, 0});
  EXPECT_NEAR(s.boom_tip.x(), 4.6 * std::cos(oracle::rad(30)), 1e-12);
  EXPECT_NEAR(s.boom_tip.y(), 4.6 * std::sin(oracle::rad(30)), 1e-12);
  EXPECT_NEAR(s.boom_tip.x(), 3.984, 1e-3);
  EXPECT_NEAR(s.boom_tip.y(), 2.300, 1e-3);
}

TEST(ForwardKinematics, MixedPoseMatchesVectorChain) {
  const auto want = oracle::rotate_and_accumulate(4.6, 2.5, 1.0, 1.2, 30, -45, 20);
  const auto s = forward_kinematics(kLinks, {30, -45, 20, 0});
  EXPECT_NEAR(s.bucket_tip.x(), want.c.x(), 1e-9);
  EXPECT_NEAR(s.bucket_tip.y(), want.c.y(), 1e-9);
  EXPECT_NEAR(s.ground_distance_m, want.ground_distance, 1e-9);
  const auto overlay = overlay_payload(s, kLinks);
  EXPECT_DOUBLE_EQ(overlay.ground_distance_readout_m, std::round(want.ground_distance * 100.0) / 100.0);
}

TEST(ForwardKinematics, RandomStatesMatchOracleAndPreserveLinks) {
  std::mt19937_64 rng(2024);
  const JointLimits lim;
  std::uniform_real_distribution<double> bm(lim.boom.min_deg, lim.boom.max_deg);
  std::uniform_real_distribution<double> arm(lim.arm.min_deg, lim.arm.max_deg);
  std::uniform_real_distribution<double> bkt(lim.bucket.min_deg, lim.bucket.max_deg);
  for (int i = 0; i < 10000; ++i) {
    const JointState j{bm(rng), arm(rng), bkt(rng), 0};
    const auto s = forward_kinematics(kLinks, j);
    const auto o = oracle::rotate_and_accumulate(4.6, 2.5, 1.0, 1.2, j.boom_deg, j.arm_deg, j.bucket_deg);
    ASSERT_NEAR(s.boom_tip.x(), o.a.x(), 1e-9);
    ASSERT_NEAR(s.boom_tip.y(), o.a.y(), 1e-9);
    ASSERT_NEAR(s.arm_tip.x(), o.b.x(), 1e-9);
    ASSERT_NEAR(s.arm_tip.y(), o.b.y(), 1e-9);
    ASSERT_NEAR(s.bucket_tip.x(), o.c.x(), 1e-9);
    ASSERT_NEAR(s.bucket_tip.y(), o.c.y(), 1e-9);
    ASSERT_NEAR(s.ground_distance_m, o.ground_distance, 1e-9);
    ASSERT_NEAR(s.boom_tip.norm(), 4.6, 1e-9);
    ASSERT_NEAR((s.arm_tip - s.boom_tip).norm(), 2.5, 1e-9);
    ASSERT_NEAR((s.bucket_tip - s.arm_tip).norm(), 1.0, 1e-9);
    ASSERT_NEAR(s.ground_distance_m - kLinks.pivot_height_m, s.bucket_tip.y(), 1e-12);
  }
}

TEST(ForwardKinematics, BoomAngleRaisesBoomTip) {
  double prev = -1e9;
  for (double a = -20; a <= 80; a += 0.5) {
    const double y = forward_kinematics(kLinks, {a, -60, 0, 0}).boom_tip.y();
    EXPECT_GT(y, prev);
    prev = y;
  }
}

TEST(ForwardKinematics, ZeroBucketHangsStraightDown) {
  const auto s = forward_kinematics(kLinks, {40, -70, 0, 0});
  EXPECT_NEAR(s.bucket_tip.x(), s.arm_tip.x(), 1e-12);
  EXPECT_NEAR(s.arm_tip.y() - s.bucket_tip.y(), kLinks.bucket_length_m, 1e-12);
}

TEST(ForwardKinematics, BelowGradeIsNotClamped) {
  const auto s = forward_kinematics(kLinks, {-20, -90, 0, 0});
  EXPECT_LT(s.ground_distance_m, 0.0);
}

TEST(ForwardKinematics, SlewOffsetShiftsRadius) {
  auto links = kLinks;
  links.slew_offset_m = 0.4;
  const auto s = forward_kinematics(links, {10, -30, 5, 0});
  EXPECT_NEAR(s.radius_m, 0.4 + s.bucket_tip.x(), 1e-12);
}

TEST(ForwardKinematics, OutOfRangeIsRangeError) {
  EXPECT_THROW(forward_kinematics(kLinks, {81, -30, 0, 0}), RangeError);
  EXPECT_THROW(forward_kinematics(kLinks, {10, 1, 0, 0}), RangeError);
  EXPECT_THROW(forward_kinematics(kLinks, {10, -30, -91, 0}), RangeError);
  JointLimits wide;
  wide.boom = {-90, 90};
  EXPECT_NO_THROW(forward_kinematics(kLinks, {85, -30, 0, 0}, wide));
}

TEST(LinkGeometry, ValidateRejectsNonPositiveLengths) {
  EXPECT_NO_THROW(validate(kLinks));
  auto bad = kLinks;
  bad.arm_length_m = 0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = kLinks;
  bad.pivot_height_m = -0.1;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(OverlayPayload, SegmentsFollowTheChain) {
  const auto s = forward_kinematics(kLinks, {0, 0, 0, 0});
  const auto o = overlay_payload(s, kLinks);
  const Eigen::Vector3d pivot{0, 0, 1.2};
  EXPECT_TRUE(o.segments[0].from.isApprox(pivot));
  EXPECT_TRUE(o.segments[0].to.isApprox(Eigen::Vector3d(0, 4.6, 1.2)));
  EXPECT_TRUE(o.segments[1].from.isApprox(o.segments[0].to));
  EXPECT_TRUE(o.segments[1].to.isApprox(Eigen::Vector3d(0, 7.1, 1.2)));
  EXPECT_TRUE(o.segments[2].from.isApprox(o.segments[1].to));
  EXPECT_TRUE(o.segments[2].to.isApprox(Eigen::Vector3d(0, 7.1, 0.2)));
  EXPECT_DOUBLE_EQ(o.radius_m, s.radius_m);
  EXPECT_DOUBLE_EQ(o.ground_distance_readout_m, 0.2);
}

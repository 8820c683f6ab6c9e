#include <gtest/gtest.h>

#include "avm/config.hpp"
#include "avm/errors.hpp"
#include "avm/markers.hpp"
#include "avm/scene.hpp"
#include "avm/telemetry.hpp"

using namespace avm;
using namespace avm::scene;

namespace {

projection::CameraModel straight_down(Eigen::Vector3d pos) {
  camgeom::CameraMount m;
  m.name = "down";
  m.height_m = pos.z();
  m.alpha_deg = 90;
  m.distance_m = pos.z();
  m.position_m = pos;
  camgeom::LensSpec l;
  l.fov_deg = 148;
  l.width_px = 320;
  l.height_px = 240;
  return projection::make_camera_model(m, l);
}

MotionProfile ramp_profile(double seconds) {
  MotionProfile p;
  p.duration_s = seconds;
  p.boom = Timeline({{0, 0}, {seconds, 30}});
  p.arm = Timeline::constant(-60);
  p.bucket = Timeline::constant(10);
  p.roll = Timeline::constant(1);
  p.pitch = Timeline::constant(-1);
  p.yaw = Timeline::constant(5);
  return p;
}

}  // namespace

TEST(Render, MarkerCentroidsMatchProjection) {
  const auto rig = reference_rig();
  const auto cams = rig.camera_models();
  const auto sc = checkerboard_scene();
  const auto frames = render_rig(sc, cams, {}, RenderOptions{4});
  int checked = 0;
  for (std::size_t c = 0; c < cams.size(); ++c) {
    const auto pose = projection::camera_pose_matrix(cams[c].mount, {});
    const auto centroids = markers::marker_centroids(frames[c]);
    for (const auto& m : sc.markers) {
      const auto px = projection::project_ground_point(cams[c], pose, m.position_m);
      if (!px) continue;
      // Skip discs that touch the rim of the image circle.
      if ((*px - cams[c].principal_point()).norm() > cams[c].image_circle_radius_px - 40) continue;
      const auto found = centroids.find(m.id);
      ASSERT_NE(found, centroids.end()) << "camera " << c << " marker " << m.id;
      EXPECT_LT((found->second - *px).norm(), 0.5) << "camera " << c << " marker " << m.id;
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

TEST(Render, StraightDownCentreShowsNadirColour) {
  auto sc = checkerboard_scene();
  sc.markers.clear();
  for (const Eigen::Vector2d& nadir : {Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1.5, 0.5)}) {
    const auto cam = straight_down({nadir.x(), nadir.y(), 2.0});
    const auto img = render_camera_view(sc, cam, projection::camera_pose_matrix(cam.mount, {}));
    const auto gt = ground_truth(sc, {}, 1);
    const auto g = projection::MosaicSpec{}.ground_to_pixel(nadir);
    EXPECT_EQ(img.at(160, 120), gt.image.at(static_cast<int>(g.x()), static_cast<int>(g.y())));
  }
}

TEST(Render, EmptySceneIsUniformGround) {
  Scene empty;
  empty.checker_pitch_m = 0;
  const auto cam = straight_down({0, 0, 2.0});
  const auto img = render_camera_view(empty, cam, projection::camera_pose_matrix(cam.mount, {}));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const bool inside = (Eigen::Vector2d(x, y) - cam.principal_point()).norm() < cam.image_circle_radius_px - 1;
      if (inside) {
        ASSERT_EQ(img.at(x, y), empty.light);
      }
    }
  }
}

TEST(Render, Deterministic) {
  const auto rig = reference_rig();
  const auto cams = rig.camera_models();
  const auto cam = cams[1];
  const auto pose = projection::camera_pose_matrix(cam.mount, {2, -1, 7, 0});
  const auto sc = default_scene();
  EXPECT_TRUE(render_camera_view(sc, cam, pose) == render_camera_view(sc, cam, pose));
}

TEST(Render, PropsHideTheGround) {
  Scene sc;
  Prop box;
  box.center_m = {0, 0};
  box.size_m = {20, 20};
  box.height_m = 0.5;
  box.color = {40, 90, 200};
  sc.props = {box};
  const auto cam = straight_down({0, 0, 2.0});
  const auto img = render_camera_view(sc, cam, projection::camera_pose_matrix(cam.mount, {}));
  EXPECT_EQ(img.at(160, 120), box.color);
}

TEST(GroundTruth, SquaresAreFiftyPixels) {
  auto sc = checkerboard_scene();
  sc.markers.clear();
  const projection::MosaicSpec spec;
  const auto gt = ground_truth(sc, spec, 2);
  const int row = 425;  // inside a row of squares
  int last_change = -1;
  for (int x = 1; x < spec.side_px(); ++x) {
    if (gt.image.at(x, row) != gt.image.at(x - 1, row)) {
      if (last_change >= 0) {
        EXPECT_EQ(x - last_change, 50);
      }
      last_change = x;
    }
  }
  EXPECT_GE(last_change, 0);
  for (int x = 0; x < spec.side_px(); ++x) {
    const auto c = gt.image.at(x, row);
    ASSERT_TRUE(c == sc.light || c == sc.dark);
  }
}

TEST(GroundTruth, MarkerPixelsAndOcclusion) {
  Scene sc;
  sc.markers = {{0, {3, 4}, 0.15}, {1, {-2, -2}, 0.15}};
  Prop p;
  p.center_m = {-2, -2};
  sc.props = {p};
  const projection::MosaicSpec spec;
  const auto gt = ground_truth(sc, spec, 1);
  ASSERT_EQ(gt.markers.size(), 2u);
  EXPECT_TRUE(gt.markers[0].pixel.isApprox(spec.origin_px() + Eigen::Vector2d(150, -200)));
  EXPECT_FALSE(gt.markers[0].occluded);
  EXPECT_TRUE(gt.markers[1].occluded);
  const auto centroids = markers::marker_centroids(gt.image);
  ASSERT_EQ(centroids.count(0), 1u);
  EXPECT_LT((centroids.at(0) - gt.markers[0].pixel).norm(), 0.05);
  EXPECT_EQ(centroids.count(1), 0u);
}

TEST(Markers, ChromaKeyRecoversIdsUnderBlending) {
  Image img(40, 20, {128, 128, 128});
  // Marker 5 blended 50 % with grey at one pixel, fully present at another.
  const auto c = markers::marker_color(5);
  img.set(10, 10, c);
  img.set(11, 10, {static_cast<std::uint8_t>((c.r + 128) / 2), static_cast<std::uint8_t>((c.g + 128) / 2),
                   static_cast<std::uint8_t>((c.b + 128) / 2)});
  img.set(30, 5, markers::marker_color(17));
  const auto found = markers::marker_centroids(img);
  ASSERT_EQ(found.size(), 2u);
  EXPECT_NEAR(found.at(5).y(), 10.0, 1e-9);
  EXPECT_GT(found.at(5).x(), 10.0);
  EXPECT_LT(found.at(5).x(), 10.5);
  EXPECT_TRUE(found.at(17).isApprox(Eigen::Vector2d(30, 5)));
  EXPECT_THROW(markers::marker_color(32), std::out_of_range);
}

TEST(SceneValidate, RejectsBadScenes) {
  EXPECT_NO_THROW(validate(checkerboard_scene(), nullptr));
  EXPECT_NO_THROW(validate(default_scene(), nullptr));
  auto dup = checkerboard_scene();
  dup.markers[1].id = dup.markers[0].id;
  EXPECT_THROW(validate(dup), ConfigError);
  auto far = checkerboard_scene();
  far.markers[0].position_m = {7.95, 0};
  const projection::MosaicSpec spec;
  EXPECT_NO_THROW(validate(far));
  EXPECT_THROW(validate(far, &spec), ConfigError);
  auto red = checkerboard_scene();
  Prop p;
  p.color = {250, 40, 40};
  red.props = {p};
  EXPECT_THROW(validate(red), ConfigError);
  auto tinted = checkerboard_scene();
  tinted.light = {200, 190, 200};
  EXPECT_THROW(validate(tinted), ConfigError);
}

TEST(Telemetry, RecordCountAndTimestamps) {
  const auto recs = telemetry_stream(ramp_profile(3.0));
  ASSERT_EQ(recs.size(), 11u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].timestamp_ms, static_cast<std::int64_t>(300 * i));
    EXPECT_EQ(recs[i].joints.timestamp_ms, recs[i].timestamp_ms);
    EXPECT_EQ(recs[i].attitude.timestamp_ms, recs[i].timestamp_ms);
  }
}

TEST(Telemetry, LinearInterpolation) {
  const auto recs = telemetry_stream(ramp_profile(3.0));
  EXPECT_EQ(recs[5].timestamp_ms, 1500);
  EXPECT_NEAR(recs[5].joints.boom_deg, 15.0, 1e-9);
  const auto mid = sample_profile(ramp_profile(3.0), 1000);
  EXPECT_NEAR(mid.joints.boom_deg, 10.0, 1e-9);
}

TEST(Telemetry, ConstantProfileRepeats) {
  MotionProfile p;
  p.duration_s = 2.0;
  p.boom = Timeline::constant(12);
  p.arm = Timeline::constant(-30);
  p.roll = Timeline::constant(2);
  const auto recs = telemetry_stream(p);
  for (const auto& r : recs) {
    EXPECT_EQ(r.joints.boom_deg, recs[0].joints.boom_deg);
    EXPECT_EQ(r.joints.arm_deg, recs[0].joints.arm_deg);
    EXPECT_EQ(r.attitude.roll_deg, recs[0].attitude.roll_deg);
  }
}

TEST(Telemetry, ZeroDurationGivesOneRecord) {
  MotionProfile p;
  p.duration_s = 0;
  EXPECT_EQ(telemetry_stream(p).size(), 1u);
}

TEST(Telemetry, DeterministicStream) {
  const auto a = telemetry_stream(default_profile());
  const auto b = telemetry_stream(default_profile());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].timestamp_ms, b[i].timestamp_ms);
    EXPECT_EQ(a[i].joints.boom_deg, b[i].joints.boom_deg);
    EXPECT_EQ(a[i].attitude, b[i].attitude);
  }
}

TEST(Timeline, ClampsAndRejectsDuplicateTimes) {
  const Timeline t({{2, 20}, {1, 10}});
  EXPECT_EQ(t.sample(0), 10);
  EXPECT_EQ(t.sample(5), 20);
  EXPECT_NEAR(t.sample(1.25), 12.5, 1e-12);
  EXPECT_THROW(Timeline({{1, 0}, {1, 2}}), ConfigError);
}

TEST(ProfileValidate, RejectsOutOfEnvelope) {
  EXPECT_NO_THROW(validate(default_profile()));
  auto p = default_profile();
  p.cadence_ms = 0;
  EXPECT_THROW(validate(p), ConfigError);
  p = default_profile();
  p.roll = Timeline({{0, 0}, {1, 31}});
  EXPECT_THROW(validate(p), ConfigError);
  p = default_profile();
  p.boom = Timeline::constant(85);
  EXPECT_THROW(validate(p), ConfigError);
  p = default_profile();
  p.duration_s = -1;
  EXPECT_THROW(validate(p), ConfigError);
}

#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include "avm/calibration.hpp"
#include "avm/config.hpp"
#include "avm/errors.hpp"
#include "avm/pipeline.hpp"
#include "avm/projection.hpp"

using namespace avm;
using namespace avm::service;
using namespace std::chrono_literals;

namespace {

scene::MotionProfile still_profile(double seconds, double roll = 0, double pitch = 0) {
  scene::MotionProfile p;
  p.duration_s = seconds;
  p.boom = scene::Timeline::constant(20);
  p.arm = scene::Timeline::constant(-90);
  p.bucket = scene::Timeline::constant(0);
  p.roll = scene::Timeline::constant(roll);
  p.pitch = scene::Timeline::constant(pitch);
  p.yaw = scene::Timeline::constant(0);
  return p;
}

PipelineOptions virtual_options() {
  PipelineOptions o;
  o.mode = Mode::Virtual;
  return o;
}

}  // namespace

TEST(ActiveViewName, ParsesAndRejects) {
  EXPECT_TRUE(ActiveView::parse("topview", 4).is_topview());
  EXPECT_EQ(ActiveView::parse("camera-2", 4).camera, 2);
  EXPECT_EQ(ActiveView{3}.name(), "camera-3");
  EXPECT_THROW(ActiveView::parse("camera-4", 4), ValidationError);
  EXPECT_THROW(ActiveView::parse("side", 4), ValidationError);
}

TEST(Pipeline, RejectsBadConfiguration) {
  PipelineOptions o;
  o.target_fps = 0;
  EXPECT_THROW(Pipeline(reference_rig(), scene::checkerboard_scene(), still_profile(1), o), ConfigError);
  auto p = still_profile(1);
  p.cadence_ms = 0;
  EXPECT_THROW(Pipeline(reference_rig(), scene::checkerboard_scene(), p), ConfigError);
}

TEST(Pipeline, CadenceAbsentBeforeTelemetry) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1));
  const auto s = pipe.stats_report();
  EXPECT_FALSE(s.joints_cadence);
  EXPECT_FALSE(s.attitude_cadence);
  EXPECT_FALSE(s.fps);
}

TEST(Pipeline, ZeroDurationVirtualRunPublishesAFrame) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(0), virtual_options());
  const auto s = pipe.run_virtual();
  EXPECT_GE(s.frames_published, 1u);
  EXPECT_TRUE(s.fps_unpaced);
  ASSERT_TRUE(pipe.latest_frame());
  EXPECT_TRUE(pipe.latest_frame()->view.is_topview());
}

TEST(Pipeline, VirtualRunReportsExactCadence) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(3.3), virtual_options());
  const auto s = pipe.run_virtual();
  ASSERT_TRUE(s.joints_cadence);
  ASSERT_TRUE(s.attitude_cadence);
  EXPECT_EQ(s.joints_cadence->samples, 11u);
  EXPECT_NEAR(s.joints_cadence->mean_ms, 300.0, 1e-9);
  EXPECT_NEAR(s.attitude_cadence->stddev_ms, 0.0, 1e-9);
  EXPECT_GE(s.frames_published, 99u);
  EXPECT_EQ(pipe.latest_frame()->telemetry_ms, 3300);
}

TEST(Pipeline, CameraViewSnapshotIsTheRawFrame) {
  const auto rig = reference_rig();
  const auto sc = scene::checkerboard_scene();
  Pipeline pipe(rig, sc, still_profile(1, 2, -1));
  pipe.handle_command({"select_view", {{"view", "camera-2"}}});
  const auto frame = pipe.snapshot();
  ASSERT_EQ(frame->view.camera, 2);
  const auto cams = rig.camera_models();
  const auto expected = scene::render_rig(sc, cams, {2, -1, 0, 0});
  ASSERT_TRUE(frame->image);
  EXPECT_TRUE(*frame->image == expected[2]);
}

TEST(Pipeline, TogglingCalibrationRaisesMarkerError) {
  const auto rig = reference_rig();
  const auto sc = scene::checkerboard_scene();
  Pipeline flat(rig, sc, still_profile(1));
  flat.handle_command({"toggle_overlay", {{"enabled", false}}});
  const auto reference = flat.snapshot();

  Pipeline tilted(rig, sc, still_profile(1, 3));
  tilted.handle_command({"toggle_overlay", {{"enabled", false}}});
  const auto refs = sc.marker_refs();
  const auto on = calibration::distortion_metric(*tilted.snapshot()->image, *reference->image, refs, rig.mosaic);
  const auto state = tilted.handle_command({"toggle_calibration", {{"enabled", false}}});
  EXPECT_FALSE(state.calibration);
  const auto off = calibration::distortion_metric(*tilted.snapshot()->image, *reference->image, refs, rig.mosaic);
  EXPECT_LT(on.mean_m, 0.02);
  EXPECT_GT(off.mean_m, on.mean_m);
  EXPECT_GT(off.mean_m, 0.05);
}

TEST(Pipeline, RejectedCommandsLeaveStateUnchanged) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1));
  const auto before = pipe.view_state();
  EXPECT_THROW(pipe.handle_command({"set_joints", {{"theta_bm_deg", 200}}}), ValidationError);
  EXPECT_THROW(pipe.handle_command({"set_joints", {{"theta_bm_deg", "up"}}}), ValidationError);
  EXPECT_THROW(pipe.handle_command({"set_attitude", {{"roll_deg", 45}}}), ValidationError);
  EXPECT_THROW(pipe.handle_command({"select_view", {{"view", "camera-9"}}}), ValidationError);
  EXPECT_THROW(pipe.handle_command({"set_profile", {{"profile", {{"cadence_ms", -5}}}}}), ValidationError);
  EXPECT_THROW(pipe.handle_command({"fly", {}}), UnknownCommandError);
  const auto after = pipe.view_state();
  EXPECT_EQ(after.joints, before.joints);
  EXPECT_EQ(after.attitude, before.attitude);
  EXPECT_EQ(after.view, before.view);
  EXPECT_EQ(after.commands_applied, before.commands_applied);
  EXPECT_FALSE(after.manual_joints);
}

TEST(Pipeline, SetJointsUpdatesPose) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1));
  const auto s = pipe.handle_command({"set_joints", {{"theta_bm_deg", 30}}});
  EXPECT_TRUE(s.manual_joints);
  EXPECT_EQ(s.joints.boom_deg, 30);
  EXPECT_EQ(s.joints.arm_deg, -90);  // untouched
  const auto expected = kinematics::forward_kinematics(reference_rig().links, s.joints);
  EXPECT_NEAR(s.pose.ground_distance_m, expected.ground_distance_m, 1e-12);
  const auto y = pipe.handle_command({"set_attitude", {{"yaw_deg", -90}}});
  EXPECT_DOUBLE_EQ(y.attitude.yaw_deg, 270);
}

TEST(Pipeline, ConcurrentTogglesSerialize) {
  PipelineOptions o;
  o.loop_profile = true;
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1), o);
  std::mutex m;
  std::uint64_t last_seq = 0;
  std::int64_t last_telemetry = -1;
  bool ordered = true;
  pipe.set_frame_listener([&](const std::shared_ptr<const PublishedFrame>& f) {
    std::lock_guard lk(m);
    if (f->seq <= last_seq && last_seq != 0) ordered = false;
    if (f->telemetry_ms < last_telemetry) ordered = false;
    last_seq = f->seq;
    last_telemetry = f->telemetry_ms;
  });
  const bool initial = pipe.view_state().overlay;
  pipe.start();
  std::vector<std::jthread> clients;
  for (int c = 0; c < 4; ++c) {
    clients.emplace_back([&] {
      for (int i = 0; i < 25; ++i) pipe.handle_command({"toggle_overlay", {}});
    });
  }
  clients.clear();
  std::this_thread::sleep_for(1500ms);
  pipe.stop();
  const auto s = pipe.view_state();
  EXPECT_EQ(s.overlay, initial);
  EXPECT_EQ(s.commands_applied, 100u);
  std::lock_guard lk(m);
  EXPECT_TRUE(ordered);
  EXPECT_GT(last_seq, 10u);
  EXPECT_GT(last_telemetry, 0);
}

TEST(Pipeline, SetProfileRestartsTelemetry) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(1));
  pipe.handle_command({"set_joints", {{"theta_bm_deg", 30}}});
  auto p = still_profile(2, 4);
  const auto s = pipe.handle_command({"set_profile", {{"profile", to_json(p)}}});
  EXPECT_FALSE(s.manual_joints);
  EXPECT_EQ(s.joints.boom_deg, 20);
  EXPECT_EQ(s.attitude.roll_deg, 4);
}

TEST(Pipeline, SetProfileStartsFreshCadence) {
  Pipeline pipe(reference_rig(), scene::checkerboard_scene(), still_profile(3.3), virtual_options());
  ASSERT_TRUE(pipe.run_virtual().joints_cadence);
  pipe.handle_command({"set_profile", {{"profile", to_json(still_profile(1))}}});
  EXPECT_FALSE(pipe.stats_report().joints_cadence);
  EXPECT_FALSE(pipe.stats_report().attitude_cadence);
}

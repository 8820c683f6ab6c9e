// avm: plan a camera rig, render synthetic views, run the pipeline, serve clients.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "avm/calibration.hpp"
#include "avm/config.hpp"
#include "avm/draw.hpp"
#include "avm/errors.hpp"
#include "avm/pipeline.hpp"
#include "avm/protocol.hpp"
#include "avm/server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct Inputs {
  std::string config, scene, profile;
  int supersample = 1;
};

avm::RigConfig load_rig(const Inputs& in) {
  return in.config.empty() ? avm::reference_rig() : avm::load_rig_config(in.config);
}
avm::scene::Scene load_scene(const Inputs& in) {
  return in.scene.empty() ? avm::scene::default_scene() : avm::load_scene(in.scene);
}
avm::scene::MotionProfile load_profile(const Inputs& in) {
  return in.profile.empty() ? avm::scene::default_profile() : avm::load_profile(in.profile);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

int cmd_plan(const Inputs& in, const std::string& report, bool as_json) {
  const auto rig = load_rig(in);
  const auto result = avm::camgeom::planning_report(rig.cameras, rig.lens);
  if (as_json) {
    std::cout << avm::to_json(result).dump(2) << '\n';
  } else {
    std::cout << avm::camgeom::to_text_table(result);
  }
  if (!report.empty()) write_json(report, avm::to_json(result));
  return 0;
}

int cmd_render(const Inputs& in, const std::string& out_dir, const avm::calibration::RigAttitude& attitude,
               bool calibrated, std::optional<avm::kinematics::JointState> joints) {
  const auto rig = load_rig(in);
  const auto scene = load_scene(in);
  avm::scene::validate(scene, &rig.mosaic);
  avm::calibration::check_envelope(attitude);
  const auto cameras = rig.camera_models();
  fs::create_directories(out_dir);

  const auto frames = avm::scene::render_rig(scene, cameras, attitude, {in.supersample});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto path = fs::path(out_dir) / fmt::format("camera-{}-{}.png", i, rig.cameras[i].mount.name);
    avm::write_png(path, frames[i]);
  }
  const auto maps = avm::projection::build_lookup_maps(
      cameras, rig.body, calibrated ? attitude : avm::calibration::RigAttitude{}, rig.mosaic);
  auto mosaic = avm::projection::compose_topview(frames, maps);
  if (joints) {
    const auto pose = avm::kinematics::forward_kinematics(rig.links, *joints, rig.limits);
    avm::draw::working_overlay(mosaic, avm::kinematics::overlay_payload(pose, rig.links), pose, rig.links,
                               calibrated ? attitude : avm::calibration::RigAttitude{}, rig.mosaic);
  }
  avm::write_png(fs::path(out_dir) / "topview.png", mosaic);
  const auto cov = avm::projection::coverage_report(maps);
  std::cout << fmt::format("wrote {} camera views and topview.png to {} (coverage radius {:.2f} m)\n", frames.size(),
                           out_dir, cov.max_covered_radius_m);
  return 0;
}

void print_stats(const avm::service::PipelineStats& s) {
  std::cout << avm::protocol::to_json(s).dump(2) << '\n';
}

int cmd_simulate(const Inputs& in, bool virtual_mode, const std::string& report, const std::string& out_dir,
                 double duration_s) {
  avm::service::PipelineOptions opts;
  opts.mode = virtual_mode ? avm::service::Mode::Virtual : avm::service::Mode::Realtime;
  opts.render.supersample = in.supersample;
  const auto profile = load_profile(in);
  avm::service::Pipeline pipeline(load_rig(in), load_scene(in), profile, opts);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    pipeline.set_frame_listener([out_dir](const auto& frame) {
      avm::write_png(fs::path(out_dir) / fmt::format("frame-{:05d}.png", frame->seq), *frame->image);
    });
  }
  const auto stats = virtual_mode
                         ? pipeline.run_virtual()
                         : pipeline.run_realtime(std::chrono::milliseconds(static_cast<std::int64_t>(
                               1000.0 * (duration_s > 0 ? duration_s : profile.duration_s))));
  print_stats(stats);
  if (!report.empty()) write_json(report, avm::protocol::to_json(stats));
  return 0;
}

int cmd_serve(const Inputs& in, const std::string& address, unsigned short port, double duration_s, bool loop) {
  avm::service::PipelineOptions opts;
  opts.render.supersample = in.supersample;
  opts.loop_profile = loop;
  avm::service::Pipeline pipeline(load_rig(in), load_scene(in), load_profile(in), opts);
  avm::server::ServerOptions sopts;
  sopts.address = address;
  sopts.port = port;
  avm::server::Server server(pipeline, sopts);
  server.start();
  pipeline.start();
  std::cout << fmt::format("serving on ws://{}:{}/\n", address, server.port()) << std::flush;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration_s);
  while (!g_interrupted && (duration_s <= 0 || std::chrono::steady_clock::now() < until)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  pipeline.stop();
  print_stats(pipeline.stats_report());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Around-view monitoring for excavators"};
  app.require_subcommand(1);
  Inputs in;
  auto add_inputs = [&](CLI::App* sub, bool scene, bool profile) {
    sub->add_option("--config", in.config, "rig config (JSON); defaults to the built-in reference rig");
    if (scene) sub->add_option("--scene", in.scene, "scene file (JSON); defaults to the built-in scene");
    if (profile) sub->add_option("--profile", in.profile, "motion profile (JSON); defaults to the built-in cycle");
    if (scene) sub->add_option("--supersample", in.supersample, "rays per pixel side")->check(CLI::Range(1, 8));
  };

  auto* plan = app.add_subcommand("plan", "check the lens against each camera's display range");
  add_inputs(plan, false, false);
  std::string report;
  bool as_json = false;
  plan->add_option("--report", report, "also write the report as JSON");
  plan->add_flag("--json", as_json, "print JSON instead of the table");

  auto* render = app.add_subcommand("render", "render the camera views and the top view as PNG");
  add_inputs(render, true, false);
  std::string out_dir = "avm-out";
  avm::calibration::RigAttitude attitude;
  bool uncalibrated = false;
  std::vector<double> joints;
  render->add_option("--out", out_dir, "output directory");
  render->add_option("--roll", attitude.roll_deg, "rig roll, deg");
  render->add_option("--pitch", attitude.pitch_deg, "rig pitch, deg");
  render->add_option("--yaw", attitude.yaw_deg, "rig yaw, deg");
  render->add_flag("--uncalibrated", uncalibrated, "stitch with flat-ground maps");
  render->add_option("--joints", joints, "boom arm bucket angles, deg; draws the overlay")->expected(3);

  auto* simulate = app.add_subcommand("simulate", "run the pipeline over a motion profile");
  add_inputs(simulate, true, true);
  bool virtual_mode = false;
  double duration_s = 0.0;
  std::string frames_dir;
  simulate->add_flag("--virtual", virtual_mode, "simulated time, as fast as possible");
  simulate->add_option("--report", report, "write pipeline stats as JSON");
  simulate->add_option("--out", frames_dir, "write every published frame as PNG");
  simulate->add_option("--duration", duration_s, "realtime run length, s (default: profile duration)");

  auto* serve = app.add_subcommand("serve", "run the pipeline and serve clients over WebSocket");
  add_inputs(serve, true, true);
  std::string address = "127.0.0.1";
  unsigned short port = 8765;
  bool loop = true;
  serve->add_option("--address", address, "listen address");
  serve->add_option("--port", port, "listen port");
  serve->add_option("--duration", duration_s, "stop after this many seconds (0 runs until interrupted)");
  serve->add_option("--loop", loop, "restart the profile when it ends");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*plan) return cmd_plan(in, report, as_json);
    if (*render) {
      std::optional<avm::kinematics::JointState> js;
      if (!joints.empty()) js = avm::kinematics::JointState{joints[0], joints[1], joints[2], 0};
      return cmd_render(in, out_dir, attitude, !uncalibrated, js);
    }
    if (*simulate) return cmd_simulate(in, virtual_mode, report, frames_dir, duration_s);
    if (*serve) return cmd_serve(in, address, port, duration_s, loop);
  } catch (const avm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

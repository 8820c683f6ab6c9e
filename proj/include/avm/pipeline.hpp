#pragma once

// Real-time render -> stitch -> overlay pipeline. Telemetry, rendering and map
// rebuilds run on their own threads and hand over immutable snapshots; one
// composer publishes frames with latest-value semantics.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "avm/calibration.hpp"
#include "avm/config.hpp"
#include "avm/kinematics.hpp"
#include "avm/scene.hpp"
#include "avm/telemetry.hpp"

namespace avm::service {

class UnknownCommandError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Realtime, Virtual };

/// Top view, or one camera's raw frame at full scale.
struct ActiveView {
  int camera = -1;

  bool is_topview() const { return camera < 0; }
  std::string name() const;
  /// "topview" or "camera-N"; throws ValidationError otherwise.
  static ActiveView parse(std::string_view name, int camera_count);

  friend bool operator==(const ActiveView&, const ActiveView&) = default;
};

struct ViewState {
  ActiveView view;
  bool overlay = true;
  bool calibration = true;
  bool manual_joints = false;    // set_joints detaches joints from the profile
  bool manual_attitude = false;  // set_attitude likewise
  kinematics::JointState joints;
  calibration::RigAttitude attitude;
  kinematics::PoseSolution pose;
  std::uint64_t commands_applied = 0;
};

struct CadenceStats {
  std::size_t samples = 0;  // intervals
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  double stddev_ms = 0.0;
};

struct PipelineStats {
  std::optional<double> fps;   // last 1 s window; in virtual mode the achievable rate
  bool fps_unpaced = false;    // virtual mode
  double mean_fps = 0.0;       // frames / elapsed
  std::optional<double> min_window_fps;  // worst complete 1 s bucket
  double latency_mean_ms = 0.0;  // compose start to publish
  double latency_max_ms = 0.0;
  std::optional<CadenceStats> joints_cadence;    // working information
  std::optional<CadenceStats> attitude_cadence;  // surface condition
  std::uint64_t frames_published = 0;
  std::uint64_t dropped_frames = 0;
  double elapsed_s = 0.0;
};

/// Cadence statistics are withheld until this many intervals were observed.
inline constexpr std::size_t kMinCadenceSamples = 10;

struct PublishedFrame {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;   // pipeline clock
  std::int64_t telemetry_ms = 0;   // newest telemetry the frame reflects
  ActiveView view;
  std::shared_ptr<const Image> image;
  ViewState state;
};

struct Command {
  std::string name;
  nlohmann::json args = nlohmann::json::object();
};

struct PipelineOptions {
  Mode mode = Mode::Realtime;
  double target_fps = 30.0;
  scene::RenderOptions render;
  bool loop_profile = false;  // restart telemetry when the profile ends
};

class Pipeline {
 public:
  /// Renders the initial frames and builds the flat-ground maps; throws
  /// StartupError when either fails.
  Pipeline(RigConfig rig, scene::Scene scene, scene::MotionProfile profile, PipelineOptions options = {});
  ~Pipeline();

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  // Realtime mode.
  void start();
  void stop();
  bool running() const;
  PipelineStats run_realtime(std::chrono::milliseconds duration);

  /// Virtual mode: steps the whole profile in simulated time as fast as possible.
  PipelineStats run_virtual();

  /// Applies one command atomically. Throws ValidationError for rejected
  /// arguments (state unchanged) and UnknownCommandError for unknown names.
  ViewState handle_command(const Command& cmd);

  /// Composes the active view now, outside the frame cadence.
  std::shared_ptr<const PublishedFrame> snapshot() const;

  std::shared_ptr<const PublishedFrame> latest_frame() const;
  PipelineStats stats_report() const;
  ViewState view_state() const;
  /// Pipeline clock in ms: wall time since start, or simulated time during a virtual run.
  std::int64_t clock_ms() const { return now_ms(); }
  const RigConfig& rig() const { return rig_; }
  int camera_count() const { return static_cast<int>(cameras_.size()); }

  using FrameListener = std::function<void(const std::shared_ptr<const PublishedFrame>&)>;
  /// Called on the composer thread after each publish; keep it short.
  void set_frame_listener(FrameListener listener);

 private:
  struct RenderedViews {
    calibration::RigAttitude attitude;
    std::vector<Image> frames;
    std::shared_ptr<const projection::LookupMaps> calibrated;
  };

  using Clock = std::chrono::steady_clock;

  std::shared_ptr<const RenderedViews> render_views(const calibration::RigAttitude& attitude) const;
  std::shared_ptr<const PublishedFrame> compose(const ViewState& state, std::shared_ptr<const RenderedViews> views,
                                                std::uint64_t seq, std::int64_t now_ms) const;
  void publish(std::shared_ptr<const PublishedFrame> frame, double latency_ms, double wall_s);
  void ingest(const scene::TelemetryRecord& rec, bool joints, double arrival_ms);
  void recompute_pose_locked();
  std::int64_t now_ms() const;

  void joint_pump(std::stop_token st);
  void attitude_pump(std::stop_token st);
  void pump(std::stop_token st, bool joints);
  void render_worker(std::stop_token st);
  void composer(std::stop_token st);

  RigConfig rig_;
  scene::Scene scene_;
  PipelineOptions options_;
  std::vector<projection::CameraModel> cameras_;
  std::unique_ptr<calibration::Recalibrator> recal_;

  mutable std::mutex state_mutex_;
  ViewState state_;
  scene::MotionProfile profile_;
  std::uint64_t profile_epoch_ = 0;  // bumped by set_profile
  std::int64_t profile_origin_ms_ = 0;

  mutable std::mutex views_mutex_;
  std::shared_ptr<const RenderedViews> views_;
  std::condition_variable_any render_cv_;
  bool attitude_dirty_ = false;

  mutable std::mutex frame_mutex_;
  std::shared_ptr<const PublishedFrame> latest_;
  FrameListener listener_;

  mutable std::mutex stats_mutex_;
  Clock::time_point started_{};
  std::deque<double> window_;             // publish times, s since start
  std::vector<std::uint64_t> buckets_;    // frames per whole second
  double latency_sum_ms_ = 0.0;
  double latency_max_ms_ = 0.0;
  std::uint64_t frames_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<double> joint_arrivals_ms_;
  std::vector<double> attitude_arrivals_ms_;
  double elapsed_s_ = 0.0;
  bool virtual_run_ = false;
  double virtual_frame_path_s_ = 0.0;

  std::condition_variable_any pump_cv_;
  std::atomic<std::int64_t> virtual_now_ms_{0};
  std::atomic<bool> virtual_clock_{false};
  std::uint64_t seq_ = 0;
  std::vector<std::jthread> threads_;
  bool running_ = false;
};

}  // namespace avm::service

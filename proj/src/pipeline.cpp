#include "avm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef __linux__
#include <sys/resource.h>
#include <sys/syscall.h>
#include <unistd.h>
#endif

#include "avm/draw.hpp"
#include "avm/errors.hpp"

namespace avm::service {

using calibration::RigAttitude;
using nlohmann::json;

std::string ActiveView::name() const { return is_topview() ? "topview" : "camera-" + std::to_string(camera); }

ActiveView ActiveView::parse(std::string_view name, int camera_count) {
  if (name == "topview") return {};
  constexpr std::string_view kPrefix = "camera-";
  if (name.substr(0, kPrefix.size()) == kPrefix) {
    const std::string digits(name.substr(kPrefix.size()));
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        digits.size() < 4) {
      const int n = std::stoi(digits);
      if (n < camera_count) return {n};
    }
  }
  throw ValidationError("unknown view '" + std::string(name) + "'");
}

namespace {

std::optional<CadenceStats> cadence(const std::vector<double>& arrivals) {
  if (arrivals.size() < kMinCadenceSamples + 1) return std::nullopt;
  std::vector<double> gaps(arrivals.size() - 1);
  for (std::size_t i = 1; i < arrivals.size(); ++i) gaps[i - 1] = arrivals[i] - arrivals[i - 1];
  CadenceStats s;
  s.samples = gaps.size();
  s.mean_ms = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
  const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
  s.min_ms = *lo;
  s.max_ms = *hi;
  double var = 0.0;
  for (double g : gaps) var += (g - s.mean_ms) * (g - s.mean_ms);
  s.stddev_ms = std::sqrt(var / static_cast<double>(gaps.size()));
  return s;
}

void lower_thread_priority() {
#ifdef __linux__
  setpriority(PRIO_PROCESS, static_cast<id_t>(syscall(SYS_gettid)), 10);
#endif
}

template <class T>
T arg_or(const json& args, const char* key, T fallback) {
  if (!args.contains(key)) return fallback;
  try {
    return args.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("argument '") + key + "' has the wrong type");
  }
}

}  // namespace

Pipeline::Pipeline(RigConfig rig, scene::Scene scene, scene::MotionProfile profile, PipelineOptions options)
    : rig_(std::move(rig)), scene_(std::move(scene)), options_(options), profile_(std::move(profile)) {
  cameras_ = rig_.camera_models();
  scene::validate(scene_, &rig_.mosaic);
  scene::validate(profile_, rig_.limits);
  kinematics::validate(rig_.links);
  if (!(options_.target_fps > 0)) throw ConfigError("target fps must be > 0");
  try {
    recal_ = std::make_unique<calibration::Recalibrator>(cameras_, rig_.body, rig_.mosaic);
    const auto first = scene::sample_profile(profile_, 0);
    state_.joints = first.joints;
    state_.attitude = first.attitude;
    recompute_pose_locked();
    views_ = render_views(state_.attitude);
  } catch (const std::exception& e) {
    throw StartupError(std::string("pipeline startup failed: ") + e.what());
  }
  started_ = Clock::now();
}

Pipeline::~Pipeline() { stop(); }

void Pipeline::recompute_pose_locked() {
  state_.pose = kinematics::forward_kinematics(rig_.links, state_.joints, rig_.limits);
}

std::shared_ptr<const Pipeline::RenderedViews> Pipeline::render_views(const RigAttitude& attitude) const {
  auto views = std::make_shared<RenderedViews>();
  views->attitude = attitude;
  views->frames = scene::render_rig(scene_, cameras_, attitude, options_.render);
  views->calibrated = recal_->update(attitude);
  return views;
}

std::shared_ptr<const PublishedFrame> Pipeline::compose(const ViewState& state,
                                                        std::shared_ptr<const RenderedViews> views,
                                                        std::uint64_t seq, std::int64_t now) const {
  auto frame = std::make_shared<PublishedFrame>();
  frame->seq = seq;
  frame->timestamp_ms = now;
  frame->telemetry_ms = std::max(state.joints.timestamp_ms, state.attitude.timestamp_ms);
  frame->view = state.view;
  frame->state = state;
  if (!state.view.is_topview()) {
    const Image* raw = &views->frames.at(static_cast<std::size_t>(state.view.camera));
    frame->image = std::shared_ptr<const Image>(views, raw);  // keeps the snapshot alive
    return frame;
  }
  const auto& maps = state.calibration ? *views->calibrated : *recal_->flat();
  Image mosaic = projection::compose_topview(views->frames, maps);
  if (state.overlay) {
    const auto overlay = kinematics::overlay_payload(state.pose, rig_.links);
    draw::working_overlay(mosaic, overlay, state.pose, rig_.links,
                          state.calibration ? views->attitude : RigAttitude{}, rig_.mosaic);
  }
  frame->image = std::make_shared<const Image>(std::move(mosaic));
  return frame;
}

std::int64_t Pipeline::now_ms() const {
  if (virtual_clock_) return virtual_now_ms_;
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started_).count();
}

void Pipeline::publish(std::shared_ptr<const PublishedFrame> frame, double latency_ms, double wall_s) {
  FrameListener listener;
  {
    std::lock_guard lk(frame_mutex_);
    latest_ = frame;
    listener = listener_;
  }
  {
    std::lock_guard lk(stats_mutex_);
    ++frames_;
    latency_sum_ms_ += latency_ms;
    latency_max_ms_ = std::max(latency_max_ms_, latency_ms);
    window_.push_back(wall_s);
    while (!window_.empty() && window_.front() <= wall_s - 1.0) window_.pop_front();
    const auto bucket = static_cast<std::size_t>(std::max(0.0, std::floor(wall_s)));
    if (buckets_.size() <= bucket) buckets_.resize(bucket + 1, 0);
    ++buckets_[bucket];
  }
  if (listener) listener(frame);
}

void Pipeline::ingest(const scene::TelemetryRecord& rec, bool joints, double arrival_ms) {
  bool notify = false;
  {
    std::lock_guard lk(state_mutex_);
    if (joints && !state_.manual_joints) {
      state_.joints = rec.joints;
      state_.joints.timestamp_ms = rec.timestamp_ms + profile_origin_ms_;
      recompute_pose_locked();
    } else if (!joints && !state_.manual_attitude) {
      const auto previous = state_.attitude;
      state_.attitude = rec.attitude;
      state_.attitude.timestamp_ms = rec.timestamp_ms + profile_origin_ms_;
      if (calibration::max_angle_delta_deg(previous, state_.attitude) > 0.0) {
        attitude_dirty_ = true;
        notify = true;
      }
    }
  }
  if (notify) render_cv_.notify_all();
  std::lock_guard lk(stats_mutex_);
  (joints ? joint_arrivals_ms_ : attitude_arrivals_ms_).push_back(arrival_ms);
}

void Pipeline::joint_pump(std::stop_token st) { pump(std::move(st), true); }
void Pipeline::attitude_pump(std::stop_token st) { pump(std::move(st), false); }

void Pipeline::pump(std::stop_token st, bool joints) {
  std::unique_lock lk(state_mutex_);
  while (!st.stop_requested()) {
    const auto epoch = profile_epoch_;
    const auto records = scene::telemetry_stream(profile_);
    // One loop lasts exactly records * cadence so looping keeps the cadence.
    const auto loop_ms = static_cast<std::int64_t>(records.size()) * profile_.cadence_ms;
    std::int64_t origin = profile_origin_ms_;
    const auto changed = [&] { return profile_epoch_ != epoch; };
    bool restarted = false;
    do {
      for (const auto& rec : records) {
        const auto deadline = started_ + std::chrono::milliseconds(origin + rec.timestamp_ms);
        if (pump_cv_.wait_until(lk, st, deadline, changed) || st.stop_requested()) {
          restarted = true;
          break;
        }
        const double arrival =
            std::chrono::duration<double, std::milli>(Clock::now() - started_).count();
        auto shifted = rec;
        shifted.timestamp_ms += origin - profile_origin_ms_;
        lk.unlock();
        ingest(shifted, joints, arrival);
        lk.lock();
        if (changed()) {
          restarted = true;
          break;
        }
      }
      origin += loop_ms;
    } while (!restarted && options_.loop_profile && !st.stop_requested());
    if (!restarted) pump_cv_.wait(lk, st, changed);
  }
}

void Pipeline::render_worker(std::stop_token st) {
  lower_thread_priority();
  while (true) {
    RigAttitude target;
    {
      std::unique_lock lk(state_mutex_);
      render_cv_.wait(lk, st, [&] { return attitude_dirty_; });
      if (st.stop_requested()) return;
      attitude_dirty_ = false;
      target = state_.attitude;
    }
    std::shared_ptr<const RenderedViews> current;
    {
      std::lock_guard lk(views_mutex_);
      current = views_;
    }
    if (calibration::max_angle_delta_deg(target, current->attitude) < calibration::kDebounceDeg) continue;
    auto next = render_views(target);
    std::lock_guard lk(views_mutex_);
    views_ = std::move(next);
  }
}

void Pipeline::composer(std::stop_token st) {
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / options_.target_fps));
  auto next = Clock::now();
  while (!st.stop_requested()) {
    const auto t0 = Clock::now();
    ViewState state;
    {
      std::lock_guard lk(state_mutex_);
      state = state_;
    }
    std::shared_ptr<const RenderedViews> views;
    {
      std::lock_guard lk(views_mutex_);
      views = views_;
    }
    auto frame = compose(state, views, ++seq_, now_ms());
    const auto t1 = Clock::now();
    publish(std::move(frame), std::chrono::duration<double, std::milli>(t1 - t0).count(),
            std::chrono::duration<double>(t1 - started_).count());

    next += period;
    const auto now = Clock::now();
    if (now > next + period) {
      const auto missed = static_cast<std::uint64_t>((now - next) / period);
      {
        std::lock_guard lk(stats_mutex_);
        dropped_ += missed;
      }
      next = now;
    }
    std::mutex m;
    std::unique_lock lk(m);
    std::condition_variable_any cv;
    cv.wait_until(lk, st, next, [] { return false; });
  }
}

void Pipeline::start() {
  std::lock_guard guard(stats_mutex_);
  if (running_) return;
  if (virtual_clock_) throw std::logic_error("pipeline is in a virtual run");
  {
    std::lock_guard lk(state_mutex_);
    started_ = Clock::now();
    profile_origin_ms_ = 0;
  }
  window_.clear();
  buckets_.clear();
  latency_sum_ms_ = latency_max_ms_ = 0.0;
  frames_ = dropped_ = 0;
  joint_arrivals_ms_.clear();
  attitude_arrivals_ms_.clear();
  elapsed_s_ = 0.0;
  virtual_run_ = false;
  running_ = true;
  threads_.emplace_back([this](std::stop_token st) { joint_pump(st); });
  threads_.emplace_back([this](std::stop_token st) { attitude_pump(st); });
  threads_.emplace_back([this](std::stop_token st) { render_worker(st); });
  threads_.emplace_back([this](std::stop_token st) { composer(st); });
}

void Pipeline::stop() {
  {
    std::lock_guard lk(stats_mutex_);
    if (!running_) return;
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - started_).count();
  for (auto& t : threads_) t.request_stop();
  render_cv_.notify_all();
  pump_cv_.notify_all();
  threads_.clear();  // joins; an in-flight render may take a moment
  std::lock_guard lk(stats_mutex_);
  elapsed_s_ = elapsed;
  running_ = false;
}

bool Pipeline::running() const {
  std::lock_guard lk(stats_mutex_);
  return running_;
}

PipelineStats Pipeline::run_realtime(std::chrono::milliseconds duration) {
  start();
  std::this_thread::sleep_for(duration);
  stop();
  return stats_report();
}

PipelineStats Pipeline::run_virtual() {
  {
    std::lock_guard lk(stats_mutex_);
    if (running_) throw std::logic_error("pipeline is running in realtime mode");
    window_.clear();
    buckets_.clear();
    latency_sum_ms_ = latency_max_ms_ = 0.0;
    frames_ = dropped_ = 0;
    joint_arrivals_ms_.clear();
    attitude_arrivals_ms_.clear();
    virtual_run_ = true;
    virtual_frame_path_s_ = 0.0;
  }
  virtual_now_ms_ = 0;
  virtual_clock_ = true;
  const double frame_period_ms = 1000.0 / options_.target_fps;
  const auto wall_start = Clock::now();

  std::vector<scene::TelemetryRecord> records;
  std::uint64_t epoch = 0;
  std::int64_t duration_ms = 0;
  std::size_t next_record = 0;
  {
    std::lock_guard lk(state_mutex_);
    profile_origin_ms_ = 0;
    epoch = profile_epoch_;
    records = scene::telemetry_stream(profile_);
    duration_ms = static_cast<std::int64_t>(std::llround(profile_.duration_s * 1000.0));
  }

  for (std::int64_t k = 0;; ++k) {
    const auto sim_ms = static_cast<std::int64_t>(std::floor(static_cast<double>(k) * frame_period_ms));
    if (sim_ms > duration_ms) break;
    virtual_now_ms_ = sim_ms;
    {
      std::lock_guard lk(state_mutex_);
      if (profile_epoch_ != epoch) {
        // set_profile during the run restarts telemetry at the current time
        epoch = profile_epoch_;
        records = scene::telemetry_stream(profile_);
        duration_ms = sim_ms + static_cast<std::int64_t>(std::llround(profile_.duration_s * 1000.0));
        next_record = 0;
      }
    }
    while (next_record < records.size() && records[next_record].timestamp_ms + profile_origin_ms_ <= sim_ms) {
      const auto& rec = records[next_record++];
      const double at = static_cast<double>(rec.timestamp_ms + profile_origin_ms_);
      ingest(rec, true, at);
      ingest(rec, false, at);
    }
    ViewState state;
    bool dirty = false;
    {
      std::lock_guard lk(state_mutex_);
      state = state_;
      dirty = std::exchange(attitude_dirty_, false);
    }
    if (dirty) {
      std::shared_ptr<const RenderedViews> current;
      {
        std::lock_guard lk(views_mutex_);
        current = views_;
      }
      if (calibration::max_angle_delta_deg(state.attitude, current->attitude) >= calibration::kDebounceDeg) {
        auto fresh = render_views(state.attitude);
        std::lock_guard lk(views_mutex_);
        views_ = std::move(fresh);
      }
    }
    std::shared_ptr<const RenderedViews> views;
    {
      std::lock_guard lk(views_mutex_);
      views = views_;
    }
    const auto t0 = Clock::now();
    auto frame = compose(state, views, ++seq_, sim_ms);
    const auto t1 = Clock::now();
    const double path_s = std::chrono::duration<double>(t1 - t0).count();
    {
      std::lock_guard lk(stats_mutex_);
      virtual_frame_path_s_ += path_s;
    }
    publish(std::move(frame), path_s * 1000.0, static_cast<double>(sim_ms) / 1000.0);
  }

  {
    std::lock_guard lk(stats_mutex_);
    elapsed_s_ = std::chrono::duration<double>(Clock::now() - wall_start).count();
  }
  virtual_clock_ = false;
  return stats_report();
}

PipelineStats Pipeline::stats_report() const {
  std::lock_guard lk(stats_mutex_);
  PipelineStats s;
  s.frames_published = frames_;
  s.dropped_frames = dropped_;
  s.joints_cadence = cadence(joint_arrivals_ms_);
  s.attitude_cadence = cadence(attitude_arrivals_ms_);
  if (frames_ > 0) s.latency_mean_ms = latency_sum_ms_ / static_cast<double>(frames_);
  s.latency_max_ms = latency_max_ms_;
  if (virtual_run_) {
    s.elapsed_s = elapsed_s_;
    s.fps_unpaced = true;
    if (virtual_frame_path_s_ > 0.0) {
      s.fps = static_cast<double>(frames_) / virtual_frame_path_s_;
      s.mean_fps = *s.fps;
    }
    return s;
  }
  const double elapsed =
      running_ ? std::chrono::duration<double>(Clock::now() - started_).count() : elapsed_s_;
  s.elapsed_s = elapsed;
  if (elapsed > 0.0) s.mean_fps = static_cast<double>(frames_) / elapsed;
  if (elapsed >= 1.0) {
    s.fps = static_cast<double>(
        std::count_if(window_.begin(), window_.end(), [&](double t) { return t > elapsed - 1.0; }));
  } else if (elapsed > 0.0 && frames_ > 0) {
    s.fps = s.mean_fps;
  }
  const auto complete = static_cast<std::size_t>(std::floor(elapsed));
  for (std::size_t i = 0; i < complete; ++i) {
    const double n = i < buckets_.size() ? static_cast<double>(buckets_[i]) : 0.0;
    s.min_window_fps = s.min_window_fps ? std::min(*s.min_window_fps, n) : n;
  }
  return s;
}

ViewState Pipeline::handle_command(const Command& cmd) {
  const json& args = cmd.args.is_null() ? json::object() : cmd.args;
  if (!args.is_object()) throw ValidationError("command arguments must be an object");
  std::unique_lock lk(state_mutex_);
  ViewState next = state_;
  bool attitude_changed = false;
  bool profile_changed = false;
  std::optional<scene::MotionProfile> profile;

  if (cmd.name == "set_joints") {
    kinematics::JointState j = next.joints;
    j.boom_deg = arg_or(args, "theta_bm_deg", j.boom_deg);
    j.arm_deg = arg_or(args, "theta_arm_deg", j.arm_deg);
    j.bucket_deg = arg_or(args, "theta_bkt_deg", j.bucket_deg);
    j.timestamp_ms = now_ms();
    try {
      next.pose = kinematics::forward_kinematics(rig_.links, j, rig_.limits);
    } catch (const RangeError& e) {
      throw ValidationError(e.what());
    }
    next.joints = j;
    next.manual_joints = true;
  } else if (cmd.name == "set_attitude") {
    RigAttitude a = next.attitude;
    a.roll_deg = arg_or(args, "roll_deg", a.roll_deg);
    a.pitch_deg = arg_or(args, "pitch_deg", a.pitch_deg);
    a.yaw_deg = arg_or(args, "yaw_deg", a.yaw_deg);
    a.timestamp_ms = now_ms();
    try {
      calibration::check_envelope(a);
    } catch (const RangeError& e) {
      throw ValidationError(e.what());
    }
    a.yaw_deg = calibration::normalize_yaw(a.yaw_deg);
    next.attitude = a;
    next.manual_attitude = true;
    attitude_changed = true;
  } else if (cmd.name == "select_view") {
    if (!args.contains("view") || !args.at("view").is_string()) throw ValidationError("select_view needs 'view'");
    next.view = ActiveView::parse(args.at("view").get<std::string>(), camera_count());
  } else if (cmd.name == "toggle_overlay") {
    next.overlay = arg_or(args, "enabled", !next.overlay);
  } else if (cmd.name == "toggle_calibration") {
    next.calibration = arg_or(args, "enabled", !next.calibration);
  } else if (cmd.name == "set_profile") {
    const json& body = args.contains("profile") ? args.at("profile") : args;
    try {
      profile = profile_from_json(body);
      scene::validate(*profile, rig_.limits);
    } catch (const ConfigError& e) {
      throw ValidationError(e.what());
    } catch (const RangeError& e) {
      throw ValidationError(e.what());
    } catch (const json::exception& e) {
      throw ValidationError(e.what());
    }
    next.manual_joints = false;
    next.manual_attitude = false;
    profile_changed = true;
  } else if (cmd.name == "snapshot") {
    // read-only; still acknowledged and counted
  } else {
    throw UnknownCommandError("unknown command '" + cmd.name + "'");
  }

  ++next.commands_applied;
  state_ = next;
  if (attitude_changed) attitude_dirty_ = true;
  if (profile_changed) {
    profile_ = std::move(*profile);
    ++profile_epoch_;
    profile_origin_ms_ = now_ms();
    const auto first = scene::sample_profile(profile_, 0);
    state_.joints = first.joints;
    state_.joints.timestamp_ms = profile_origin_ms_;
    state_.attitude = first.attitude;
    state_.attitude.timestamp_ms = profile_origin_ms_;
    recompute_pose_locked();
    attitude_dirty_ = true;
  }
  const ViewState result = state_;
  lk.unlock();
  if (profile_changed) {
    // An interval spanning the restart is not a stream period.
    std::lock_guard slk(stats_mutex_);
    joint_arrivals_ms_.clear();
    attitude_arrivals_ms_.clear();
  }
  if (attitude_changed || profile_changed) render_cv_.notify_all();
  if (profile_changed) pump_cv_.notify_all();
  return result;
}

std::shared_ptr<const PublishedFrame> Pipeline::snapshot() const {
  ViewState state;
  {
    std::lock_guard lk(state_mutex_);
    state = state_;
  }
  std::shared_ptr<const RenderedViews> views;
  {
    std::lock_guard lk(views_mutex_);
    views = views_;
  }
  std::uint64_t seq = 0;
  {
    std::lock_guard lk(frame_mutex_);
    if (latest_) seq = latest_->seq;
  }
  return compose(state, views, seq, now_ms());
}

std::shared_ptr<const PublishedFrame> Pipeline::latest_frame() const {
  std::lock_guard lk(frame_mutex_);
  return latest_;
}

ViewState Pipeline::view_state() const {
  std::lock_guard lk(state_mutex_);
  return state_;
}

void Pipeline::set_frame_listener(FrameListener listener) {
  std::lock_guard lk(frame_mutex_);
  listener_ = std::move(listener);
}

}  // namespace avm::service

#include "avm/telemetry.hpp"

#include <algorithm>
#include <cmath>

#include "avm/errors.hpp"

namespace avm::scene {

Timeline::Timeline(std::vector<Keyframe> keys) : keys_(std::move(keys)) {
  std::sort(keys_.begin(), keys_.end(), [](const Keyframe& a, const Keyframe& b) { return a.t_s < b.t_s; });
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    if (keys_[i].t_s == keys_[i - 1].t_s) throw ConfigError("timeline has two keys at the same time");
  }
}

double Timeline::sample(double t_s) const {
  if (keys_.empty()) return 0.0;
  if (t_s <= keys_.front().t_s) return keys_.front().value;
  if (t_s >= keys_.back().t_s) return keys_.back().value;
  const auto hi = std::upper_bound(keys_.begin(), keys_.end(), t_s,
                                   [](double t, const Keyframe& k) { return t < k.t_s; });
  const auto lo = hi - 1;
  const double u = (t_s - lo->t_s) / (hi->t_s - lo->t_s);
  return lo->value + u * (hi->value - lo->value);
}

MotionProfile default_profile() {
  MotionProfile p;
  p.boom = Timeline({{0, 20}, {3, 45}, {6, 10}, {10, 20}});
  p.arm = Timeline({{0, -90}, {3, -45}, {6, -110}, {10, -90}});
  p.bucket = Timeline({{0, 0}, {3, 40}, {6, -30}, {10, 0}});
  p.roll = Timeline({{0, 0}, {4, 3}, {8, 3}, {10, 0}});
  p.pitch = Timeline({{0, 0}, {5, -2}, {10, 0}});
  p.yaw = Timeline({{0, 0}, {10, 15}});
  return p;
}

void validate(const MotionProfile& profile, const kinematics::JointLimits& limits) {
  if (profile.cadence_ms <= 0) throw ConfigError("profile cadence must be > 0");
  if (!(profile.duration_s >= 0)) throw ConfigError("profile duration must be >= 0");
  // Linear interpolation never leaves the hull of the keys, so checking keys suffices.
  auto check = [](const Timeline& tl, double lo, double hi, const char* name) {
    for (const auto& k : tl.keys()) {
      if (!(k.value >= lo && k.value <= hi))
        throw ConfigError(std::string("profile ") + name + " key outside its envelope");
    }
  };
  check(profile.boom, limits.boom.min_deg, limits.boom.max_deg, "boom");
  check(profile.arm, limits.arm.min_deg, limits.arm.max_deg, "arm");
  check(profile.bucket, limits.bucket.min_deg, limits.bucket.max_deg, "bucket");
  check(profile.roll, -calibration::kTiltEnvelopeDeg, calibration::kTiltEnvelopeDeg, "roll");
  check(profile.pitch, -calibration::kTiltEnvelopeDeg, calibration::kTiltEnvelopeDeg, "pitch");
  for (const auto& k : profile.yaw.keys()) {
    if (!std::isfinite(k.value)) throw ConfigError("profile yaw key must be finite");
  }
}

TelemetryRecord sample_profile(const MotionProfile& profile, std::int64_t timestamp_ms) {
  const double t = static_cast<double>(timestamp_ms) / 1000.0;
  TelemetryRecord rec;
  rec.timestamp_ms = timestamp_ms;
  rec.joints = {profile.boom.sample(t), profile.arm.sample(t), profile.bucket.sample(t), timestamp_ms};
  rec.attitude = {profile.roll.sample(t), profile.pitch.sample(t), calibration::normalize_yaw(profile.yaw.sample(t)),
                  timestamp_ms};
  return rec;
}

std::vector<TelemetryRecord> telemetry_stream(const MotionProfile& profile) {
  std::vector<TelemetryRecord> records;
  const auto duration_ms = static_cast<std::int64_t>(std::llround(profile.duration_s * 1000.0));
  for (std::int64_t t = 0; t <= duration_ms; t += profile.cadence_ms) records.push_back(sample_profile(profile, t));
  return records;
}

}  // namespace avm::scene

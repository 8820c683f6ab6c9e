#pragma once

// Simulated sensor streams: joint angles (working information) and rig
// attitude (surface condition) sampled from piecewise-linear timelines.

#include <cstdint>
#include <vector>

#include "avm/attitude.hpp"
#include "avm/kinematics.hpp"

namespace avm::scene {

struct Keyframe {
  double t_s = 0.0;
  double value = 0.0;
};

/// Piecewise-linear in time, held constant before the first and after the last key.
class Timeline {
 public:
  Timeline() = default;
  Timeline(std::vector<Keyframe> keys);  // sorts by time; throws ConfigError on duplicate times

  double sample(double t_s) const;
  const std::vector<Keyframe>& keys() const { return keys_; }
  static Timeline constant(double value) { return Timeline({{0.0, value}}); }

 private:
  std::vector<Keyframe> keys_;
};

inline constexpr int kDefaultCadenceMs = 300;

struct MotionProfile {
  double duration_s = 10.0;
  int cadence_ms = kDefaultCadenceMs;
  Timeline boom, arm, bucket;
  Timeline roll, pitch, yaw;
};

/// Throws ConfigError when the cadence is not positive, the duration is
/// negative, or any key leaves the joint limits / attitude envelope.
void validate(const MotionProfile& profile, const kinematics::JointLimits& limits = {});

/// 10 s dig-and-swing cycle at the default cadence, rolling to 3 deg and back.
MotionProfile default_profile();

struct TelemetryRecord {
  std::int64_t timestamp_ms = 0;
  kinematics::JointState joints;
  calibration::RigAttitude attitude;
};

TelemetryRecord sample_profile(const MotionProfile& profile, std::int64_t timestamp_ms);

/// Records at t = 0, cadence, 2 * cadence, ... up to and including the duration.
std::vector<TelemetryRecord> telemetry_stream(const MotionProfile& profile);

}  // namespace avm::scene

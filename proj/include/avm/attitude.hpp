#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace avm::calibration {

/// Body attitude of the rig relative to gravity. Roll turns about the
/// longitudinal (forward) axis, positive lowering the right side; pitch turns
/// about the lateral axis, positive raising the front; yaw turns about the
/// vertical, counter-clockwise seen from above.
struct RigAttitude {
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const RigAttitude&, const RigAttitude&) = default;
};

/// Operational envelope for |roll| and |pitch|.
inline constexpr double kTiltEnvelopeDeg = 30.0;

/// Throws RangeError when roll or pitch leaves the envelope or a value is not finite.
void check_envelope(const RigAttitude& att);

/// Wraps into [0, 360).
double normalize_yaw(double yaw_deg);

/// Rig frame -> world frame, intrinsic yaw, then pitch, then roll:
/// R = Rz(yaw) * Rx(pitch) * Ry(roll).
Eigen::Matrix3d attitude_rotation(const RigAttitude& att);

/// Largest per-angle difference in degrees (yaw compared on the circle).
double max_angle_delta_deg(const RigAttitude& a, const RigAttitude& b);

}  // namespace avm::calibration

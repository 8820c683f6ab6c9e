#include "avm/attitude.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "avm/errors.hpp"
#include "avm/units.hpp"

namespace avm::calibration {

void check_envelope(const RigAttitude& att) {
  if (!std::isfinite(att.roll_deg) || !std::isfinite(att.pitch_deg) || !std::isfinite(att.yaw_deg))
    throw RangeError("attitude angles must be finite");
  if (std::abs(att.roll_deg) > kTiltEnvelopeDeg || std::abs(att.pitch_deg) > kTiltEnvelopeDeg)
    throw RangeError(fmt::format("attitude roll {:.2f} / pitch {:.2f} deg outside +/-{} deg envelope", att.roll_deg,
                                 att.pitch_deg, kTiltEnvelopeDeg));
}

double normalize_yaw(double yaw_deg) {
  double y = std::fmod(yaw_deg, 360.0);
  if (y < 0.0) y += 360.0;
  return y >= 360.0 ? 0.0 : y;
}

Eigen::Matrix3d attitude_rotation(const RigAttitude& att) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(deg2rad(att.yaw_deg), Vector3d::UnitZ()) *
          AngleAxisd(deg2rad(att.pitch_deg), Vector3d::UnitX()) *
          AngleAxisd(deg2rad(att.roll_deg), Vector3d::UnitY()))
      .toRotationMatrix();
}

double max_angle_delta_deg(const RigAttitude& a, const RigAttitude& b) {
  double yaw = std::abs(normalize_yaw(a.yaw_deg) - normalize_yaw(b.yaw_deg));
  yaw = std::min(yaw, 360.0 - yaw);
  return std::max({std::abs(a.roll_deg - b.roll_deg), std::abs(a.pitch_deg - b.pitch_deg), yaw});
}

}  // namespace avm::calibration

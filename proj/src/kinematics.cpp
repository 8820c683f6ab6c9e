#include "avm/kinematics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "avm/errors.hpp"
#include "avm/units.hpp"

namespace avm::kinematics {

void validate(const LinkGeometry& links) {
  if (!(links.boom_length_m > 0 && links.arm_length_m > 0 && links.bucket_length_m > 0))
    throw ConfigError("link lengths must be > 0");
  if (!(links.pivot_height_m >= 0)) throw ConfigError("boom pivot height must be >= 0");
}

void check_limits(const JointState& joints, const JointLimits& limits) {
  auto check = [](const char* name, double value, const AngleRange& range) {
    if (!std::isfinite(value) || !range.contains(value))
      throw RangeError(fmt::format("{} angle {:.3f} deg outside [{}, {}]", name, value, range.min_deg, range.max_deg));
  };
  check("boom", joints.boom_deg, limits.boom);
  check("arm", joints.arm_deg, limits.arm);
  check("bucket", joints.bucket_deg, limits.bucket);
}

PoseSolution forward_kinematics(const LinkGeometry& links, const JointState& joints, const JointLimits& limits) {
  check_limits(joints, limits);
  const double bm = deg2rad(joints.boom_deg);
  const double arm = deg2rad(joints.arm_deg);
  const double bkt = deg2rad(joints.bucket_deg);

  PoseSolution sol;
  sol.boom_tip = {links.boom_length_m * std::cos(bm), links.boom_length_m * std::sin(bm)};
  sol.arm_tip = {sol.boom_tip.x() + links.arm_length_m * std::cos(arm),
                 sol.boom_tip.y() + links.arm_length_m * std::sin(arm)};
  // The bucket angle is taken from the vertical, hence the swapped sin/cos.
  sol.bucket_tip = {sol.arm_tip.x() - links.bucket_length_m * std::sin(bkt),
                    sol.arm_tip.y() - links.bucket_length_m * std::cos(bkt)};
  sol.ground_distance_m = sol.bucket_tip.y() + links.pivot_height_m;
  sol.radius_m = links.slew_offset_m + sol.bucket_tip.x();
  return sol;
}

Eigen::Vector3d boom_plane_to_rig(const LinkGeometry& links, const Eigen::Vector2d& p) {
  return {0.0, links.slew_offset_m + p.x(), links.pivot_height_m + p.y()};
}

OverlayRecord overlay_payload(const PoseSolution& sol, const LinkGeometry& links) {
  const Eigen::Vector3d pivot = boom_plane_to_rig(links, Eigen::Vector2d::Zero());
  const Eigen::Vector3d a = boom_plane_to_rig(links, sol.boom_tip);
  const Eigen::Vector3d b = boom_plane_to_rig(links, sol.arm_tip);
  const Eigen::Vector3d c = boom_plane_to_rig(links, sol.bucket_tip);
  OverlayRecord rec;
  rec.segments = {Segment3{pivot, a}, Segment3{a, b}, Segment3{b, c}};
  rec.radius_m = sol.radius_m;
  rec.ground_distance_readout_m = std::round(sol.ground_distance_m * 100.0) / 100.0;
  rec.radius_readout_m = std::round(sol.radius_m * 100.0) / 100.0;
  return rec;
}

}  // namespace avm::kinematics

#pragma once

// Boom / arm / bucket forward kinematics in the boom's vertical plane.
// Plane coordinates: origin at the boom pivot, x horizontal away from the
// machine, y vertically up. Joint angles are signed and absolute (measured
// against gravity, not relative to the previous link).

#include <Eigen/Core>

#include <array>
#include <cstdint>

namespace avm::kinematics {

struct LinkGeometry {
  double boom_length_m = 0.0;
  double arm_length_m = 0.0;
  double bucket_length_m = 0.0;
  double pivot_height_m = 0.0;  // boom pivot above ground
  double slew_offset_m = 0.0;   // slew axis to boom pivot, horizontal
};

void validate(const LinkGeometry& links);

struct AngleRange {
  double min_deg = 0.0;
  double max_deg = 0.0;
  bool contains(double deg) const { return deg >= min_deg && deg <= max_deg; }
};

struct JointLimits {
  AngleRange boom{-20.0, 80.0};
  AngleRange arm{-160.0, 0.0};
  AngleRange bucket{-90.0, 90.0};
};

struct JointState {
  double boom_deg = 0.0;    // from horizontal, positive raises the boom tip
  double arm_deg = 0.0;     // from horizontal, negative below it
  double bucket_deg = 0.0;  // from vertical; 0 hangs the tip straight down
  std::int64_t timestamp_ms = 0;

  friend bool operator==(const JointState&, const JointState&) = default;
};

/// Throws RangeError naming the first joint outside its limits.
void check_limits(const JointState& joints, const JointLimits& limits);

struct PoseSolution {
  Eigen::Vector2d boom_tip = Eigen::Vector2d::Zero();    // A
  Eigen::Vector2d arm_tip = Eigen::Vector2d::Zero();     // B
  Eigen::Vector2d bucket_tip = Eigen::Vector2d::Zero();  // C
  double ground_distance_m = 0.0;  // bucket tip above grade; negative when below
  double radius_m = 0.0;           // bucket tip distance from the slew axis
};

PoseSolution forward_kinematics(const LinkGeometry& links, const JointState& joints,
                                const JointLimits& limits = {});

struct Segment3 {
  Eigen::Vector3d from = Eigen::Vector3d::Zero();
  Eigen::Vector3d to = Eigen::Vector3d::Zero();
};

/// Working-information overlay in the rig frame (x right, y forward, z up,
/// origin on the ground under the slew axis). The boom plane is the rig's
/// forward vertical plane.
struct OverlayRecord {
  std::array<Segment3, 3> segments;  // pivot->A (boom), A->B (arm), B->C (bucket)
  double radius_m = 0.0;             // circle about the slew axis
  double ground_distance_readout_m = 0.0;  // rounded to 0.01 m for display
  double radius_readout_m = 0.0;
};

/// Maps a boom-plane point to the rig frame.
Eigen::Vector3d boom_plane_to_rig(const LinkGeometry& links, const Eigen::Vector2d& p);

OverlayRecord overlay_payload(const PoseSolution& sol, const LinkGeometry& links);

}  // namespace avm::kinematics

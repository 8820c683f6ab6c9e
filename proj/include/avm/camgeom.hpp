#pragma once

// Camera and lens selection: how large a ground footprint a tilted camera has
// to image to cover its display range, and what field of view / K:f ratio that
// footprint demands.

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace avm::camgeom {

/// Ground rectangle the camera must contribute to the top view, in metres.
struct DisplayRange {
  double width_m = 0.0;
  double depth_m = 0.0;
};

/// Ground footprint the camera actually has to image, in metres.
struct ImageRange {
  double width_m = 0.0;
  double depth_m = 0.0;
};

/// Rig face a camera looks out from.
enum class Azimuth { Front, Right, Rear, Left };

std::string_view to_string(Azimuth azimuth);
Azimuth azimuth_from_string(std::string_view name);
/// Heading of the face in the rig frame (x right, y forward), degrees CCW from +x.
double azimuth_heading_deg(Azimuth azimuth);

struct CameraMount {
  std::string name;
  double height_m = 0.0;    // h
  double alpha_deg = 90.0;  // depression below horizontal, (0, 90]
  double beta_deg = 0.0;    // rotation about the optical axis, [0, 90)
  double distance_m = 0.0;  // camera to display-range reference plane
  Azimuth azimuth = Azimuth::Front;
  Eigen::Vector3d position_m = Eigen::Vector3d::Zero();  // rig frame; z == height_m
};

/// Throws ConfigError when a mount violates its invariants.
void validate(const CameraMount& mount);

struct LensSpec {
  double fov_deg = 0.0;                        // full diagonal field of view
  std::optional<double> sensor_size;           // K, sensor diagonal
  std::optional<double> focal_length;          // f, same unit as K
  int width_px = 0;
  int height_px = 0;

  /// K/f if both are set, otherwise 2 tan(fov/2).
  double k_over_f() const;
};

/// Throws ConfigError on an out-of-range FOV or a K, f pair that disagrees with the FOV.
void validate(const LensSpec& lens);

ImageRange image_range(const DisplayRange& display, const CameraMount& mount);

/// Full diagonal field of view in degrees needed to see `range` from `distance_m`.
double fov_from_image_range(const ImageRange& range, double distance_m);

/// Lower bound on K/f for the camera: 2 tan(A/2) with A from fov_from_image_range.
double min_k_over_f(const DisplayRange& display, const CameraMount& mount);

/// Strict: the lens ratio has to exceed the requirement.
bool lens_satisfies(const LensSpec& lens, double required_ratio);

struct PlannedCamera {
  CameraMount mount;
  DisplayRange display;
};

struct PlanningRow {
  std::string camera;
  ImageRange image;
  double required_fov_deg = 0.0;
  double min_k_over_f = 0.0;
  double lens_k_over_f = 0.0;
  bool pass = false;
};

struct PlanningReport {
  double lens_fov_deg = 0.0;
  std::vector<PlanningRow> rows;
};

PlanningReport planning_report(const std::vector<PlannedCamera>& cameras, const LensSpec& lens);

/// Aligned text table; ratios rounded to two decimals.
std::string to_text_table(const PlanningReport& report);

}  // namespace avm::camgeom

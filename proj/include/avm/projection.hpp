#pragma once

// Fisheye camera models on the rig, ground-plane projection, and the
// precomputed lookup maps that stitch four views into one top view.
//
// Frames: rig and world are right-handed with x to the right, y forward and
// z up; the rig origin sits on the ground under the slew axis. Camera frames
// follow the image convention: x along image columns, y down the rows, z out
// along the optical axis.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "avm/attitude.hpp"
#include "avm/camgeom.hpp"
#include "avm/image.hpp"

namespace avm::projection {

/// Equidistant fisheye, r = f * theta, with the image circle centred on the sensor.
struct CameraModel {
  camgeom::CameraMount mount;
  camgeom::LensSpec lens;
  double image_circle_radius_px = 0.0;  // radius at theta = fov / 2

  double half_fov_rad() const;
  double focal_px() const { return image_circle_radius_px / half_fov_rad(); }
  Eigen::Vector2d principal_point() const {
    return {(lens.width_px - 1) / 2.0, (lens.height_px - 1) / 2.0};
  }
};

/// Defaults the image circle to the inscribed circle of the sensor.
CameraModel make_camera_model(const camgeom::CameraMount& mount, const camgeom::LensSpec& lens,
                              std::optional<double> image_circle_radius_px = std::nullopt);

/// Columns are the camera's image-right, image-down and optical axes in the rig frame.
Eigen::Matrix3d mount_rotation(const camgeom::CameraMount& mount);

/// World -> camera rigid transform.
using Pose = Eigen::Isometry3d;

Pose camera_pose_matrix(const camgeom::CameraMount& mount, const calibration::RigAttitude& attitude);

Eigen::Vector3d camera_center(const Pose& pose);

/// Sub-pixel image position of a world point, or nullopt when it is behind the
/// camera or further than fov / 2 from the optical axis.
std::optional<Eigen::Vector2d> project_point(const CameraModel& model, const Pose& pose, const Eigen::Vector3d& p);

inline std::optional<Eigen::Vector2d> project_ground_point(const CameraModel& model, const Pose& pose,
                                                           const Eigen::Vector2d& ground) {
  return project_point(model, pose, {ground.x(), ground.y(), 0.0});
}

/// Unit viewing ray in the camera frame; nullopt outside the image circle.
std::optional<Eigen::Vector3d> pixel_ray(const CameraModel& model, const Eigen::Vector2d& pixel);

/// Ground point seen through `pixel`; nullopt when the ray never meets z = 0.
std::optional<Eigen::Vector2d> unproject_to_ground(const CameraModel& model, const Pose& pose,
                                                   const Eigen::Vector2d& pixel);

/// Square top-view raster centred on the rig.
struct MosaicSpec {
  double extent_m = 8.0;         // half-width
  double scale_px_per_m = 50.0;

  int side_px() const;
  Eigen::Vector2d origin_px() const;
  Eigen::Vector2d ground_to_pixel(const Eigen::Vector2d& ground) const;
  Eigen::Vector2d pixel_to_ground(const Eigen::Vector2d& pixel) const;

  friend bool operator==(const MosaicSpec&, const MosaicSpec&) = default;
};

void validate(const MosaicSpec& spec);

/// Machine body, centred on the rig origin; it hides the ground beneath it.
struct RigBody {
  double width_m = 2.5;   // along x
  double depth_m = 3.5;   // along y
  double height_m = 2.2;
};

/// Ground footprint of the body under `attitude` (world xy, counter-clockwise).
std::vector<Eigen::Vector2d> body_footprint(const RigBody& body, const calibration::RigAttitude& attitude);

enum class PixelClass : std::uint8_t { Blind = 0, Covered = 1, Footprint = 2 };

struct SampleTap {
  std::uint8_t camera = 0;
  float x = 0.0f;  // source pixel, sub-pixel
  float y = 0.0f;
  float weight = 0.0f;  // 0 marks an unused slot

  friend bool operator==(const SampleTap&, const SampleTap&) = default;
};

/// Per mosaic pixel: up to kMaxTaps weighted source samples plus a class flag.
struct LookupMaps {
  static constexpr int kMaxTaps = 2;

  MosaicSpec spec;
  int side_px = 0;
  std::vector<std::pair<int, int>> camera_sizes;  // (width, height) per camera id
  std::vector<PixelClass> classes;
  std::vector<SampleTap> taps;  // side_px * side_px * kMaxTaps

  PixelClass class_at(int x, int y) const { return classes[static_cast<std::size_t>(y) * side_px + x]; }
  std::span<const SampleTap> taps_at(int x, int y) const {
    return {taps.data() + (static_cast<std::size_t>(y) * side_px + x) * kMaxTaps, kMaxTaps};
  }

  friend bool operator==(const LookupMaps&, const LookupMaps&) = default;
};

/// Width of the linear cross-fade centred on each sector boundary.
inline constexpr double kFeatherBandDeg = 10.0;

/// Throws ConfigError when two cameras share an azimuth or the list is empty.
LookupMaps build_lookup_maps(std::span<const CameraModel> cameras, const RigBody& body,
                             const calibration::RigAttitude& attitude, const MosaicSpec& spec);

/// Colours used for pixels the cameras cannot see and for the rig glyph.
inline constexpr Rgb kBlindColor{0, 0, 0};
inline constexpr Rgb kRigGlyphColor{70, 80, 100};

/// Throws ValidationError if frame count or sizes disagree with the maps.
Image compose_topview(std::span<const Image> frames, const LookupMaps& maps);

struct CoverageReport {
  double max_covered_radius_m = 0.0;  // capped at the mosaic half-width
  std::vector<double> camera_area_m2;  // blend-weighted ground area per camera
  std::size_t blind_pixels = 0;
  std::size_t covered_pixels = 0;
  std::size_t footprint_pixels = 0;
};

CoverageReport coverage_report(const LookupMaps& maps);

// Binary map cache. The key hashes everything the maps depend on; load
// returns nullopt for a stale key or an unknown format version.
std::uint64_t maps_cache_key(std::span<const CameraModel> cameras, const RigBody& body,
                             const calibration::RigAttitude& attitude, const MosaicSpec& spec);
void save_maps(const std::filesystem::path& path, const LookupMaps& maps, std::uint64_t key);
std::optional<LookupMaps> load_maps(const std::filesystem::path& path, std::uint64_t key);

}  // namespace avm::projection

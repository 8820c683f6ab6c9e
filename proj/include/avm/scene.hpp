#pragma once

// Synthetic ground scene and a ray-casting renderer standing in for the four
// physical cameras.

#include <Eigen/Core>

#include <span>
#include <vector>

#include "avm/attitude.hpp"
#include "avm/image.hpp"
#include "avm/markers.hpp"
#include "avm/projection.hpp"

namespace avm::scene {

/// Small enough that a disc's image centroid stays within 0.4 px of its
/// projected centre at every camera of the reference rig.
inline constexpr double kDefaultMarkerRadius = 0.075;

struct Marker {
  int id = 0;
  Eigen::Vector2d position_m = Eigen::Vector2d::Zero();
  double radius_m = kDefaultMarkerRadius;
};

struct Prop {
  enum class Shape { Box, Cylinder };
  Shape shape = Shape::Box;
  Eigen::Vector2d center_m = Eigen::Vector2d::Zero();
  Eigen::Vector2d size_m{1.0, 1.0};  // box extent along x, y
  double radius_m = 0.5;             // cylinder
  double height_m = 1.0;
  Rgb color{60, 140, 200};

  bool covers(const Eigen::Vector2d& p) const;
  /// Boxes give their four corners; cylinders a 32-gon.
  std::vector<Eigen::Vector2d> footprint() const;
};

struct Scene {
  double checker_pitch_m = 1.0;  // 0 renders a uniform ground
  Rgb light{200, 200, 200};
  Rgb dark{60, 60, 60};
  Rgb sky{110, 160, 220};
  std::vector<Marker> markers;
  std::vector<Prop> props;

  std::vector<markers::MarkerRef> marker_refs() const;
};

/// Throws ConfigError on duplicate or out-of-range marker ids, non-neutral
/// ground colours, red-dominant props (reserved for marker chroma) or, when a
/// spec is given, markers outside the mosaic.
void validate(const Scene& scene, const projection::MosaicSpec* spec = nullptr);

/// 1 m checkerboard with 28 markers on rings at 2.6, 3.5 and 6.0 m and no props.
Scene checkerboard_scene();

/// The checkerboard scene plus a few boxes and poles standing in for site objects.
Scene default_scene();

struct RenderOptions {
  int supersample = 1;  // n x n rays per pixel
};

Image render_camera_view(const Scene& scene, const projection::CameraModel& model, const projection::Pose& pose,
                         const RenderOptions& options = {});

/// One frame per camera with the rig tilted by `attitude`.
std::vector<Image> render_rig(const Scene& scene, std::span<const projection::CameraModel> cameras,
                              const calibration::RigAttitude& attitude, const RenderOptions& options = {});

struct MarkerPixel {
  int id = 0;
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  bool occluded = false;  // under a prop
};

struct GroundTruth {
  Image image;
  std::vector<MarkerPixel> markers;
};

/// Orthographic top view of the scene at mosaic scale, no rig.
GroundTruth ground_truth(const Scene& scene, const projection::MosaicSpec& spec, int supersample = 4);

/// Checkerboard corners no further than `max_radius_m` from the rig centre.
std::vector<Eigen::Vector2d> checker_corners(const Scene& scene, double max_radius_m);

}  // namespace avm::scene

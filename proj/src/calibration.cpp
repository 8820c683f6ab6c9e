#include "avm/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "avm/errors.hpp"

namespace avm::calibration {

using projection::CameraModel;
using projection::LookupMaps;

LookupMaps recalibrate(std::span<const CameraModel> cameras, const projection::RigBody& body,
                       const RigAttitude& attitude, const projection::MosaicSpec& spec) {
  check_envelope(attitude);
  return projection::build_lookup_maps(cameras, body, attitude, spec);
}

Recalibrator::Recalibrator(std::vector<CameraModel> cameras, projection::RigBody body, projection::MosaicSpec spec,
                           double debounce_deg)
    : cameras_(std::move(cameras)), body_(body), spec_(spec), debounce_deg_(debounce_deg) {
  flat_ = std::make_shared<const LookupMaps>(projection::build_lookup_maps(cameras_, body_, RigAttitude{}, spec_));
  cached_ = flat_;
}

std::shared_ptr<const LookupMaps> Recalibrator::update(const RigAttitude& attitude) {
  check_envelope(attitude);
  {
    std::lock_guard lock(mutex_);
    if (max_angle_delta_deg(attitude, cached_attitude_) < debounce_deg_) return cached_;
  }
  auto maps = std::make_shared<const LookupMaps>(recalibrate(cameras_, body_, attitude, spec_));
  std::lock_guard lock(mutex_);
  cached_attitude_ = attitude;
  cached_ = maps;
  ++rebuilds_;
  return cached_;
}

int Recalibrator::rebuild_count() const {
  std::lock_guard lock(mutex_);
  return rebuilds_;
}

DistortionStats distortion_metric(const Image& mosaic_test, const Image& mosaic_reference,
                                  std::span<const markers::MarkerRef> markers, const projection::MosaicSpec& spec) {
  const int side = spec.side_px();
  for (const Image* img : {&mosaic_test, &mosaic_reference}) {
    if (img->width() != side || img->height() != side)
      throw ValidationError("distortion_metric: mosaic size does not match its spec");
  }
  for (const auto& m : markers) {
    const Eigen::Vector2d px = spec.ground_to_pixel(m.ground_m);
    if (px.x() < 0 || px.y() < 0 || px.x() > side - 1 || px.y() > side - 1)
      throw RangeError("distortion_metric: marker " + std::to_string(m.id) + " lies outside the mosaic");
  }

  const auto test = markers::marker_centroids(mosaic_test);
  const auto reference = markers::marker_centroids(mosaic_reference);

  DistortionStats stats;
  double sum = 0.0;
  for (const auto& m : markers) {
    const auto ref = reference.find(m.id);
    if (ref == reference.end())
      throw ValidationError("distortion_metric: marker " + std::to_string(m.id) + " not visible in the reference");
    const auto found = test.find(m.id);
    if (found == test.end()) {
      stats.missing.push_back(m.id);
      continue;
    }
    const double d = (found->second - ref->second).norm() / spec.scale_px_per_m;
    stats.markers.push_back({m.id, m.ground_m.norm(), d});
    sum += d;
    stats.max_m = std::max(stats.max_m, d);
  }
  if (!stats.markers.empty()) stats.mean_m = sum / static_cast<double>(stats.markers.size());
  return stats;
}

}  // namespace avm::calibration

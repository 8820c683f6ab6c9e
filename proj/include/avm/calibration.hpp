#pragma once

// Inclination compensation: rebuild the stitching maps with every camera's
// world pose tilted by the rig attitude, so mosaic pixels keep indexing true
// ground points, and measure how far markers drift with and without it.

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "avm/attitude.hpp"
#include "avm/markers.hpp"
#include "avm/projection.hpp"

namespace avm::calibration {

/// Envelope-checked map rebuild for a tilted rig. Identity attitude gives
/// exactly build_lookup_maps(..., RigAttitude{}, ...).
projection::LookupMaps recalibrate(std::span<const projection::CameraModel> cameras,
                                   const projection::RigBody& body, const RigAttitude& attitude,
                                   const projection::MosaicSpec& spec);

/// Attitude changes smaller than this reuse the cached maps.
inline constexpr double kDebounceDeg = 0.1;

/// Holds the flat-ground maps and the most recent calibrated maps. Callers get
/// immutable snapshots; a rebuild replaces the whole value.
class Recalibrator {
 public:
  Recalibrator(std::vector<projection::CameraModel> cameras, projection::RigBody body,
               projection::MosaicSpec spec, double debounce_deg = kDebounceDeg);

  std::shared_ptr<const projection::LookupMaps> flat() const { return flat_; }

  /// Maps for `attitude`, rebuilt only when it moved at least the debounce
  /// threshold away from the cached attitude.
  std::shared_ptr<const projection::LookupMaps> update(const RigAttitude& attitude);

  int rebuild_count() const;

 private:
  std::vector<projection::CameraModel> cameras_;
  projection::RigBody body_;
  projection::MosaicSpec spec_;
  double debounce_deg_;
  std::shared_ptr<const projection::LookupMaps> flat_;

  mutable std::mutex mutex_;
  RigAttitude cached_attitude_{};
  std::shared_ptr<const projection::LookupMaps> cached_;
  int rebuilds_ = 0;
};

struct MarkerDisplacement {
  int id = 0;
  double range_m = 0.0;  // marker distance from the rig centre
  double displacement_m = 0.0;
};

struct DistortionStats {
  double mean_m = 0.0;
  double max_m = 0.0;
  std::vector<MarkerDisplacement> markers;
  std::vector<int> missing;  // not found in the test mosaic
};

/// Marker-image displacement between two mosaics of the same spec. Throws
/// RangeError when a marker lies outside the mosaic and ValidationError when
/// the images disagree with the spec or a marker is absent from the reference.
DistortionStats distortion_metric(const Image& mosaic_test, const Image& mosaic_reference,
                                  std::span<const markers::MarkerRef> markers, const projection::MosaicSpec& spec);

}  // namespace avm::calibration

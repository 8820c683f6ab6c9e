#pragma once

// Ground markers carry a chroma key: colour (255, 8 * id, 0) on a neutral
// grey background. For any linear blend of a marker with neutral pixels,
// R - B measures marker coverage and (G - B) / (R - B) recovers the id, so
// markers can be located in raw views and in stitched mosaics by lookup.

#include <Eigen/Core>

#include <map>

#include "avm/image.hpp"

namespace avm::markers {

inline constexpr int kMaxMarkers = 32;

/// Throws std::out_of_range for ids outside [0, kMaxMarkers).
Rgb marker_color(int id);

struct MarkerRef {
  int id = 0;
  Eigen::Vector2d ground_m = Eigen::Vector2d::Zero();
};

/// Coverage-weighted centroid of every marker present in `image`, keyed by id.
std::map<int, Eigen::Vector2d> marker_centroids(const Image& image);

}  // namespace avm::markers

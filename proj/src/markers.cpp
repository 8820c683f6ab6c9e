#include "avm/markers.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace avm::markers {

namespace {
constexpr int kIdStep = 8;
// Pixels with less marker coverage than this are ignored: the id ratio gets
// unreliable after 8-bit rounding.
constexpr int kMinChroma = 64;
}  // namespace

Rgb marker_color(int id) {
  if (id < 0 || id >= kMaxMarkers) throw std::out_of_range("marker id out of range");
  return {255, static_cast<std::uint8_t>(kIdStep * id), 0};
}

std::map<int, Eigen::Vector2d> marker_centroids(const Image& image) {
  struct Acc {
    double w = 0, x = 0, y = 0;
  };
  std::array<Acc, kMaxMarkers> acc{};
  for (int y = 0; y < image.height(); ++y) {
    const std::uint8_t* p = image.row(y);
    for (int x = 0; x < image.width(); ++x, p += 3) {
      const int chroma = p[0] - p[2];
      if (chroma < kMinChroma) continue;
      const double level = 255.0 * (p[1] - p[2]) / chroma;
      const long id = std::lround(level / kIdStep);
      if (id < 0 || id >= kMaxMarkers || std::abs(level - kIdStep * id) > 3.0) continue;
      acc[id].w += chroma;
      acc[id].x += chroma * x;
      acc[id].y += chroma * y;
    }
  }
  std::map<int, Eigen::Vector2d> out;
  for (int id = 0; id < kMaxMarkers; ++id) {
    if (acc[id].w > 0) out[id] = {acc[id].x / acc[id].w, acc[id].y / acc[id].w};
  }
  return out;
}

}  // namespace avm::markers

#include "avm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "avm/errors.hpp"
#include "avm/parallel.hpp"
#include "avm/units.hpp"

namespace avm::scene {

using Eigen::Vector2d;
using Eigen::Vector3d;

bool Prop::covers(const Vector2d& p) const {
  const Vector2d d = p - center_m;
  if (shape == Shape::Cylinder) return d.squaredNorm() <= radius_m * radius_m;
  return std::abs(d.x()) <= size_m.x() / 2 && std::abs(d.y()) <= size_m.y() / 2;
}

std::vector<Vector2d> Prop::footprint() const {
  std::vector<Vector2d> poly;
  if (shape == Shape::Box) {
    const Vector2d h = size_m / 2;
    poly = {center_m + Vector2d{-h.x(), -h.y()}, center_m + Vector2d{h.x(), -h.y()},
            center_m + Vector2d{h.x(), h.y()}, center_m + Vector2d{-h.x(), h.y()}};
    return poly;
  }
  constexpr int kSides = 32;
  for (int i = 0; i < kSides; ++i) {
    const double a = 2 * std::numbers::pi * i / kSides;
    poly.push_back(center_m + radius_m * Vector2d{std::cos(a), std::sin(a)});
  }
  return poly;
}

std::vector<markers::MarkerRef> Scene::marker_refs() const {
  std::vector<markers::MarkerRef> refs;
  for (const auto& m : markers) refs.push_back({m.id, m.position_m});
  return refs;
}

void validate(const Scene& scene, const projection::MosaicSpec* spec) {
  auto neutral = [](Rgb c) { return c.r == c.g && c.g == c.b; };
  if (!neutral(scene.light) || !neutral(scene.dark)) throw ConfigError("scene ground colours must be neutral grey");
  if (scene.checker_pitch_m < 0) throw ConfigError("checker pitch must be >= 0");
  std::set<int> ids;
  for (const auto& m : scene.markers) {
    if (m.id < 0 || m.id >= markers::kMaxMarkers)
      throw ConfigError("marker id " + std::to_string(m.id) + " outside [0, 32)");
    if (!ids.insert(m.id).second) throw ConfigError("duplicate marker id " + std::to_string(m.id));
    if (!(m.radius_m > 0)) throw ConfigError("marker radius must be > 0");
    if (spec && (std::abs(m.position_m.x()) + m.radius_m > spec->extent_m ||
                 std::abs(m.position_m.y()) + m.radius_m > spec->extent_m))
      throw ConfigError("marker " + std::to_string(m.id) + " lies outside the mosaic extent");
  }
  for (const auto& p : scene.props) {
    if (p.color.r - p.color.b >= 64) throw ConfigError("prop colours must not be red-dominant (reserved for markers)");
    if (!(p.height_m > 0)) throw ConfigError("prop height must be > 0");
  }
}

Scene checkerboard_scene() {
  Scene scene;
  // Angles keep clear of the tilt axes of the calibration grid (0, 31, 45, 59, 90 deg and mirrors).
  const std::vector<double> ring = {15, 52, 75, 105, 128, 165, 195, 232, 255, 285, 308, 345};
  int id = 0;
  for (double a : {15.0, 105.0, 195.0, 285.0}) {
    scene.markers.push_back({id++, 2.6 * Vector2d{std::cos(deg2rad(a)), std::sin(deg2rad(a))}, kDefaultMarkerRadius});
  }
  for (double r : {3.5, 6.0}) {
    for (double a : ring) {
      scene.markers.push_back({id++, r * Vector2d{std::cos(deg2rad(a)), std::sin(deg2rad(a))}, kDefaultMarkerRadius});
    }
  }
  return scene;
}

Scene default_scene() {
  Scene scene = checkerboard_scene();
  Prop truck;
  truck.center_m = {5.5, -4.5};
  truck.size_m = {1.2, 2.4};
  truck.height_m = 1.6;
  truck.color = {70, 170, 190};
  Prop pole;
  pole.shape = Prop::Shape::Cylinder;
  pole.center_m = {-5.0, 5.0};
  pole.radius_m = 0.25;
  pole.height_m = 2.5;
  pole.color = {40, 160, 70};
  Prop crate;
  crate.center_m = {-6.5, -2.0};
  crate.size_m = {0.8, 0.8};
  crate.height_m = 0.8;
  crate.color = {120, 90, 160};
  scene.props = {truck, pole, crate};
  return scene;
}

namespace {

// Markers bucketed on a 1 m grid so each ground hit tests only nearby discs.
class MarkerIndex {
 public:
  explicit MarkerIndex(const std::vector<Marker>& markers) : markers_(markers) {
    double reach = 1.0;
    for (const auto& m : markers) {
      reach = std::max(reach, std::max(std::abs(m.position_m.x()), std::abs(m.position_m.y())) + m.radius_m + 1.0);
    }
    half_ = static_cast<int>(std::ceil(reach));
    cells_.assign(static_cast<std::size_t>(2 * half_) * 2 * half_, {});
    for (std::size_t i = 0; i < markers.size(); ++i) {
      const auto& m = markers[i];
      const int x0 = cell(m.position_m.x() - m.radius_m), x1 = cell(m.position_m.x() + m.radius_m);
      const int y0 = cell(m.position_m.y() - m.radius_m), y1 = cell(m.position_m.y() + m.radius_m);
      for (int cy = y0; cy <= y1; ++cy)
        for (int cx = x0; cx <= x1; ++cx) cells_[index(cx, cy)].push_back(static_cast<int>(i));
    }
  }

  const Marker* find(double x, double y) const {
    const int cx = cell(x), cy = cell(y);
    if (cx < 0 || cy < 0 || cx >= 2 * half_ || cy >= 2 * half_) return nullptr;
    for (int i : cells_[index(cx, cy)]) {
      const auto& m = markers_[i];
      const double dx = x - m.position_m.x(), dy = y - m.position_m.y();
      if (dx * dx + dy * dy <= m.radius_m * m.radius_m) return &m;
    }
    return nullptr;
  }

 private:
  int cell(double v) const { return static_cast<int>(std::floor(v)) + half_; }
  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * 2 * half_ + cx; }

  const std::vector<Marker>& markers_;
  int half_ = 1;
  std::vector<std::vector<int>> cells_;
};

class Tracer {
 public:
  explicit Tracer(const Scene& scene) : scene_(scene), index_(scene.markers) {}

  Rgb ground(double x, double y) const {
    if (const Marker* m = index_.find(x, y)) return markers::marker_color(m->id);
    if (scene_.checker_pitch_m <= 0) return scene_.light;
    const long i = static_cast<long>(std::floor(x / scene_.checker_pitch_m));
    const long j = static_cast<long>(std::floor(y / scene_.checker_pitch_m));
    return ((i + j) & 1) == 0 ? scene_.light : scene_.dark;
  }

  Rgb top_view(double x, double y) const {
    // Tallest prop wins where footprints overlap.
    const Prop* best = nullptr;
    for (const auto& p : scene_.props) {
      if (p.covers({x, y}) && (!best || p.height_m > best->height_m)) best = &p;
    }
    return best ? best->color : ground(x, y);
  }

  Rgb trace(const Vector3d& o, const Vector3d& d) const {
    double nearest = std::numeric_limits<double>::infinity();
    Rgb color = scene_.sky;
    if (d.z() < 0) {
      nearest = -o.z() / d.z();
      const Vector3d hit = o + nearest * d;
      color = ground(hit.x(), hit.y());
    }
    for (const auto& p : scene_.props) {
      const double t = intersect(p, o, d);
      if (t < nearest) {
        nearest = t;
        color = p.color;
      }
    }
    return color;
  }

 private:
  static double intersect(const Prop& p, const Vector3d& o, const Vector3d& d) {
    constexpr double kMiss = std::numeric_limits<double>::infinity();
    if (p.shape == Prop::Shape::Box) {
      const Vector3d lo{p.center_m.x() - p.size_m.x() / 2, p.center_m.y() - p.size_m.y() / 2, 0.0};
      const Vector3d hi{p.center_m.x() + p.size_m.x() / 2, p.center_m.y() + p.size_m.y() / 2, p.height_m};
      double t0 = 0.0, t1 = kMiss;
      for (int k = 0; k < 3; ++k) {
        if (std::abs(d[k]) < 1e-15) {
          if (o[k] < lo[k] || o[k] > hi[k]) return kMiss;
          continue;
        }
        double a = (lo[k] - o[k]) / d[k], b = (hi[k] - o[k]) / d[k];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        if (t0 > t1) return kMiss;
      }
      return t0 > 0 ? t0 : kMiss;
    }
    // Vertical cylinder: side wall, then the top cap.
    double best = kMiss;
    const double ox = o.x() - p.center_m.x(), oy = o.y() - p.center_m.y();
    const double a = d.x() * d.x() + d.y() * d.y();
    if (a > 1e-15) {
      const double b = 2 * (ox * d.x() + oy * d.y());
      const double c = ox * ox + oy * oy - p.radius_m * p.radius_m;
      const double disc = b * b - 4 * a * c;
      if (disc >= 0) {
        const double t = (-b - std::sqrt(disc)) / (2 * a);
        const double z = o.z() + t * d.z();
        if (t > 0 && z >= 0 && z <= p.height_m) best = t;
      }
    }
    if (std::abs(d.z()) > 1e-15) {
      const double t = (p.height_m - o.z()) / d.z();
      const double x = ox + t * d.x(), y = oy + t * d.y();
      if (t > 0 && x * x + y * y <= p.radius_m * p.radius_m) best = std::min(best, t);
    }
    return best;
  }

  const Scene& scene_;
  MarkerIndex index_;
};

}  // namespace

Image render_camera_view(const Scene& scene, const projection::CameraModel& model, const projection::Pose& pose,
                         const RenderOptions& options) {
  const int w = model.lens.width_px, h = model.lens.height_px;
  const int ss = std::max(1, options.supersample);
  const Tracer tracer(scene);
  const Eigen::Matrix3d cam_to_world = pose.linear().transpose();
  const Vector3d origin = projection::camera_center(pose);
  const Eigen::Vector2d pp = model.principal_point();
  const double f = model.focal_px();
  const double circle = model.image_circle_radius_px;

  Image out(w, h);
  parallel_for(0, h, [&](int row_lo, int row_hi) {
    for (int y = row_lo; y < row_hi; ++y) {
      std::uint8_t* dst = out.row(y);
      for (int x = 0; x < w; ++x, dst += 3) {
        double acc[3] = {0, 0, 0};
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const double dx = x + (sx + 0.5) / ss - 0.5 - pp.x();
            const double dy = y + (sy + 0.5) / ss - 0.5 - pp.y();
            const double r = std::hypot(dx, dy);
            if (r > circle) continue;  // unlit border stays black
            Vector3d ray_cam = Vector3d::UnitZ();
            if (r > 0) {
              const double theta = r / f;
              const double s = std::sin(theta) / r;
              ray_cam = {s * dx, s * dy, std::cos(theta)};
            }
            const Rgb c = tracer.trace(origin, cam_to_world * ray_cam);
            acc[0] += c.r;
            acc[1] += c.g;
            acc[2] += c.b;
          }
        }
        const double n = ss * ss;
        for (int ch = 0; ch < 3; ++ch) dst[ch] = static_cast<std::uint8_t>(std::lround(acc[ch] / n));
      }
    }
  });
  return out;
}

std::vector<Image> render_rig(const Scene& scene, std::span<const projection::CameraModel> cameras,
                              const calibration::RigAttitude& attitude, const RenderOptions& options) {
  std::vector<Image> frames;
  frames.reserve(cameras.size());
  for (const auto& cam : cameras) {
    frames.push_back(render_camera_view(scene, cam, projection::camera_pose_matrix(cam.mount, attitude), options));
  }
  return frames;
}

GroundTruth ground_truth(const Scene& scene, const projection::MosaicSpec& spec, int supersample) {
  const int side = spec.side_px();
  const int ss = std::max(1, supersample);
  const Tracer tracer(scene);
  GroundTruth gt;
  gt.image = Image(side, side);
  parallel_for(0, side, [&](int row_lo, int row_hi) {
    for (int row = row_lo; row < row_hi; ++row) {
      for (int col = 0; col < side; ++col) {
        double acc[3] = {0, 0, 0};
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const Eigen::Vector2d g =
                spec.pixel_to_ground({col + (sx + 0.5) / ss - 0.5, row + (sy + 0.5) / ss - 0.5});
            const Rgb c = tracer.top_view(g.x(), g.y());
            acc[0] += c.r;
            acc[1] += c.g;
            acc[2] += c.b;
          }
        }
        const double n = ss * ss;
        gt.image.set(col, row,
                     {static_cast<std::uint8_t>(std::lround(acc[0] / n)),
                      static_cast<std::uint8_t>(std::lround(acc[1] / n)),
                      static_cast<std::uint8_t>(std::lround(acc[2] / n))});
      }
    }
  });
  for (const auto& m : scene.markers) {
    const bool occluded =
        std::any_of(scene.props.begin(), scene.props.end(), [&](const Prop& p) { return p.covers(m.position_m); });
    gt.markers.push_back({m.id, spec.ground_to_pixel(m.position_m), occluded});
  }
  return gt;
}

std::vector<Eigen::Vector2d> checker_corners(const Scene& scene, double max_radius_m) {
  std::vector<Eigen::Vector2d> corners;
  if (scene.checker_pitch_m <= 0) return corners;
  const int n = static_cast<int>(std::floor(max_radius_m / scene.checker_pitch_m));
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      const Eigen::Vector2d c{i * scene.checker_pitch_m, j * scene.checker_pitch_m};
      if (c.norm() <= max_radius_m) corners.push_back(c);
    }
  }
  return corners;
}

}  // namespace avm::scene

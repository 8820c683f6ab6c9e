#include "avm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "avm/errors.hpp"
#include "avm/parallel.hpp"
#include "avm/units.hpp"

namespace avm::projection {

using calibration::RigAttitude;
using camgeom::CameraMount;

double CameraModel::half_fov_rad() const { return deg2rad(lens.fov_deg) / 2.0; }

CameraModel make_camera_model(const CameraMount& mount, const camgeom::LensSpec& lens,
                              std::optional<double> image_circle_radius_px) {
  camgeom::validate(mount);
  camgeom::validate(lens);
  CameraModel model{mount, lens, 0.0};
  model.image_circle_radius_px =
      image_circle_radius_px.value_or(std::min(lens.width_px - 1, lens.height_px - 1) / 2.0);
  if (!(model.image_circle_radius_px > 0.0)) throw ConfigError("image circle radius must be > 0");
  return model;
}

Eigen::Matrix3d mount_rotation(const CameraMount& mount) {
  const double heading = deg2rad(camgeom::azimuth_heading_deg(mount.azimuth));
  const double alpha = deg2rad(mount.alpha_deg);
  const double beta = deg2rad(mount.beta_deg);
  const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d out{std::cos(heading), std::sin(heading), 0.0};

  const Eigen::Vector3d forward = std::cos(alpha) * out - std::sin(alpha) * up;
  const Eigen::Vector3d right0 = out.cross(up);
  const Eigen::Vector3d down0 = forward.cross(right0);
  // Beta turns the image axes about the optical axis.
  const Eigen::Vector3d right = std::cos(beta) * right0 + std::sin(beta) * down0;
  const Eigen::Vector3d down = -std::sin(beta) * right0 + std::cos(beta) * down0;

  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return r;
}

Pose camera_pose_matrix(const CameraMount& mount, const RigAttitude& attitude) {
  const Eigen::Matrix3d rig_to_world = calibration::attitude_rotation(attitude);
  const Eigen::Matrix3d cam_to_world = rig_to_world * mount_rotation(mount);
  const Eigen::Vector3d center = rig_to_world * mount.position_m;
  Pose pose = Pose::Identity();
  pose.linear() = cam_to_world.transpose();
  pose.translation() = -(cam_to_world.transpose() * center);
  return pose;
}

Eigen::Vector3d camera_center(const Pose& pose) { return -(pose.linear().transpose() * pose.translation()); }

std::optional<Eigen::Vector2d> project_point(const CameraModel& model, const Pose& pose, const Eigen::Vector3d& p) {
  const Eigen::Vector3d pc = pose * p;
  const double rho = std::hypot(pc.x(), pc.y());
  const double theta = std::atan2(rho, pc.z());
  if (theta > model.half_fov_rad()) return std::nullopt;
  const Eigen::Vector2d pp = model.principal_point();
  if (rho == 0.0) {
    if (pc.z() <= 0.0) return std::nullopt;
    return pp;
  }
  const double r = model.focal_px() * theta;
  return Eigen::Vector2d{pp.x() + r * pc.x() / rho, pp.y() + r * pc.y() / rho};
}

std::optional<Eigen::Vector3d> pixel_ray(const CameraModel& model, const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d d = pixel - model.principal_point();
  const double r = d.norm();
  if (r > model.image_circle_radius_px) return std::nullopt;
  if (r == 0.0) return Eigen::Vector3d::UnitZ();
  const double theta = r / model.focal_px();
  const double s = std::sin(theta) / r;
  return Eigen::Vector3d{s * d.x(), s * d.y(), std::cos(theta)};
}

std::optional<Eigen::Vector2d> unproject_to_ground(const CameraModel& model, const Pose& pose,
                                                   const Eigen::Vector2d& pixel) {
  const auto ray = pixel_ray(model, pixel);
  if (!ray) return std::nullopt;
  const Eigen::Vector3d dir = pose.linear().transpose() * *ray;
  const Eigen::Vector3d center = camera_center(pose);
  if (dir.z() >= 0.0) return std::nullopt;
  const double t = -center.z() / dir.z();
  if (t <= 0.0) return std::nullopt;
  return (center + t * dir).head<2>();
}

int MosaicSpec::side_px() const { return static_cast<int>(std::lround(2.0 * extent_m * scale_px_per_m)); }

Eigen::Vector2d MosaicSpec::origin_px() const {
  const double c = (side_px() - 1) / 2.0;
  return {c, c};
}

Eigen::Vector2d MosaicSpec::ground_to_pixel(const Eigen::Vector2d& ground) const {
  return origin_px() + Eigen::Vector2d{ground.x() * scale_px_per_m, -ground.y() * scale_px_per_m};
}

Eigen::Vector2d MosaicSpec::pixel_to_ground(const Eigen::Vector2d& pixel) const {
  const Eigen::Vector2d d = pixel - origin_px();
  return {d.x() / scale_px_per_m, -d.y() / scale_px_per_m};
}

void validate(const MosaicSpec& spec) {
  if (!(spec.extent_m > 0.0) || !(spec.scale_px_per_m > 0.0)) throw ConfigError("mosaic extent and scale must be > 0");
  if (spec.side_px() < 2) throw ConfigError("mosaic must be at least 2 px wide");
}

std::vector<Eigen::Vector2d> body_footprint(const RigBody& body, const RigAttitude& attitude) {
  const Eigen::Matrix3d r = calibration::attitude_rotation(attitude);
  const double hx = body.width_m / 2.0;
  const double hy = body.depth_m / 2.0;
  std::vector<Eigen::Vector2d> poly;
  for (const auto& [x, y] : {std::pair{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}) {
    poly.push_back((r * Eigen::Vector3d{x, y, 0.0}).head<2>());
  }
  return poly;
}

namespace {

bool inside_convex(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    const Eigen::Vector2d e = b - a;
    const Eigen::Vector2d q = p - a;
    if (e.x() * q.y() - e.y() * q.x() < 0.0) return false;
  }
  return true;
}

/// Signed difference a - b wrapped into (-180, 180].
double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a <= -180.0) a += 360.0;
  return a;
}

struct SectorTable {
  std::vector<double> headings;  // per camera id, world degrees
  std::vector<int> order;        // camera ids sorted by heading
};

// Sector weights: each camera owns the arc halfway to its angular neighbours,
// with a linear cross-fade of kFeatherBandDeg centred on every boundary.
void sector_weights(const SectorTable& t, double phi, std::vector<double>& w) {
  std::fill(w.begin(), w.end(), 0.0);
  const std::size_t n = t.order.size();
  if (n == 1) {
    w[t.order[0]] = 1.0;
    return;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const int cur = t.order[k];
    const int prev = t.order[(k + n - 1) % n];
    const int next = t.order[(k + 1) % n];
    auto ccw_gap = [](double from, double to) {
      double g = std::fmod(to - from, 360.0);
      if (g <= 0.0) g += 360.0;
      return g;
    };
    const double lo = -ccw_gap(t.headings[prev], t.headings[cur]) / 2.0;
    const double hi = ccw_gap(t.headings[cur], t.headings[next]) / 2.0;
    const double d = wrap_deg(phi - t.headings[cur]);
    // Distance inside the sector from the nearer boundary; negative outside.
    const double inside = std::min(d - lo, hi - d);
    w[cur] = std::clamp(0.5 + inside / kFeatherBandDeg, 0.0, 1.0);
  }
}

}  // namespace

LookupMaps build_lookup_maps(std::span<const CameraModel> cameras, const RigBody& body, const RigAttitude& attitude,
                             const MosaicSpec& spec) {
  validate(spec);
  if (cameras.empty()) throw ConfigError("build_lookup_maps: no cameras");
  if (cameras.size() > 255) throw ConfigError("build_lookup_maps: too many cameras");
  std::set<camgeom::Azimuth> seen;
  for (const auto& cam : cameras) {
    if (!seen.insert(cam.mount.azimuth).second)
      throw ConfigError("two cameras share azimuth '" + std::string(camgeom::to_string(cam.mount.azimuth)) + "'");
  }

  const int n = static_cast<int>(cameras.size());
  std::vector<Pose> poses;
  SectorTable sectors;
  for (const auto& cam : cameras) {
    poses.push_back(camera_pose_matrix(cam.mount, attitude));
    sectors.headings.push_back(camgeom::azimuth_heading_deg(cam.mount.azimuth) + attitude.yaw_deg);
  }
  sectors.order.resize(n);
  std::iota(sectors.order.begin(), sectors.order.end(), 0);
  std::sort(sectors.order.begin(), sectors.order.end(), [&](int a, int b) {
    return calibration::normalize_yaw(sectors.headings[a]) < calibration::normalize_yaw(sectors.headings[b]);
  });

  const auto footprint = body_footprint(body, attitude);

  LookupMaps maps;
  maps.spec = spec;
  maps.side_px = spec.side_px();
  for (const auto& cam : cameras) maps.camera_sizes.emplace_back(cam.lens.width_px, cam.lens.height_px);
  const std::size_t count = static_cast<std::size_t>(maps.side_px) * maps.side_px;
  maps.classes.assign(count, PixelClass::Blind);
  maps.taps.assign(count * LookupMaps::kMaxTaps, SampleTap{});

  // Keep samples one pixel inside the image circle so bilinear taps never
  // touch the unlit border.
  auto in_view = [&](int c, const Eigen::Vector2d& g) -> std::optional<Eigen::Vector2d> {
    auto px = project_ground_point(cameras[c], poses[c], g);
    if (!px) return std::nullopt;
    if ((*px - cameras[c].principal_point()).norm() > cameras[c].image_circle_radius_px - 1.0) return std::nullopt;
    return px;
  };

  parallel_for(0, maps.side_px, [&](int row_lo, int row_hi) {
    std::vector<double> weights(n);
    std::vector<std::optional<Eigen::Vector2d>> hits(n);
    for (int row = row_lo; row < row_hi; ++row) {
      for (int col = 0; col < maps.side_px; ++col) {
        const std::size_t idx = static_cast<std::size_t>(row) * maps.side_px + col;
        const Eigen::Vector2d g = spec.pixel_to_ground({col, row});
        if (inside_convex(footprint, g)) {
          maps.classes[idx] = PixelClass::Footprint;
          continue;
        }
        const double phi = rad2deg(std::atan2(g.y(), g.x()));
        sector_weights(sectors, phi, weights);
        double total = 0.0;
        for (int c = 0; c < n; ++c) {
          hits[c].reset();
          if (weights[c] <= 0.0) continue;
          hits[c] = in_view(c, g);
          if (!hits[c]) weights[c] = 0.0;
          total += weights[c];
        }
        if (total <= 0.0) {
          // Owner cannot see it: fall back to the visible camera closest in heading.
          int best = -1;
          double best_delta = 1e9;
          for (int c = 0; c < n; ++c) {
            auto px = in_view(c, g);
            if (!px) continue;
            const double delta = std::abs(wrap_deg(phi - sectors.headings[c]));
            if (delta < best_delta) {
              best_delta = delta;
              best = c;
              hits[c] = px;
            }
          }
          if (best < 0) continue;
          std::fill(weights.begin(), weights.end(), 0.0);
          weights[best] = 1.0;
          total = 1.0;
        }
        SampleTap* out = &maps.taps[idx * LookupMaps::kMaxTaps];
        int slot = 0;
        for (int c = 0; c < n && slot < LookupMaps::kMaxTaps; ++c) {
          if (weights[c] <= 0.0) continue;
          out[slot++] = SampleTap{static_cast<std::uint8_t>(c), static_cast<float>(hits[c]->x()),
                                  static_cast<float>(hits[c]->y()), static_cast<float>(weights[c] / total)};
        }
        maps.classes[idx] = PixelClass::Covered;
      }
    }
  });
  return maps;
}

Image compose_topview(std::span<const Image> frames, const LookupMaps& maps) {
  if (frames.size() != maps.camera_sizes.size())
    throw ValidationError("compose_topview: expected " + std::to_string(maps.camera_sizes.size()) + " frames, got " +
                          std::to_string(frames.size()));
  for (std::size_t c = 0; c < frames.size(); ++c) {
    if (frames[c].width() != maps.camera_sizes[c].first || frames[c].height() != maps.camera_sizes[c].second)
      throw ValidationError("compose_topview: frame " + std::to_string(c) + " size does not match its camera");
  }
  Image out(maps.side_px, maps.side_px, kBlindColor);
  parallel_for(0, maps.side_px, [&](int row_lo, int row_hi) {
    for (int row = row_lo; row < row_hi; ++row) {
      std::uint8_t* dst = out.row(row);
      for (int col = 0; col < maps.side_px; ++col, dst += 3) {
        const PixelClass cls = maps.class_at(col, row);
        if (cls == PixelClass::Footprint) {
          dst[0] = kRigGlyphColor.r;
          dst[1] = kRigGlyphColor.g;
          dst[2] = kRigGlyphColor.b;
          continue;
        }
        if (cls != PixelClass::Covered) continue;
        float acc[3] = {0.0f, 0.0f, 0.0f};
        for (const SampleTap& tap : maps.taps_at(col, row)) {
          if (tap.weight <= 0.0f) continue;
          const Image& src = frames[tap.camera];
          // Taps lie inside the image circle, so truncation is floor here.
          const int x0 = std::min(static_cast<int>(std::max(tap.x, 0.0f)), src.width() - 2);
          const int y0 = std::min(static_cast<int>(std::max(tap.y, 0.0f)), src.height() - 2);
          const float fx = std::clamp(tap.x - static_cast<float>(x0), 0.0f, 1.0f);
          const float fy = std::clamp(tap.y - static_cast<float>(y0), 0.0f, 1.0f);
          const std::uint8_t* r0 = src.row(y0) + x0 * 3;
          const std::uint8_t* r1 = src.row(y0 + 1) + x0 * 3;
          const float w00 = (1 - fx) * (1 - fy) * tap.weight;
          const float w10 = fx * (1 - fy) * tap.weight;
          const float w01 = (1 - fx) * fy * tap.weight;
          const float w11 = fx * fy * tap.weight;
          for (int ch = 0; ch < 3; ++ch) {
            acc[ch] += w00 * r0[ch] + w10 * r0[ch + 3] + w01 * r1[ch] + w11 * r1[ch + 3];
          }
        }
        for (int ch = 0; ch < 3; ++ch) {
          dst[ch] = static_cast<std::uint8_t>(std::min(acc[ch] + 0.5f, 255.0f));
        }
      }
    }
  });
  return out;
}

CoverageReport coverage_report(const LookupMaps& maps) {
  CoverageReport report;
  report.camera_area_m2.assign(maps.camera_sizes.size(), 0.0);
  const double pixel_area = 1.0 / (maps.spec.scale_px_per_m * maps.spec.scale_px_per_m);
  double nearest_blind = maps.spec.extent_m;
  for (int row = 0; row < maps.side_px; ++row) {
    for (int col = 0; col < maps.side_px; ++col) {
      switch (maps.class_at(col, row)) {
        case PixelClass::Footprint:
          ++report.footprint_pixels;
          break;
        case PixelClass::Blind:
          ++report.blind_pixels;
          nearest_blind = std::min(nearest_blind, maps.spec.pixel_to_ground({col, row}).norm());
          break;
        case PixelClass::Covered:
          ++report.covered_pixels;
          for (const auto& tap : maps.taps_at(col, row)) {
            if (tap.weight > 0.0f) report.camera_area_m2[tap.camera] += tap.weight * pixel_area;
          }
          break;
      }
    }
  }
  report.max_covered_radius_m = nearest_blind;
  return report;
}

namespace {

constexpr char kCacheMagic[8] = {'A', 'V', 'M', 'M', 'A', 'P', 'S', '\0'};
constexpr std::uint32_t kCacheVersion = 1;
constexpr std::uint32_t kByteOrderMark = 0x01020304;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("map cache: truncated file");
  return v;
}

}  // namespace

std::uint64_t maps_cache_key(std::span<const CameraModel> cameras, const RigBody& body, const RigAttitude& attitude,
                             const MosaicSpec& spec) {
  nlohmann::json j;
  for (const auto& cam : cameras) {
    const auto& m = cam.mount;
    j["cameras"].push_back({{"azimuth", camgeom::to_string(m.azimuth)},
                            {"h", m.height_m},
                            {"alpha", m.alpha_deg},
                            {"beta", m.beta_deg},
                            {"position", {m.position_m.x(), m.position_m.y(), m.position_m.z()}},
                            {"fov", cam.lens.fov_deg},
                            {"resolution", {cam.lens.width_px, cam.lens.height_px}},
                            {"circle", cam.image_circle_radius_px}});
  }
  j["body"] = {body.width_m, body.depth_m, body.height_m};
  j["attitude"] = {attitude.roll_deg, attitude.pitch_deg, attitude.yaw_deg};
  j["mosaic"] = {spec.extent_m, spec.scale_px_per_m};
  j["feather"] = kFeatherBandDeg;
  return fnv1a64(j.dump());
}

void save_maps(const std::filesystem::path& path, const LookupMaps& maps, std::uint64_t key) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("map cache: cannot write " + path.string());
  out.write(kCacheMagic, sizeof kCacheMagic);
  put(out, kCacheVersion);
  put(out, kByteOrderMark);
  put(out, key);
  put(out, maps.spec.extent_m);
  put(out, maps.spec.scale_px_per_m);
  put(out, static_cast<std::int32_t>(maps.side_px));
  put(out, static_cast<std::uint32_t>(maps.camera_sizes.size()));
  for (const auto& [w, h] : maps.camera_sizes) {
    put(out, static_cast<std::int32_t>(w));
    put(out, static_cast<std::int32_t>(h));
  }
  out.write(reinterpret_cast<const char*>(maps.classes.data()), static_cast<std::streamsize>(maps.classes.size()));
  for (const auto& tap : maps.taps) {
    put(out, tap.camera);
    put(out, tap.x);
    put(out, tap.y);
    put(out, tap.weight);
  }
}

std::optional<LookupMaps> load_maps(const std::filesystem::path& path, std::uint64_t key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[sizeof kCacheMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) throw std::runtime_error("map cache: bad magic");
  if (get<std::uint32_t>(in) != kCacheVersion) return std::nullopt;
  if (get<std::uint32_t>(in) != kByteOrderMark) return std::nullopt;
  if (get<std::uint64_t>(in) != key) return std::nullopt;

  LookupMaps maps;
  maps.spec.extent_m = get<double>(in);
  maps.spec.scale_px_per_m = get<double>(in);
  maps.side_px = get<std::int32_t>(in);
  if (maps.side_px != maps.spec.side_px()) throw std::runtime_error("map cache: inconsistent header");
  const auto cams = get<std::uint32_t>(in);
  if (cams > 255) throw std::runtime_error("map cache: inconsistent header");
  for (std::uint32_t c = 0; c < cams; ++c) {
    const int w = get<std::int32_t>(in);
    const int h = get<std::int32_t>(in);
    maps.camera_sizes.emplace_back(w, h);
  }
  const std::size_t count = static_cast<std::size_t>(maps.side_px) * maps.side_px;
  maps.classes.resize(count);
  in.read(reinterpret_cast<char*>(maps.classes.data()), static_cast<std::streamsize>(count));
  if (!in) throw std::runtime_error("map cache: truncated file");
  maps.taps.resize(count * LookupMaps::kMaxTaps);
  for (auto& tap : maps.taps) {
    tap.camera = get<std::uint8_t>(in);
    tap.x = get<float>(in);
    tap.y = get<float>(in);
    tap.weight = get<float>(in);
  }
  return maps;
}

}  // namespace avm::projection

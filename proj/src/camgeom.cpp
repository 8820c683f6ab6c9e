#include "avm/camgeom.hpp"

#include <cmath>
#include <fmt/format.h>
#include <sstream>

#include "avm/errors.hpp"
#include "avm/units.hpp"

namespace avm::camgeom {

std::string_view to_string(Azimuth azimuth) {
  switch (azimuth) {
    case Azimuth::Front: return "front";
    case Azimuth::Right: return "right";
    case Azimuth::Rear: return "rear";
    case Azimuth::Left: return "left";
  }
  return "front";
}

Azimuth azimuth_from_string(std::string_view name) {
  if (name == "front") return Azimuth::Front;
  if (name == "right") return Azimuth::Right;
  if (name == "rear") return Azimuth::Rear;
  if (name == "left") return Azimuth::Left;
  throw ConfigError("unknown camera azimuth '" + std::string(name) + "'");
}

double azimuth_heading_deg(Azimuth azimuth) {
  switch (azimuth) {
    case Azimuth::Right: return 0.0;
    case Azimuth::Front: return 90.0;
    case Azimuth::Left: return 180.0;
    case Azimuth::Rear: return 270.0;
  }
  return 90.0;
}

void validate(const CameraMount& mount) {
  if (!(mount.height_m > 0.0)) throw ConfigError("camera '" + mount.name + "': h must be > 0");
  if (!(mount.distance_m > 0.0)) throw ConfigError("camera '" + mount.name + "': D must be > 0");
  if (!(mount.alpha_deg > 0.0 && mount.alpha_deg <= 90.0))
    throw ConfigError("camera '" + mount.name + "': alpha must lie in (0, 90]");
  if (!(mount.beta_deg >= 0.0 && mount.beta_deg < 90.0))
    throw ConfigError("camera '" + mount.name + "': beta must lie in [0, 90)");
  if (std::abs(mount.position_m.z() - mount.height_m) > 1e-9)
    throw ConfigError("camera '" + mount.name + "': position z must equal h");
}

double LensSpec::k_over_f() const {
  if (sensor_size && focal_length) return *sensor_size / *focal_length;
  return 2.0 * std::tan(deg2rad(fov_deg) / 2.0);
}

void validate(const LensSpec& lens) {
  if (!(lens.fov_deg > 0.0 && lens.fov_deg < 180.0)) throw ConfigError("lens fov must lie in (0, 180)");
  if (lens.width_px < 2 || lens.height_px < 2) throw ConfigError("lens resolution must be at least 2x2");
  if (lens.sensor_size.has_value() != lens.focal_length.has_value())
    throw ConfigError("lens K and f must be given together");
  if (lens.sensor_size) {
    if (!(*lens.sensor_size > 0.0 && *lens.focal_length > 0.0)) throw ConfigError("lens K and f must be > 0");
    const double implied = rad2deg(2.0 * std::atan(*lens.sensor_size / (2.0 * *lens.focal_length)));
    if (std::abs(implied - lens.fov_deg) > 0.05)
      throw ConfigError(fmt::format("lens K/f implies {:.2f} deg but fov is {:.2f} deg", implied, lens.fov_deg));
  }
}

ImageRange image_range(const DisplayRange& display, const CameraMount& mount) {
  const double alpha = deg2rad(mount.alpha_deg);
  const double beta = deg2rad(mount.beta_deg);
  const double sin_alpha = std::sin(alpha);
  if (!(mount.alpha_deg > 0.0) || sin_alpha <= 0.0) throw DomainError("image_range: alpha must be > 0");
  if (mount.alpha_deg > 90.0) throw DomainError("image_range: alpha must be <= 90");
  return {
      display.width_m * std::cos(beta) + display.depth_m * std::sin(beta),
      (display.width_m * std::sin(beta) + display.depth_m * std::cos(beta)) / sin_alpha,
  };
}

double fov_from_image_range(const ImageRange& range, double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("fov_from_image_range: D must be > 0");
  return rad2deg(2.0 * std::atan(std::hypot(range.width_m, range.depth_m) / (2.0 * distance_m)));
}

double min_k_over_f(const DisplayRange& display, const CameraMount& mount) {
  const double fov = fov_from_image_range(image_range(display, mount), mount.distance_m);
  return 2.0 * std::tan(deg2rad(fov) / 2.0);
}

bool lens_satisfies(const LensSpec& lens, double required_ratio) { return lens.k_over_f() > required_ratio; }

PlanningReport planning_report(const std::vector<PlannedCamera>& cameras, const LensSpec& lens) {
  PlanningReport report;
  report.lens_fov_deg = lens.fov_deg;
  report.rows.reserve(cameras.size());
  for (const auto& cam : cameras) {
    PlanningRow row;
    row.camera = cam.mount.name;
    row.image = image_range(cam.display, cam.mount);
    row.required_fov_deg = fov_from_image_range(row.image, cam.mount.distance_m);
    row.min_k_over_f = 2.0 * std::tan(deg2rad(row.required_fov_deg) / 2.0);
    row.lens_k_over_f = lens.k_over_f();
    row.pass = lens_satisfies(lens, row.min_k_over_f);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string to_text_table(const PlanningReport& report) {
  std::ostringstream out;
  out << fmt::format("{:<10} {:>8} {:>8} {:>10} {:>9} {:>9} {:>6}\n", "camera", "W_I(m)", "H_I(m)", "FOV(deg)",
                     "min K/f", "lens K/f", "pass");
  for (const auto& row : report.rows) {
    out << fmt::format("{:<10} {:>8.2f} {:>8.2f} {:>10.1f} {:>9.2f} {:>9.2f} {:>6}\n", row.camera,
                       row.image.width_m, row.image.depth_m, row.required_fov_deg, row.min_k_over_f,
                       row.lens_k_over_f, row.pass ? "yes" : "no");
  }
  return out.str();
}

}  // namespace avm::camgeom

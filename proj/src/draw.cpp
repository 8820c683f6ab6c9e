#include "avm/draw.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace avm::draw {

namespace {

void plot(Image& img, int x, int y, Rgb c) {
  if (img.contains(x, y)) img.set(x, y, c);
}

void dot(Image& img, double x, double y, Rgb c, int thickness) {
  const int r = thickness / 2;
  const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) plot(img, cx + dx, cy + dy, c);
}

struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;
};

constexpr std::array<Glyph, 16> kFont{{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x11, 0x11}},
}};

}  // namespace

void line(Image& img, const Eigen::Vector2d& a, const Eigen::Vector2d& b, Rgb color, int thickness) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  for (int i = 0; i <= steps; ++i) {
    const Eigen::Vector2d p = a + (b - a) * (static_cast<double>(i) / steps);
    dot(img, p.x(), p.y(), color, thickness);
  }
}

void circle(Image& img, const Eigen::Vector2d& center, double radius, Rgb color, int thickness) {
  const int steps = std::max(16, static_cast<int>(std::ceil(2.0 * 3.14159265358979 * radius * 2.0)));
  for (int i = 0; i < steps; ++i) {
    const double a = 2.0 * 3.14159265358979 * i / steps;
    dot(img, center.x() + radius * std::cos(a), center.y() + radius * std::sin(a), color, thickness);
  }
}

void fill_rect(Image& img, int x, int y, int w, int h, Rgb color) {
  for (int yy = std::max(0, y); yy < std::min(img.height(), y + h); ++yy)
    for (int xx = std::max(0, x); xx < std::min(img.width(), x + w); ++xx) img.set(xx, yy, color);
}

void text(Image& img, int x, int y, std::string_view s, Rgb color, int scale) {
  for (char ch : s) {
    const auto it = std::find_if(kFont.begin(), kFont.end(), [ch](const Glyph& g) { return g.ch == ch; });
    if (it != kFont.end()) {
      for (int row = 0; row < 7; ++row) {
        for (int col = 0; col < 5; ++col) {
          if (it->rows[row] & (0x10 >> col)) fill_rect(img, x + col * scale, y + row * scale, scale, scale, color);
        }
      }
    }
    x += 6 * scale;
  }
}

void working_overlay(Image& mosaic, const kinematics::OverlayRecord& overlay, const kinematics::PoseSolution& pose,
                     const kinematics::LinkGeometry& links, const calibration::RigAttitude& attitude,
                     const projection::MosaicSpec& spec) {
  const Eigen::Matrix3d rig_to_world = calibration::attitude_rotation(attitude);
  auto to_px = [&](const Eigen::Vector3d& rig) {
    return spec.ground_to_pixel((rig_to_world * rig).head<2>());
  };

  // Top view.
  const Rgb colors[3] = {kBoomColor, kArmColor, kBucketColor};
  circle(mosaic, to_px(Eigen::Vector3d::Zero()), std::abs(overlay.radius_m) * spec.scale_px_per_m, kRadiusColor, 2);
  for (std::size_t i = 0; i < overlay.segments.size(); ++i) {
    line(mosaic, to_px(overlay.segments[i].from), to_px(overlay.segments[i].to), colors[i], 5 - static_cast<int>(i));
  }

  // Elevation inset, top-left.
  constexpr int kPanelX = 8, kPanelY = 8, kPanelW = 220, kPanelH = 190;
  constexpr double kInsetScale = 18.0;  // px per metre
  fill_rect(mosaic, kPanelX, kPanelY, kPanelW, kPanelH, {25, 30, 40});
  const double ground_y = kPanelY + kPanelH - 58;
  line(mosaic, {kPanelX + 4.0, ground_y}, {kPanelX + kPanelW - 4.0, ground_y}, {140, 110, 70}, 1);
  auto inset = [&](const Eigen::Vector2d& plane) {
    const Eigen::Vector3d rig = kinematics::boom_plane_to_rig(links, plane);
    Eigen::Vector2d p{kPanelX + 12.0 + rig.y() * kInsetScale, ground_y - rig.z() * kInsetScale};
    p.x() = std::clamp(p.x(), kPanelX + 1.0, kPanelX + kPanelW - 2.0);
    p.y() = std::clamp(p.y(), kPanelY + 1.0, kPanelY + kPanelH - 2.0);
    return p;
  };
  const Eigen::Vector2d pts[4] = {inset(Eigen::Vector2d::Zero()), inset(pose.boom_tip), inset(pose.arm_tip),
                                  inset(pose.bucket_tip)};
  for (int i = 0; i < 3; ++i) line(mosaic, pts[i], pts[i + 1], colors[i], 3);

  const Rgb d_color = overlay.ground_distance_readout_m < 0 ? kBelowGradeColor : Rgb{235, 235, 235};
  text(mosaic, kPanelX + 8, kPanelY + kPanelH - 48, fmt::format("D {:.2f}m", overlay.ground_distance_readout_m),
       d_color, 2);
  text(mosaic, kPanelX + 8, kPanelY + kPanelH - 24, fmt::format("R {:.2f}m", overlay.radius_readout_m), kRadiusColor,
       2);
}

}  // namespace avm::draw

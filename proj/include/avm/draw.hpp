#pragma once

// Raster drawing for the working-information overlay.

#include <Eigen/Core>

#include <string_view>

#include "avm/attitude.hpp"
#include "avm/image.hpp"
#include "avm/kinematics.hpp"
#include "avm/projection.hpp"

namespace avm::draw {

void line(Image& img, const Eigen::Vector2d& a, const Eigen::Vector2d& b, Rgb color, int thickness = 1);
void circle(Image& img, const Eigen::Vector2d& center, double radius, Rgb color, int thickness = 1);
void fill_rect(Image& img, int x, int y, int w, int h, Rgb color);
/// 5x7 bitmap text; supports digits, space, '.', '-', ':', 'D', 'R', 'm'.
void text(Image& img, int x, int y, std::string_view s, Rgb color, int scale = 1);

inline constexpr Rgb kBoomColor{250, 210, 40};
inline constexpr Rgb kArmColor{250, 150, 30};
inline constexpr Rgb kBucketColor{230, 60, 60};
inline constexpr Rgb kRadiusColor{40, 200, 230};
inline constexpr Rgb kBelowGradeColor{255, 80, 80};

/// Boom/arm/bucket projected onto the top view, the bucket's rotation circle
/// about the slew axis, and an elevation inset with the D and R readouts.
/// `attitude` is the one the mosaic's maps were built for.
void working_overlay(Image& mosaic, const kinematics::OverlayRecord& overlay, const kinematics::PoseSolution& pose,
                     const kinematics::LinkGeometry& links, const calibration::RigAttitude& attitude,
                     const projection::MosaicSpec& spec);

}  // namespace avm::draw

#pragma once

// JSON rig / scene / profile files and JSON views of the main records.

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "avm/camgeom.hpp"
#include "avm/kinematics.hpp"
#include "avm/projection.hpp"
#include "avm/scene.hpp"
#include "avm/telemetry.hpp"

namespace avm {

struct RigConfig {
  std::vector<camgeom::PlannedCamera> cameras;
  camgeom::LensSpec lens;
  std::optional<double> image_circle_radius_px;
  projection::RigBody body;
  kinematics::LinkGeometry links;
  kinematics::JointLimits limits;
  projection::MosaicSpec mosaic;

  std::vector<projection::CameraModel> camera_models() const;
};

/// The four-camera rig of the reference machine (2.5 x 3.5 x 2.2 m body,
/// 148 deg lenses at 1600 x 1200).
RigConfig reference_rig();

// All loaders throw ConfigError with the offending field in the message.
RigConfig rig_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RigConfig& rig);
RigConfig load_rig_config(const std::filesystem::path& path);

scene::Scene scene_from_json(const nlohmann::json& j);
nlohmann::json to_json(const scene::Scene& scene);
scene::Scene load_scene(const std::filesystem::path& path);

scene::MotionProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const scene::MotionProfile& profile);
scene::MotionProfile load_profile(const std::filesystem::path& path);

nlohmann::json to_json(const camgeom::PlanningReport& report);
nlohmann::json to_json(const kinematics::JointState& joints);
nlohmann::json to_json(const kinematics::PoseSolution& pose);
nlohmann::json to_json(const kinematics::OverlayRecord& overlay);
nlohmann::json to_json(const calibration::RigAttitude& attitude);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace avm

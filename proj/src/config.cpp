#include "avm/config.hpp"

#include <fstream>

#include "avm/errors.hpp"

namespace avm {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

Rgb rgb_from_json(const json& j, const char* key, Rgb fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = field<std::vector<int>>(j, key);
  if (v.size() != 3) throw ConfigError(std::string("field '") + key + "' must be [r, g, b]");
  for (int c : v) {
    if (c < 0 || c > 255) throw ConfigError(std::string("field '") + key + "' channel out of range");
  }
  return {static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]), static_cast<std::uint8_t>(v[2])};
}

json rgb_to_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

Eigen::Vector2d vec2_from_json(const json& j, const char* key) {
  const auto v = field<std::vector<double>>(j, key);
  if (v.size() != 2) throw ConfigError(std::string("field '") + key + "' must be [x, y]");
  return {v[0], v[1]};
}

kinematics::AngleRange range_from_json(const json& j, const char* key, kinematics::AngleRange fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = field<std::vector<double>>(j, key);
  if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(std::string("field '") + key + "' must be [min, max]");
  return {v[0], v[1]};
}

scene::Timeline timeline_from_json(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (v.is_number()) return scene::Timeline::constant(v.get<double>());
  std::vector<scene::Keyframe> keys;
  try {
    for (const auto& pair : v) {
      if (pair.size() != 2) throw ConfigError(std::string("timeline '") + key + "' entries must be [t_s, value]");
      keys.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("timeline '") + key + "': " + e.what());
  }
  return scene::Timeline(std::move(keys));
}

json timeline_to_json(const scene::Timeline& tl) {
  json out = json::array();
  for (const auto& k : tl.keys()) out.push_back({k.t_s, k.value});
  return out;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<projection::CameraModel> RigConfig::camera_models() const {
  std::vector<projection::CameraModel> models;
  for (const auto& cam : cameras) models.push_back(projection::make_camera_model(cam.mount, lens, image_circle_radius_px));
  return models;
}

RigConfig reference_rig() {
  using camgeom::Azimuth;
  RigConfig rig;
  rig.lens.fov_deg = 148.0;
  rig.lens.width_px = 1600;
  rig.lens.height_px = 1200;
  rig.body = {2.5, 3.5, 2.2};
  auto add = [&](const char* name, Azimuth az, double h, double alpha, double beta, double wd, double hd, double d,
                 double x, double y) {
    camgeom::PlannedCamera cam;
    cam.mount = {name, h, alpha, beta, d, az, Eigen::Vector3d{x, y, h}};
    cam.display = {wd, hd};
    rig.cameras.push_back(cam);
  };
  add("front", Azimuth::Front, 1.50, 24.40, 10.80, 9.80, 6.50, 3.63, 0.0, 1.75);
  add("right", Azimuth::Right, 2.20, 33.90, 0.00, 15.60, 6.55, 3.94, 1.25, 0.0);
  add("rear", Azimuth::Rear, 2.20, 37.90, 0.00, 9.80, 5.65, 3.58, 0.0, -1.75);
  add("left", Azimuth::Left, 2.20, 33.90, 0.00, 15.60, 6.55, 3.94, -1.25, 0.0);
  rig.links = {4.6, 2.5, 1.0, 1.2, 0.0};
  return rig;
}

RigConfig rig_config_from_json(const json& j) {
  try {
    RigConfig rig;
    const json& lens = j.at("lens");
    rig.lens.fov_deg = field<double>(lens, "fov_deg");
    const auto res = field<std::vector<int>>(lens, "resolution");
    if (res.size() != 2) throw ConfigError("lens.resolution must be [width, height]");
    rig.lens.width_px = res[0];
    rig.lens.height_px = res[1];
    if (lens.contains("sensor_size") && !lens["sensor_size"].is_null()) rig.lens.sensor_size = field<double>(lens, "sensor_size");
    if (lens.contains("focal_length") && !lens["focal_length"].is_null()) rig.lens.focal_length = field<double>(lens, "focal_length");
    if (lens.contains("image_circle_radius_px") && !lens["image_circle_radius_px"].is_null())
      rig.image_circle_radius_px = field<double>(lens, "image_circle_radius_px");
    camgeom::validate(rig.lens);

    if (j.contains("body")) {
      const json& b = j["body"];
      rig.body = {field<double>(b, "width_m"), field<double>(b, "depth_m"), field<double>(b, "height_m")};
    }
    for (const json& c : j.at("cameras")) {
      camgeom::PlannedCamera cam;
      cam.mount.name = field<std::string>(c, "name");
      cam.mount.azimuth = camgeom::azimuth_from_string(field<std::string>(c, "azimuth"));
      cam.mount.height_m = field<double>(c, "h_m");
      cam.mount.alpha_deg = field<double>(c, "alpha_deg");
      cam.mount.beta_deg = field_or<double>(c, "beta_deg", 0.0);
      cam.mount.distance_m = field<double>(c, "D_m");
      const auto pos = field<std::vector<double>>(c, "position_m");
      if (pos.size() != 2 && pos.size() != 3) throw ConfigError("camera position_m must be [x, y] or [x, y, z]");
      cam.mount.position_m = {pos[0], pos[1], pos.size() == 3 ? pos[2] : cam.mount.height_m};
      const json& dr = c.at("display_range");
      cam.display = {field<double>(dr, "W_D_m"), field<double>(dr, "H_D_m")};
      if (!(cam.display.width_m > 0 && cam.display.depth_m > 0)) throw ConfigError("display range must be > 0");
      camgeom::validate(cam.mount);
      rig.cameras.push_back(std::move(cam));
    }
    if (j.contains("links")) {
      const json& l = j["links"];
      rig.links = {field<double>(l, "boom_m"), field<double>(l, "arm_m"), field<double>(l, "bucket_m"),
                   field<double>(l, "pivot_height_m"), field_or<double>(l, "slew_offset_m", 0.0)};
      kinematics::validate(rig.links);
    }
    if (j.contains("joint_limits")) {
      const json& l = j["joint_limits"];
      rig.limits.boom = range_from_json(l, "boom_deg", rig.limits.boom);
      rig.limits.arm = range_from_json(l, "arm_deg", rig.limits.arm);
      rig.limits.bucket = range_from_json(l, "bucket_deg", rig.limits.bucket);
    }
    if (j.contains("mosaic")) {
      rig.mosaic.extent_m = field_or<double>(j["mosaic"], "extent_m", 8.0);
      rig.mosaic.scale_px_per_m = field_or<double>(j["mosaic"], "scale_px_per_m", 50.0);
    }
    projection::validate(rig.mosaic);
    return rig;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("rig config: ") + e.what());
  }
}

json to_json(const RigConfig& rig) {
  json j;
  j["version"] = 1;
  j["lens"] = {{"fov_deg", rig.lens.fov_deg},
               {"resolution", {rig.lens.width_px, rig.lens.height_px}},
               {"sensor_size", rig.lens.sensor_size ? json(*rig.lens.sensor_size) : json(nullptr)},
               {"focal_length", rig.lens.focal_length ? json(*rig.lens.focal_length) : json(nullptr)},
               {"image_circle_radius_px", rig.image_circle_radius_px ? json(*rig.image_circle_radius_px) : json(nullptr)}};
  j["body"] = {{"width_m", rig.body.width_m}, {"depth_m", rig.body.depth_m}, {"height_m", rig.body.height_m}};
  j["cameras"] = json::array();
  for (const auto& c : rig.cameras) {
    const auto& m = c.mount;
    j["cameras"].push_back({{"name", m.name},
                            {"azimuth", camgeom::to_string(m.azimuth)},
                            {"h_m", m.height_m},
                            {"alpha_deg", m.alpha_deg},
                            {"beta_deg", m.beta_deg},
                            {"D_m", m.distance_m},
                            {"position_m", {m.position_m.x(), m.position_m.y(), m.position_m.z()}},
                            {"display_range", {{"W_D_m", c.display.width_m}, {"H_D_m", c.display.depth_m}}}});
  }
  j["links"] = {{"boom_m", rig.links.boom_length_m},     {"arm_m", rig.links.arm_length_m},
                {"bucket_m", rig.links.bucket_length_m}, {"pivot_height_m", rig.links.pivot_height_m},
                {"slew_offset_m", rig.links.slew_offset_m}};
  j["joint_limits"] = {{"boom_deg", {rig.limits.boom.min_deg, rig.limits.boom.max_deg}},
                       {"arm_deg", {rig.limits.arm.min_deg, rig.limits.arm.max_deg}},
                       {"bucket_deg", {rig.limits.bucket.min_deg, rig.limits.bucket.max_deg}}};
  j["mosaic"] = {{"extent_m", rig.mosaic.extent_m}, {"scale_px_per_m", rig.mosaic.scale_px_per_m}};
  return j;
}

RigConfig load_rig_config(const std::filesystem::path& path) { return rig_config_from_json(read_json_file(path)); }

scene::Scene scene_from_json(const json& j) {
  try {
    scene::Scene s;
    s.checker_pitch_m = field_or<double>(j, "checker_pitch_m", s.checker_pitch_m);
    s.light = rgb_from_json(j, "light", s.light);
    s.dark = rgb_from_json(j, "dark", s.dark);
    s.sky = rgb_from_json(j, "sky", s.sky);
    if (j.contains("markers")) {
      for (const json& m : j["markers"]) {
        s.markers.push_back({field<int>(m, "id"), vec2_from_json(m, "position_m"), field_or<double>(m, "radius_m", scene::kDefaultMarkerRadius)});
      }
    }
    if (j.contains("props")) {
      for (const json& p : j["props"]) {
        scene::Prop prop;
        const auto shape = field<std::string>(p, "shape");
        if (shape == "box") {
          prop.shape = scene::Prop::Shape::Box;
          prop.size_m = vec2_from_json(p, "size_m");
        } else if (shape == "cylinder") {
          prop.shape = scene::Prop::Shape::Cylinder;
          prop.radius_m = field<double>(p, "radius_m");
        } else {
          throw ConfigError("unknown prop shape '" + shape + "'");
        }
        prop.center_m = vec2_from_json(p, "center_m");
        prop.height_m = field<double>(p, "height_m");
        prop.color = rgb_from_json(p, "color", prop.color);
        s.props.push_back(prop);
      }
    }
    scene::validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

json to_json(const scene::Scene& s) {
  json j;
  j["checker_pitch_m"] = s.checker_pitch_m;
  j["light"] = rgb_to_json(s.light);
  j["dark"] = rgb_to_json(s.dark);
  j["sky"] = rgb_to_json(s.sky);
  j["markers"] = json::array();
  for (const auto& m : s.markers)
    j["markers"].push_back({{"id", m.id}, {"position_m", {m.position_m.x(), m.position_m.y()}}, {"radius_m", m.radius_m}});
  j["props"] = json::array();
  for (const auto& p : s.props) {
    json pj = {{"center_m", {p.center_m.x(), p.center_m.y()}}, {"height_m", p.height_m}, {"color", rgb_to_json(p.color)}};
    if (p.shape == scene::Prop::Shape::Box) {
      pj["shape"] = "box";
      pj["size_m"] = {p.size_m.x(), p.size_m.y()};
    } else {
      pj["shape"] = "cylinder";
      pj["radius_m"] = p.radius_m;
    }
    j["props"].push_back(pj);
  }
  return j;
}

scene::Scene load_scene(const std::filesystem::path& path) { return scene_from_json(read_json_file(path)); }

scene::MotionProfile profile_from_json(const json& j) {
  try {
    scene::MotionProfile p;
    p.duration_s = field_or<double>(j, "duration_s", p.duration_s);
    p.cadence_ms = field_or<int>(j, "cadence_ms", p.cadence_ms);
    const json tl = j.contains("timelines") ? j["timelines"] : json::object();
    p.boom = timeline_from_json(tl, "boom_deg");
    p.arm = timeline_from_json(tl, "arm_deg");
    p.bucket = timeline_from_json(tl, "bucket_deg");
    p.roll = timeline_from_json(tl, "roll_deg");
    p.pitch = timeline_from_json(tl, "pitch_deg");
    p.yaw = timeline_from_json(tl, "yaw_deg");
    scene::validate(p);
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
}

json to_json(const scene::MotionProfile& p) {
  return {{"duration_s", p.duration_s},
          {"cadence_ms", p.cadence_ms},
          {"timelines",
           {{"boom_deg", timeline_to_json(p.boom)},
            {"arm_deg", timeline_to_json(p.arm)},
            {"bucket_deg", timeline_to_json(p.bucket)},
            {"roll_deg", timeline_to_json(p.roll)},
            {"pitch_deg", timeline_to_json(p.pitch)},
            {"yaw_deg", timeline_to_json(p.yaw)}}}};
}

scene::MotionProfile load_profile(const std::filesystem::path& path) { return profile_from_json(read_json_file(path)); }

json to_json(const camgeom::PlanningReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"camera", r.camera},
                    {"W_I_m", r.image.width_m},
                    {"H_I_m", r.image.depth_m},
                    {"required_fov_deg", r.required_fov_deg},
                    {"min_k_over_f", r.min_k_over_f},
                    {"lens_k_over_f", r.lens_k_over_f},
                    {"pass", r.pass}});
  }
  return {{"lens_fov_deg", report.lens_fov_deg}, {"cameras", rows}};
}

json to_json(const kinematics::JointState& joints) {
  return {{"theta_bm_deg", joints.boom_deg},
          {"theta_arm_deg", joints.arm_deg},
          {"theta_bkt_deg", joints.bucket_deg},
          {"timestamp_ms", joints.timestamp_ms}};
}

json to_json(const kinematics::PoseSolution& pose) {
  auto pt = [](const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); };
  return {{"A", pt(pose.boom_tip)},
          {"B", pt(pose.arm_tip)},
          {"C", pt(pose.bucket_tip)},
          {"D_ground_m", pose.ground_distance_m},
          {"radius_m", pose.radius_m}};
}

json to_json(const kinematics::OverlayRecord& overlay) {
  auto pt = [](const Eigen::Vector3d& p) { return json::array({p.x(), p.y(), p.z()}); };
  json segs = json::array();
  const char* names[] = {"boom", "arm", "bucket"};
  for (std::size_t i = 0; i < overlay.segments.size(); ++i) {
    segs.push_back({{"link", names[i]}, {"from", pt(overlay.segments[i].from)}, {"to", pt(overlay.segments[i].to)}});
  }
  return {{"segments", segs},
          {"radius_circle", {{"center", {0.0, 0.0, 0.0}}, {"radius_m", overlay.radius_m}}},
          {"readouts", {{"D_ground_m", overlay.ground_distance_readout_m}, {"radius_m", overlay.radius_readout_m}}}};
}

json to_json(const calibration::RigAttitude& att) {
  return {{"roll_deg", att.roll_deg}, {"pitch_deg", att.pitch_deg}, {"yaw_deg", att.yaw_deg}, {"timestamp_ms", att.timestamp_ms}};
}

}  // namespace avm

// Python bindings. Structured values cross the boundary as JSON text; the
// package wrapper converts them to and from dicts. Images are (H, W, 3) uint8.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "avm/calibration.hpp"
#include "avm/config.hpp"
#include "avm/draw.hpp"
#include "avm/errors.hpp"
#include "avm/pipeline.hpp"
#include "avm/protocol.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Array to_numpy(const avm::Image& img) {
  Array out({img.height(), img.width(), 3});
  std::memcpy(out.mutable_data(), img.bytes().data(), img.bytes().size());
  return out;
}

avm::Image from_numpy(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw avm::ValidationError("expected an (H, W, 3) uint8 array");
  avm::Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.bytes().data(), a.data(), img.bytes().size());
  return img;
}

avm::RigConfig rig_or_default(const std::string& text) {
  return text.empty() ? avm::reference_rig() : avm::rig_config_from_json(json::parse(text));
}
avm::scene::Scene scene_or_default(const std::string& text) {
  return text.empty() ? avm::scene::default_scene() : avm::scene_from_json(json::parse(text));
}
avm::scene::MotionProfile profile_or_default(const std::string& text) {
  return text.empty() ? avm::scene::default_profile() : avm::profile_from_json(json::parse(text));
}

avm::calibration::RigAttitude attitude(double roll, double pitch, double yaw) { return {roll, pitch, yaw, 0}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Excavator around-view monitoring core";

  py::register_exception<avm::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<avm::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<avm::RangeError>(m, "RangeError", PyExc_ValueError);
  py::register_exception<avm::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<avm::service::UnknownCommandError>(m, "UnknownCommandError", PyExc_KeyError);

  m.def("reference_rig", [] { return avm::to_json(avm::reference_rig()).dump(); });
  m.def("default_scene", [] { return avm::to_json(avm::scene::default_scene()).dump(); });
  m.def("checkerboard_scene", [] { return avm::to_json(avm::scene::checkerboard_scene()).dump(); });
  m.def("default_profile", [] { return avm::to_json(avm::scene::default_profile()).dump(); });

  m.def("plan", [](const std::string& rig) {
    const auto cfg = rig_or_default(rig);
    return avm::to_json(avm::camgeom::planning_report(cfg.cameras, cfg.lens)).dump();
  });

  m.def("forward_kinematics", [](double boom, double arm, double bucket, const std::string& rig) {
    const auto cfg = rig_or_default(rig);
    const auto pose = avm::kinematics::forward_kinematics(cfg.links, {boom, arm, bucket, 0}, cfg.limits);
    json j = avm::to_json(pose);
    j["overlay"] = avm::to_json(avm::kinematics::overlay_payload(pose, cfg.links));
    return j.dump();
  });

  m.def(
      "render",
      [](const std::string& rig, const std::string& scene, double roll, double pitch, double yaw, int supersample) {
        const auto cfg = rig_or_default(rig);
        const auto cams = cfg.camera_models();
        std::vector<avm::Image> frames;
        {
          py::gil_scoped_release release;
          frames = avm::scene::render_rig(scene_or_default(scene), cams, attitude(roll, pitch, yaw), {supersample});
        }
        py::list out;
        for (const auto& f : frames) out.append(to_numpy(f));
        return out;
      },
      py::arg("rig") = "", py::arg("scene") = "", py::arg("roll") = 0.0, py::arg("pitch") = 0.0,
      py::arg("yaw") = 0.0, py::arg("supersample") = 1);

  m.def(
      "compose_topview",
      [](const std::vector<Array>& frames, const std::string& rig, double roll, double pitch, double yaw) {
        const auto cfg = rig_or_default(rig);
        const auto cams = cfg.camera_models();
        std::vector<avm::Image> imgs;
        for (const auto& f : frames) imgs.push_back(from_numpy(f));
        avm::Image mosaic;
        {
          py::gil_scoped_release release;
          const auto maps = avm::calibration::recalibrate(cams, cfg.body, attitude(roll, pitch, yaw), cfg.mosaic);
          mosaic = avm::projection::compose_topview(imgs, maps);
        }
        return to_numpy(mosaic);
      },
      py::arg("frames"), py::arg("rig") = "", py::arg("roll") = 0.0, py::arg("pitch") = 0.0, py::arg("yaw") = 0.0);

  m.def(
      "distortion",
      [](const Array& test, const Array& reference, const std::string& scene, const std::string& rig) {
        const auto cfg = rig_or_default(rig);
        const auto sc = scene_or_default(scene);
        const auto stats = avm::calibration::distortion_metric(from_numpy(test), from_numpy(reference),
                                                               sc.marker_refs(), cfg.mosaic);
        return json{{"mean_m", stats.mean_m}, {"max_m", stats.max_m}, {"missing", stats.missing}}.dump();
      },
      py::arg("test"), py::arg("reference"), py::arg("scene") = "", py::arg("rig") = "");

  m.def(
      "ground_truth",
      [](const std::string& scene, const std::string& rig, int supersample) {
        const auto cfg = rig_or_default(rig);
        return to_numpy(avm::scene::ground_truth(scene_or_default(scene), cfg.mosaic, supersample).image);
      },
      py::arg("scene") = "", py::arg("rig") = "", py::arg("supersample") = 4);

  py::class_<avm::service::Pipeline>(m, "Pipeline")
      .def(py::init([](const std::string& rig, const std::string& scene, const std::string& profile,
                       double target_fps, int supersample) {
             avm::service::PipelineOptions opts;
             opts.target_fps = target_fps;
             opts.render.supersample = supersample;
             return std::make_unique<avm::service::Pipeline>(rig_or_default(rig), scene_or_default(scene),
                                                             profile_or_default(profile), opts);
           }),
           py::arg("rig") = "", py::arg("scene") = "", py::arg("profile") = "", py::arg("target_fps") = 30.0,
           py::arg("supersample") = 1)
      .def("run_virtual",
           [](avm::service::Pipeline& p) {
             avm::service::PipelineStats s;
             {
               py::gil_scoped_release release;
               s = p.run_virtual();
             }
             return avm::protocol::to_json(s).dump();
           })
      .def("run_realtime",
           [](avm::service::Pipeline& p, double seconds) {
             avm::service::PipelineStats s;
             {
               py::gil_scoped_release release;
               s = p.run_realtime(std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0)));
             }
             return avm::protocol::to_json(s).dump();
           })
      .def("command",
           [](avm::service::Pipeline& p, const std::string& name, const std::string& args) {
             avm::service::Command cmd{name, args.empty() ? json::object() : json::parse(args)};
             return avm::protocol::to_json(p.handle_command(cmd)).dump();
           })
      .def("state", [](const avm::service::Pipeline& p) { return avm::protocol::to_json(p.view_state()).dump(); })
      .def("stats", [](const avm::service::Pipeline& p) { return avm::protocol::to_json(p.stats_report()).dump(); })
      .def("snapshot", [](const avm::service::Pipeline& p) {
        std::shared_ptr<const avm::service::PublishedFrame> f;
        {
          py::gil_scoped_release release;
          f = p.snapshot();
        }
        return to_numpy(*f->image);
      });
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "avm/config.hpp"
#include "avm/errors.hpp"
#include "avm/image.hpp"

using namespace avm;

namespace {

Image gradient(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(x * 7), static_cast<std::uint8_t>(y * 11),
                     static_cast<std::uint8_t>((x ^ y) & 0xff)});
  return img;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / (std::string("avm-test-") + name);
}

}  // namespace

TEST(Png, RoundTripIsLossless) {
  const auto img = gradient(37, 23);
  for (int level : {0, 1, 9}) {
    const auto bytes = encode_png(img, level);
    EXPECT_TRUE(decode_png(bytes) == img);
  }
  const auto path = temp_file("rt.png");
  write_png(path, img);
  EXPECT_TRUE(read_png(path) == img);
  std::filesystem::remove(path);
}

TEST(Png, RejectsGarbage) {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  EXPECT_ANY_THROW(decode_png(junk));
  EXPECT_ANY_THROW(read_png(temp_file("does-not-exist.png")));
}

TEST(Config, RigRoundTrip) {
  const auto rig = reference_rig();
  const auto back = rig_config_from_json(to_json(rig));
  EXPECT_EQ(to_json(back), to_json(rig));
  ASSERT_EQ(back.cameras.size(), 4u);
  const auto a = rig.camera_models();
  const auto b = back.camera_models();
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].mount.position_m.isApprox(b[i].mount.position_m));
    EXPECT_DOUBLE_EQ(a[i].focal_px(), b[i].focal_px());
  }
}

TEST(Config, SceneAndProfileRoundTrip) {
  const auto sc = scene::default_scene();
  EXPECT_EQ(to_json(scene_from_json(to_json(sc))), to_json(sc));
  const auto p = scene::default_profile();
  EXPECT_EQ(to_json(profile_from_json(to_json(p))), to_json(p));
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = AVM_CONFIG_DIR;
  EXPECT_NO_THROW(load_rig_config(dir / "rig_reference.json"));
  EXPECT_NO_THROW(load_scene(dir / "scene_default.json"));
  EXPECT_NO_THROW(load_scene(dir / "scene_checkerboard.json"));
  EXPECT_NO_THROW(load_profile(dir / "profile_default.json"));
}

TEST(Config, ErrorsNameTheField) {
  auto j = to_json(reference_rig());
  j["lens"].erase("fov_deg");
  try {
    rig_config_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("fov_deg"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_rig_config(temp_file("missing.json")), ConfigError);
  const auto bad = temp_file("bad.json");
  {
    std::ofstream(bad) << "{ not json";
  }
  EXPECT_THROW(load_scene(bad), ConfigError);
  std::filesystem::remove(bad);
}

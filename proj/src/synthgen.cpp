#include "greenscan/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;

namespace greenscan::synthgen {

namespace {

constexpr std::uint8_t kCanopyRed = 100;
constexpr std::uint8_t kSkyLevel = 150;
constexpr std::uint8_t kTrunkLevel = 60;
constexpr double kNdviTolerance = 0.02;

bool in_disk(const Disk &d, double x, double y) {
  const double dx = x - d.cx, dy = y - d.cy;
  return dx * dx + dy * dy <= d.radius * d.radius;
}

bool in_canopy(const TreeSpec &t, double x, double y) {
  if (in_disk(t.canopy, x, y))
    return true;
  return std::any_of(t.lobes.begin(), t.lobes.end(),
                     [&](const Disk &d) { return in_disk(d, x, y); });
}

bool in_trunk(const TreeSpec &t, double x, double y) {
  if (t.trunk.width <= 0.0 || t.trunk.height <= 0.0)
    return false;
  return std::abs(x - t.canopy.cx) <= t.trunk.width / 2.0 && y >= t.canopy.cy &&
         y <= t.canopy.cy + t.trunk.height;
}

enum class Surface { sky, trunk, canopy };

// Later trees occlude earlier ones; canopy occludes trunks.
struct Hit {
  Surface surface = Surface::sky;
  int tree = -1;
};

Hit hit_test(const SceneSpec &spec, double x, double y) {
  Hit hit;
  for (int i = 0; i < static_cast<int>(spec.trees.size()); ++i)
    if (in_trunk(spec.trees[i], x, y))
      hit = {Surface::trunk, i};
  for (int i = 0; i < static_cast<int>(spec.trees.size()); ++i)
    if (in_canopy(spec.trees[i], x, y))
      hit = {Surface::canopy, i};
  return hit;
}

} // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0)
    throw SpecError("scene dimensions must be positive");
  range.validate();
  if (!(noise_sigma >= 0.0))
    throw SpecError("noise_sigma must be >= 0");
  if (std::abs(latitude) > 90.0 || std::abs(longitude) > 180.0)
    throw SpecError("scene coordinates out of range");
  for (const auto &t : trees) {
    if (!(t.canopy_raw_ndvi > -1.0 && t.canopy_raw_ndvi < 1.0))
      throw SpecError("canopy_raw_ndvi must lie in (-1, 1)");
    auto check = [&](const Disk &d) {
      if (!(d.radius > 0.0) || d.cx - d.radius < 0.0 || d.cy - d.radius < 0.0 ||
          d.cx + d.radius > width || d.cy + d.radius > height)
        throw SpecError("tree blob outside scene bounds");
    };
    check(t.canopy);
    for (const auto &l : t.lobes)
      check(l);
  }
  if (prewarp) {
    if (prewarp->rgn_width <= 0 || prewarp->rgn_height <= 0)
      throw SpecError("prewarp RGN dimensions must be positive");
    try {
      registration::validate(prewarp->params, prewarp->rgn_width,
                             prewarp->rgn_height, width, height);
    } catch (const ValidationError &e) {
      throw SpecError(std::string("prewarp registration: ") + e.what());
    }
  }
}

std::pair<std::uint8_t, std::uint8_t> channels_for_ndvi(double v) {
  if (!(v > -1.0 && v < 1.0))
    throw SpecError("target NDVI must lie in (-1, 1)");
  const double ratio = (1.0 + v) / (1.0 - v);
  int red = kCanopyRed;
  if (red * ratio > 255.0)
    red = static_cast<int>(std::floor(255.0 / ratio));
  red = std::max(red, 1);
  const int nir = std::clamp(static_cast<int>(std::lround(red * ratio)), 0, 255);
  const double achieved = static_cast<double>(nir - red) / (nir + red);
  if (std::abs(achieved - v) > kNdviTolerance)
    throw SpecError("target NDVI " + std::to_string(v) +
                    " unreachable at 8-bit quantization (closest " +
                    std::to_string(achieved) + ")");
  return {static_cast<std::uint8_t>(red), static_cast<std::uint8_t>(nir)};
}

std::uint8_t thermal_value_for(double temp_c, const raster::TemperatureRange &range) {
  const double p = (temp_c - range.t_min) / (range.t_max - range.t_min) * 255.0;
  return static_cast<std::uint8_t>(std::clamp(std::lround(p), 0L, 255L));
}

Scene generate(const SceneSpec &spec) {
  spec.validate();
  const int w = spec.width, h = spec.height;

  std::vector<std::pair<std::uint8_t, std::uint8_t>> tree_channels;
  for (const auto &t : spec.trees)
    tree_channels.push_back(channels_for_ndvi(t.canopy_raw_ndvi));

  auto channels_at = [&](const Hit &hit) -> raster::RgnPixel {
    switch (hit.surface) {
    case Surface::canopy: {
      const auto [red, nir] = tree_channels[hit.tree];
      return {red, static_cast<std::uint8_t>(std::min(255, red + 20)), nir};
    }
    case Surface::trunk:
      return {kTrunkLevel, kTrunkLevel, kTrunkLevel};
    case Surface::sky:
      break;
    }
    return {kSkyLevel, kSkyLevel, kSkyLevel};
  };

  Scene scene;
  scene.truth.masks = {w, h, {}};
  for (std::size_t i = 0; i < spec.trees.size(); ++i)
    scene.truth.masks.instances.push_back(
        {raster::Mask(w, h, 0), 1.0, static_cast<int>(i) + 1});

  raster::Plane8 thermal(w, h);
  raster::RgnImage rgn(w, h);
  const std::uint8_t sky_p = thermal_value_for(spec.sky_temp_c, spec.range);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Hit hit = hit_test(spec, x + 0.5, y + 0.5);
      rgn.set(x, y, channels_at(hit));
      if (hit.surface == Surface::canopy) {
        scene.truth.masks.instances[hit.tree].mask(x, y) = 1;
        thermal(x, y) = thermal_value_for(spec.trees[hit.tree].canopy_temp_c, spec.range);
      } else if (hit.surface == Surface::trunk) {
        thermal(x, y) = thermal_value_for(spec.trees[hit.tree].canopy_temp_c, spec.range);
      } else {
        thermal(x, y) = sky_p;
      }
    }
  }

  if (spec.prewarp) {
    const auto &pw = *spec.prewarp;
    const registration::Warp warp(pw.params, pw.rgn_width, pw.rgn_height, w, h);
    raster::RgnImage hi(pw.rgn_width, pw.rgn_height);
    for (int y = 0; y < pw.rgn_height; ++y)
      for (int x = 0; x < pw.rgn_width; ++x) {
        const auto t = warp.to_thermal(x, y);
        hi.set(x, y, channels_at(hit_test(spec, t.x + 0.5, t.y + 0.5)));
      }
    rgn = std::move(hi);
  }

  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (auto *plane : {&rgn.red(), &rgn.green(), &rgn.nir()})
      for (auto &v : plane->pixels())
        v = static_cast<std::uint8_t>(
            std::clamp(std::lround(v + noise(rng)), 0L, 255L));
  }

  scene.capture.rgn = std::move(rgn);
  scene.capture.thermal = raster::ThermalImage(std::move(thermal), spec.range);
  scene.capture.meta.timestamp = spec.timestamp;
  scene.capture.meta.latitude = spec.latitude;
  scene.capture.meta.longitude = spec.longitude;
  scene.capture.meta.air_temperature = spec.air_temp_c;
  scene.capture.meta.device_id = "synthgen";

  for (std::size_t i = 0; i < spec.trees.size(); ++i) {
    const auto &t = spec.trees[i];
    const auto [red, nir] = tree_channels[i];
    TreeTruth truth;
    truth.label = static_cast<int>(i) + 1;
    truth.red = red;
    truth.nir = nir;
    truth.target_ndvi = t.canopy_raw_ndvi;
    truth.achieved_ndvi = static_cast<double>(int{nir} - int{red}) / (nir + red);
    truth.quantization_error = truth.achieved_ndvi - truth.target_ndvi;
    truth.target_temp_c = t.canopy_temp_c;
    const std::uint8_t p = thermal_value_for(t.canopy_temp_c, spec.range);
    truth.achieved_temp_c = p / 255.0 * (spec.range.t_max - spec.range.t_min) + spec.range.t_min;
    truth.target_ctd = t.canopy_temp_c - spec.air_temp_c;
    truth.achieved_ctd = truth.achieved_temp_c - spec.air_temp_c;
    truth.pixel_count = raster::count(scene.truth.masks.instances[i].mask);
    scene.truth.trees.push_back(truth);
  }
  return scene;
}

SceneSpec random_scene(std::uint64_t seed, int trees, double noise_sigma,
                       int width, int height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SceneSpec spec;
  spec.id = "scene_" + std::to_string(seed);
  spec.width = width;
  spec.height = height;
  spec.seed = seed;
  spec.noise_sigma = noise_sigma;
  spec.air_temp_c = -5.0 + 20.0 * unit(rng);
  spec.sky_temp_c = spec.air_temp_c - 8.0;
  spec.latitude = 42.37 + 0.01 * unit(rng);
  spec.longitude = -71.11 + 0.01 * unit(rng);

  // One tree per vertical strip keeps canopies separated.
  const double strip = static_cast<double>(width) / std::max(trees, 1);
  for (int i = 0; i < trees; ++i) {
    TreeSpec t;
    const double max_r = std::min(strip / 2.0 - 3.0, height / 3.0);
    t.canopy.radius = std::max(6.0, max_r * (0.7 + 0.3 * unit(rng)));
    t.canopy.cx = strip * (i + 0.5);
    t.canopy.cy = t.canopy.radius + 2.0 + unit(rng) * (height / 2.0 - t.canopy.radius);
    t.canopy.cy = std::min(t.canopy.cy, height - t.canopy.radius - 1.0);
    if (unit(rng) < 0.5) {
      const double lr = t.canopy.radius * 0.5;
      Disk lobe{t.canopy.cx + (unit(rng) - 0.5) * t.canopy.radius * 0.6,
                t.canopy.cy - t.canopy.radius * 0.5, lr};
      if (lobe.cy - lr >= 0.0 && std::abs(lobe.cx - strip * (i + 0.5)) + lr < strip / 2.0 - 2.0)
        t.lobes.push_back(lobe);
    }
    t.canopy_raw_ndvi = 0.2 + 0.6 * unit(rng);
    t.canopy_temp_c = spec.air_temp_c - 3.0 + 8.0 * unit(rng);
    t.trunk = {std::max(2.0, t.canopy.radius * 0.3), static_cast<double>(height)};
    spec.trees.push_back(t);
  }
  return spec;
}

namespace {

Disk disk_from_json(const json &j) {
  Disk d;
  if (j.contains("center")) {
    d.cx = j["center"].at(0).get<double>();
    d.cy = j["center"].at(1).get<double>();
  } else {
    d.cx = j.at("cx").get<double>();
    d.cy = j.at("cy").get<double>();
  }
  d.radius = j.at("radius").get<double>();
  return d;
}

json disk_to_json(const Disk &d) {
  return {{"center", {d.cx, d.cy}}, {"radius", d.radius}};
}

} // namespace

SceneSpec scene_from_json(const json &j) {
  try {
    SceneSpec s;
    s.id = j.value("id", s.id);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.sky_temp_c = j.value("sky_temp_c", s.sky_temp_c);
    s.air_temp_c = j.value("air_temp_c", s.air_temp_c);
    s.range.t_min = j.value("t_min_c", s.range.t_min);
    s.range.t_max = j.value("t_max_c", s.range.t_max);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.seed = j.value("seed", s.seed);
    s.latitude = j.value("latitude", s.latitude);
    s.longitude = j.value("longitude", s.longitude);
    s.timestamp = j.value("timestamp", s.timestamp);
    for (const auto &tj : j.value("trees", json::array())) {
      TreeSpec t;
      t.canopy = disk_from_json(tj);
      for (const auto &lj : tj.value("lobes", json::array()))
        t.lobes.push_back(disk_from_json(lj));
      t.canopy_raw_ndvi = tj.value("canopy_raw_ndvi", t.canopy_raw_ndvi);
      t.canopy_temp_c = tj.value("canopy_temp_c", t.canopy_temp_c);
      if (tj.contains("trunk")) {
        t.trunk.width = tj["trunk"].value("width", 0.0);
        t.trunk.height = tj["trunk"].value("height", 0.0);
      }
      s.trees.push_back(std::move(t));
    }
    if (j.contains("prewarp")) {
      const json &p = j["prewarp"];
      PrewarpSpec pw;
      pw.rgn_width = p.at("rgn_width").get<int>();
      pw.rgn_height = p.at("rgn_height").get<int>();
      pw.params.translate_x = p.value("translate_x", 0.0);
      pw.params.translate_y = p.value("translate_y", 0.0);
      pw.params.zoom = p.value("zoom", 1.0);
      pw.params.units = p.value("units", std::string("thermal")) == "source"
                            ? registration::TranslationUnits::source
                            : registration::TranslationUnits::thermal;
      s.prewarp = pw;
    }
    return s;
  } catch (const json::exception &e) {
    throw SpecError(std::string("malformed scene spec: ") + e.what());
  }
}

json scene_to_json(const SceneSpec &s) {
  json j;
  j["id"] = s.id;
  j["width"] = s.width;
  j["height"] = s.height;
  j["sky_temp_c"] = s.sky_temp_c;
  j["air_temp_c"] = s.air_temp_c;
  j["t_min_c"] = s.range.t_min;
  j["t_max_c"] = s.range.t_max;
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  j["latitude"] = s.latitude;
  j["longitude"] = s.longitude;
  j["timestamp"] = s.timestamp;
  j["trees"] = json::array();
  for (const auto &t : s.trees) {
    json tj = disk_to_json(t.canopy);
    tj["lobes"] = json::array();
    for (const auto &l : t.lobes)
      tj["lobes"].push_back(disk_to_json(l));
    tj["canopy_raw_ndvi"] = t.canopy_raw_ndvi;
    tj["canopy_temp_c"] = t.canopy_temp_c;
    tj["trunk"] = {{"width", t.trunk.width}, {"height", t.trunk.height}};
    j["trees"].push_back(tj);
  }
  if (s.prewarp) {
    j["prewarp"] = {
        {"rgn_width", s.prewarp->rgn_width},
        {"rgn_height", s.prewarp->rgn_height},
        {"translate_x", s.prewarp->params.translate_x},
        {"translate_y", s.prewarp->params.translate_y},
        {"zoom", s.prewarp->params.zoom},
        {"units", s.prewarp->params.units == registration::TranslationUnits::source
                      ? "source"
                      : "thermal"}};
  }
  return j;
}

std::vector<SceneSpec> load_scene_specs(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw SpecError("cannot open scene spec: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw SpecError(path.string() + ": malformed JSON: " + e.what());
  }
  std::vector<SceneSpec> specs;
  if (j.is_object() && j.contains("scenes")) {
    for (const auto &sj : j["scenes"])
      specs.push_back(scene_from_json(sj));
  } else {
    specs.push_back(scene_from_json(j));
  }
  return specs;
}

void write_scene(const fs::path &dir, const SceneSpec &spec, const Scene &scene) {
  fs::create_directories(dir);
  raster::save_rgn(dir / (spec.id + ".rgn.png"), scene.capture.rgn);
  raster::save_plane8(dir / (spec.id + ".thermal.png"), scene.capture.thermal.values());
  raster::save_sidecar(dir / (spec.id + ".meta.json"), scene.capture.meta,
                       scene.capture.thermal.range());
  segmentation::save_instance_masks(dir / (spec.id + ".truth.png"), scene.truth.masks);
}

} // namespace greenscan::synthgen

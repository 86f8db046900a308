#pragma once

#include "greenscan/raster.hpp"
#include "greenscan/registration.hpp"
#include "greenscan/segmentation.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace greenscan::synthgen {

struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

struct Trunk {
  double width = 0.0;  ///< pixels; 0 disables the trunk
  double height = 0.0; ///< pixels below the canopy centre
};

struct TreeSpec {
  Disk canopy;
  std::vector<Disk> lobes; ///< extra disks unioned into the canopy
  double canopy_raw_ndvi = 0.5;
  double canopy_temp_c = 20.0;
  Trunk trunk;
};

/// High-resolution RGN emission consistent with `params`.
struct PrewarpSpec {
  int rgn_width = 0;
  int rgn_height = 0;
  registration::RegistrationParams params;
};

struct SceneSpec {
  std::string id = "scene";
  int width = 160;
  int height = 120;
  std::vector<TreeSpec> trees;
  double sky_temp_c = 0.0;
  double air_temp_c = 15.0;
  raster::TemperatureRange range{-10.0, 40.0};
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double latitude = 42.3736;
  double longitude = -71.1097;
  double timestamp = 1644000000.0;
  std::optional<PrewarpSpec> prewarp;

  void validate() const;
};

struct TreeTruth {
  int label = 0;
  double target_ndvi = 0.0;
  double achieved_ndvi = 0.0; ///< after 8-bit quantization
  double quantization_error = 0.0;
  double target_temp_c = 0.0;
  double achieved_temp_c = 0.0;
  double target_ctd = 0.0;
  double achieved_ctd = 0.0;
  std::uint8_t red = 0;
  std::uint8_t nir = 0;
  std::size_t pixel_count = 0;
};

struct SceneTruth {
  segmentation::InstanceMaskSet masks; ///< visible canopy of each tree
  std::vector<TreeTruth> trees;
};

struct Scene {
  raster::CapturePair capture;
  SceneTruth truth;
};

/// (red, nir) with NDVI closest to `v`; red is 100 unless NIR would overflow.
/// Throws SpecError when the 8-bit result misses `v` by more than 0.02.
std::pair<std::uint8_t, std::uint8_t> channels_for_ndvi(double v);

/// Thermal value decoding closest to `temp_c`.
std::uint8_t thermal_value_for(double temp_c, const raster::TemperatureRange &range);

Scene generate(const SceneSpec &spec);

/// Random scene with `trees` well-separated canopies.
SceneSpec random_scene(std::uint64_t seed, int trees, double noise_sigma,
                       int width = 160, int height = 120);

SceneSpec scene_from_json(const nlohmann::json &j);
nlohmann::json scene_to_json(const SceneSpec &spec);

/// Accepts one scene object or {"scenes": [...]}.
std::vector<SceneSpec> load_scene_specs(const std::filesystem::path &path);

/// Writes `<id>.rgn.png`, `<id>.thermal.png`, `<id>.meta.json`,
/// `<id>.truth.png` (+ scores sidecar).
void write_scene(const std::filesystem::path &dir, const SceneSpec &spec,
                 const Scene &scene);

} // namespace greenscan::synthgen

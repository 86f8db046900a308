#pragma once

#include "greenscan/raster.hpp"
#include "greenscan/registration.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace greenscan::testing {

/// Registered pair at identity: every pixel valid, thermal uniform at `p`.
inline registration::RegisteredPair identity_pair(const raster::RgnImage &rgn,
                                                  std::uint8_t p = 128,
                                                  raster::TemperatureRange range = {-10, 40}) {
  registration::RegisteredPair reg;
  reg.rgn_aligned = rgn;
  reg.thermal = raster::ThermalImage(raster::Plane8(rgn.width(), rgn.height(), p), range);
  reg.valid_mask = raster::Mask(rgn.width(), rgn.height(), 1);
  return reg;
}

inline void paint_rect(raster::RgnImage &img, int x0, int y0, int x1, int y1,
                       raster::RgnPixel px) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      img.set(x, y, px);
}

inline raster::Mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  raster::Mask m(w, h, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      m(x, y) = 1;
  return m;
}

inline raster::Mask random_mask(std::mt19937_64 &rng, int w, int h, double density) {
  std::bernoulli_distribution bit(density);
  raster::Mask m(w, h, 0);
  for (auto &v : m.pixels())
    v = bit(rng) ? 1 : 0;
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("greenscan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace greenscan::testing

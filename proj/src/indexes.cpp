#include "greenscan/indexes.hpp"

#include <algorithm>
#include <cmath>

namespace greenscan::indexes {

std::optional<double> ndvi(std::uint8_t nir, std::uint8_t red) {
  const int sum = int{nir} + int{red};
  if (sum == 0)
    return std::nullopt;
  return static_cast<double>(int{nir} - int{red}) / sum;
}

NdviPlane ndvi_plane(const registration::RegisteredPair &reg) {
  const auto &rgn = reg.rgn_aligned;
  NdviPlane out{raster::Plane<double>(rgn.width(), rgn.height(), 0.0),
                raster::Mask(rgn.width(), rgn.height(), 0)};
  for (int y = 0; y < rgn.height(); ++y) {
    for (int x = 0; x < rgn.width(); ++x) {
      if (!reg.valid_mask(x, y))
        continue;
      if (const auto v = ndvi(rgn.nir()(x, y), rgn.red()(x, y))) {
        out.values(x, y) = *v;
        out.defined(x, y) = 1;
      }
    }
  }
  return out;
}

CorrectionScale correction_scale(std::span<const double> raw) {
  if (raw.empty())
    throw EmptyMaskError("NDVI correction over an empty mask");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  CorrectionScale s;
  s.ndvi_min = *lo;
  s.ndvi_max = *hi;
  if (s.ndvi_max == 0.0)
    throw DegenerateScaleError("NDVI maximum over the mask is 0");
  s.factor = std::abs(s.ndvi_min) / std::abs(s.ndvi_max);
  s.anomalous = std::abs(s.ndvi_min) > std::abs(s.ndvi_max);
  return s;
}

std::vector<double> correct_values(std::span<const double> raw) {
  const CorrectionScale s = correction_scale(raw);
  std::vector<double> out;
  out.reserve(raw.size());
  for (double v : raw)
    out.push_back(v / std::abs(s.ndvi_max) * std::abs(s.ndvi_min));
  return out;
}

CorrectedNdvi corrected_ndvi(const NdviPlane &plane, const raster::Mask &mask) {
  if (!plane.values.same_shape(mask))
    throw ValidationError("mask and NDVI plane differ in size");
  CorrectedNdvi out{raster::Plane<double>(mask.width(), mask.height(), 0.0),
                    raster::Mask(mask.width(), mask.height(), 0),
                    {}};
  std::vector<double> raw;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y) && plane.defined(x, y)) {
        raw.push_back(plane.values(x, y));
        out.defined(x, y) = 1;
      }
  out.scale = correction_scale(raw);
  const double max_abs = std::abs(out.scale.ndvi_max);
  const double min_abs = std::abs(out.scale.ndvi_min);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (out.defined(x, y))
        out.values(x, y) = plane.values(x, y) / max_abs * min_abs;
  return out;
}

double decode_temperature(std::uint8_t value,
                          const raster::TemperatureRange &range) {
  return value / 255.0 * (range.t_max - range.t_min) + range.t_min;
}

double pixel_temperature(const raster::ThermalImage &thermal, int x, int y) {
  return decode_temperature(raster::pixel_at(thermal, x, y), thermal.range());
}

double ctd(const raster::ThermalImage &thermal, const raster::Mask &mask,
           double air_temperature) {
  if (!thermal.values().same_shape(mask))
    throw ValidationError("mask and thermal image differ in size");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        sum += decode_temperature(thermal.values()(x, y), thermal.range());
        ++n;
      }
  if (n == 0)
    throw EmptyMaskError("CTD over an empty mask");
  return sum / static_cast<double>(n) - air_temperature;
}

TreeIndexes tree_indexes(const registration::RegisteredPair &reg,
                         const raster::Mask &leaf_mask, int instance_id,
                         double air_temperature, const IndexConfig &cfg) {
  const std::size_t population = raster::count(leaf_mask);
  if (population == 0)
    throw EmptyMaskError("instance " + std::to_string(instance_id) +
                         " has an empty leaf mask");
  const NdviPlane plane = ndvi_plane(reg);

  TreeIndexes t;
  t.instance_id = instance_id;
  t.canopy_pixel_count = population;
  t.ctd = ctd(reg.thermal, leaf_mask, air_temperature);

  double sum = 0.0;
  std::size_t n = 0;
  if (cfg.apply_correction) {
    const CorrectedNdvi corrected = corrected_ndvi(plane, leaf_mask);
    t.anomalous_scale = corrected.scale.anomalous;
    for (int y = 0; y < leaf_mask.height(); ++y)
      for (int x = 0; x < leaf_mask.width(); ++x)
        if (corrected.defined(x, y)) {
          sum += corrected.values(x, y);
          ++n;
        }
  } else {
    for (int y = 0; y < leaf_mask.height(); ++y)
      for (int x = 0; x < leaf_mask.width(); ++x)
        if (leaf_mask(x, y) && plane.defined(x, y)) {
          sum += plane.values(x, y);
          ++n;
        }
    if (n == 0)
      throw EmptyMaskError("no defined NDVI under the leaf mask");
  }
  t.ndvi_corrected_mean = sum / static_cast<double>(n);
  return t;
}

} // namespace greenscan::indexes

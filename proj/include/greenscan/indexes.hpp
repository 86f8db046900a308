#pragma once

#include "greenscan/raster.hpp"
#include "greenscan/registration.hpp"

#include <span>
#include <vector>

namespace greenscan::indexes {

/// Raw per-pixel NDVI; `defined` is false where NIR + Red = 0 or the pixel is
/// outside the registration footprint.
struct NdviPlane {
  raster::Plane<double> values;
  raster::Mask defined;
};

/// (NIR - Red) / (NIR + Red); nullopt when both are zero.
std::optional<double> ndvi(std::uint8_t nir, std::uint8_t red);

NdviPlane ndvi_plane(const registration::RegisteredPair &reg);

struct CorrectionScale {
  double ndvi_min = 0.0;
  double ndvi_max = 0.0;
  double factor = 1.0; ///< |min| / |max|
  bool anomalous = false; ///< |min| > |max|, i.e. the factor enlarges values
};

/// Scale over a set of raw values. Throws EmptyMaskError on an empty set and
/// DegenerateScaleError when the maximum is exactly 0.
CorrectionScale correction_scale(std::span<const double> raw);

/// raw / |max| * |min| for every value.
std::vector<double> correct_values(std::span<const double> raw);

struct CorrectedNdvi {
  raster::Plane<double> values; ///< corrected where `defined`, 0 elsewhere
  raster::Mask defined;         ///< mask AND NDVI-defined
  CorrectionScale scale;
};

CorrectedNdvi corrected_ndvi(const NdviPlane &plane, const raster::Mask &mask);

/// P / 255 * (t_max - t_min) + t_min.
double pixel_temperature(const raster::ThermalImage &thermal, int x, int y);
double decode_temperature(std::uint8_t value, const raster::TemperatureRange &range);

/// Mean canopy temperature over the mask minus the air temperature.
double ctd(const raster::ThermalImage &thermal, const raster::Mask &mask,
           double air_temperature);

struct TreeIndexes {
  int instance_id = 0;
  double ndvi_corrected_mean = 0.0;
  double ctd = 0.0;
  std::size_t canopy_pixel_count = 0;
  bool anomalous_scale = false;
};

struct IndexConfig {
  /// Disable to report the raw NDVI mean (sensitivity studies).
  bool apply_correction = true;
};

TreeIndexes tree_indexes(const registration::RegisteredPair &reg,
                         const raster::Mask &leaf_mask, int instance_id,
                         double air_temperature, const IndexConfig &cfg = {});

} // namespace greenscan::indexes

#pragma once

#include "greenscan/raster.hpp"

namespace greenscan::registration {

enum class TranslationUnits {
  thermal, ///< pixels of the thermal frame
  source,  ///< pixels of the zoomed (cropped) RGN frame before resampling
};

enum class Interpolation { bilinear, nearest };

/// Zoom-about-center followed by a planar shift. Positive translate_y moves
/// content upward.
struct RegistrationParams {
  double translate_x = 0.0;
  double translate_y = 0.0;
  double zoom = 1.0;
  TranslationUnits units = TranslationUnits::thermal;
  Interpolation interpolation = Interpolation::bilinear;
};

/// Mounting calibration of the reference rig: (+50 right, +150 up) in RGN
/// pixels, zoom 0.57.
RegistrationParams default_rig_params();

struct RegisteredPair {
  raster::RgnImage rgn_aligned;
  raster::ThermalImage thermal;
  raster::Mask valid_mask;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Registration geometry resolved for one pair of frame sizes.
class Warp {
public:
  Warp(const RegistrationParams &params, int rgn_width, int rgn_height,
       int thermal_width, int thermal_height);

  /// Translation in thermal pixels (after unit conversion).
  Point shift() const { return {shift_x_, shift_y_}; }

  /// Whether thermal pixel (x, y) is covered by the warped RGN footprint.
  bool covers(int x, int y) const;

  /// Thermal pixel -> RGN source pixel coordinates (no footprint check).
  Point to_source(double x, double y) const;
  /// RGN source pixel coordinates -> thermal pixel.
  Point to_thermal(double sx, double sy) const;

  int thermal_width() const { return thermal_width_; }
  int thermal_height() const { return thermal_height_; }

private:
  double shift_x_, shift_y_;
  double scale_x_, scale_y_; // source pixels per thermal pixel
  double rgn_cx_, rgn_cy_;
  int thermal_width_, thermal_height_;
};

/// Throws ValidationError unless zoom in (0, 1] and the thermal-unit shift is
/// strictly smaller than the thermal frame.
void validate(const RegistrationParams &params, int rgn_width, int rgn_height,
              int thermal_width, int thermal_height);

RegisteredPair register_pair(const raster::CapturePair &pair,
                             const RegistrationParams &params);

/// Source RGN coordinates that `register_pair` samples for thermal pixel (x, y).
/// Throws OutsideFootprintError when (x, y) is not covered.
Point invert_registration(const RegistrationParams &params, int rgn_width,
                          int rgn_height, int thermal_width, int thermal_height,
                          double x, double y);

/// Analytic count of covered thermal pixels.
std::size_t footprint_area(const RegistrationParams &params, int rgn_width,
                           int rgn_height, int thermal_width,
                           int thermal_height);

} // namespace greenscan::registration

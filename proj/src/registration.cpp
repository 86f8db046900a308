#include "greenscan/registration.hpp"

#include <algorithm>
#include <cmath>

namespace greenscan::registration {

using raster::Plane8;

RegistrationParams default_rig_params() {
  RegistrationParams p;
  p.translate_x = 50.0;
  p.translate_y = 150.0;
  p.zoom = 0.57;
  p.units = TranslationUnits::source;
  return p;
}

// Pixel i spans [i, i + 1); a thermal pixel centre maps linearly onto the
// central zoom window of the RGN frame.
Warp::Warp(const RegistrationParams &params, int rgn_width, int rgn_height,
           int thermal_width, int thermal_height)
    : thermal_width_(thermal_width), thermal_height_(thermal_height) {
  if (rgn_width <= 0 || rgn_height <= 0 || thermal_width <= 0 ||
      thermal_height <= 0)
    throw ValidationError("registration needs non-empty frames");
  if (!(params.zoom > 0.0 && params.zoom <= 1.0))
    throw ValidationError("zoom must lie in (0, 1]");
  scale_x_ = params.zoom * rgn_width / thermal_width;
  scale_y_ = params.zoom * rgn_height / thermal_height;
  rgn_cx_ = rgn_width / 2.0;
  rgn_cy_ = rgn_height / 2.0;
  if (params.units == TranslationUnits::source) {
    shift_x_ = params.translate_x / scale_x_;
    shift_y_ = params.translate_y / scale_y_;
  } else {
    shift_x_ = params.translate_x;
    shift_y_ = params.translate_y;
  }
}

Point Warp::to_source(double x, double y) const {
  // Undo the shift (upward is a negative row offset), then the zoom.
  const double u = x - shift_x_;
  const double v = y + shift_y_;
  return {rgn_cx_ + (u + 0.5 - thermal_width_ / 2.0) * scale_x_ - 0.5,
          rgn_cy_ + (v + 0.5 - thermal_height_ / 2.0) * scale_y_ - 0.5};
}

Point Warp::to_thermal(double sx, double sy) const {
  const double u = (sx + 0.5 - rgn_cx_) / scale_x_ + thermal_width_ / 2.0 - 0.5;
  const double v = (sy + 0.5 - rgn_cy_) / scale_y_ + thermal_height_ / 2.0 - 0.5;
  return {u + shift_x_, v - shift_y_};
}

bool Warp::covers(int x, int y) const {
  const double u = x - shift_x_;
  const double v = y + shift_y_;
  return u >= -0.5 && u <= thermal_width_ - 0.5 && v >= -0.5 &&
         v <= thermal_height_ - 0.5;
}

void validate(const RegistrationParams &params, int rgn_width, int rgn_height,
              int thermal_width, int thermal_height) {
  const Warp warp(params, rgn_width, rgn_height, thermal_width, thermal_height);
  const Point s = warp.shift();
  if (!std::isfinite(s.x) || !std::isfinite(s.y) ||
      std::abs(s.x) >= thermal_width || std::abs(s.y) >= thermal_height)
    throw ValidationError("translation must be smaller than the thermal frame");
}

namespace {

std::uint8_t sample_bilinear(const Plane8 &src, double sx, double sy) {
  sx = std::clamp(sx, 0.0, src.width() - 1.0);
  sy = std::clamp(sy, 0.0, src.height() - 1.0);
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  const double top = src(x0, y0) * (1.0 - fx) + src(x1, y0) * fx;
  const double bottom = src(x0, y1) * (1.0 - fx) + src(x1, y1) * fx;
  const double v = top * (1.0 - fy) + bottom * fy;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::uint8_t sample_nearest(const Plane8 &src, double sx, double sy) {
  const int x = std::clamp(static_cast<int>(std::floor(sx + 0.5)), 0,
                           src.width() - 1);
  const int y = std::clamp(static_cast<int>(std::floor(sy + 0.5)), 0,
                           src.height() - 1);
  return src(x, y);
}

} // namespace

RegisteredPair register_pair(const raster::CapturePair &pair,
                             const RegistrationParams &params) {
  const int tw = pair.thermal.width();
  const int th = pair.thermal.height();
  validate(params, pair.rgn.width(), pair.rgn.height(), tw, th);
  const Warp warp(params, pair.rgn.width(), pair.rgn.height(), tw, th);

  RegisteredPair out;
  out.thermal = pair.thermal;
  out.rgn_aligned = raster::RgnImage(tw, th);
  out.valid_mask = raster::Mask(tw, th, 0);

  const auto sample = params.interpolation == Interpolation::nearest
                          ? &sample_nearest
                          : &sample_bilinear;
  for (int y = 0; y < th; ++y) {
    for (int x = 0; x < tw; ++x) {
      if (!warp.covers(x, y))
        continue;
      const Point s = warp.to_source(x, y);
      out.rgn_aligned.red()(x, y) = sample(pair.rgn.red(), s.x, s.y);
      out.rgn_aligned.green()(x, y) = sample(pair.rgn.green(), s.x, s.y);
      out.rgn_aligned.nir()(x, y) = sample(pair.rgn.nir(), s.x, s.y);
      out.valid_mask(x, y) = 1;
    }
  }
  return out;
}

Point invert_registration(const RegistrationParams &params, int rgn_width,
                          int rgn_height, int thermal_width, int thermal_height,
                          double x, double y) {
  validate(params, rgn_width, rgn_height, thermal_width, thermal_height);
  const Warp warp(params, rgn_width, rgn_height, thermal_width, thermal_height);
  const Point shift = warp.shift();
  const double u = x - shift.x;
  const double v = y + shift.y;
  if (x < 0 || y < 0 || x > thermal_width - 1 || y > thermal_height - 1 ||
      u < -0.5 || u > thermal_width - 0.5 || v < -0.5 ||
      v > thermal_height - 0.5)
    throw OutsideFootprintError("thermal pixel outside registered footprint");
  return warp.to_source(x, y);
}

namespace {

// Integer positions p in [0, n) with lo <= p <= hi.
std::size_t count_in(double lo, double hi, int n) {
  const double first = std::max(0.0, std::ceil(lo));
  const double last = std::min(n - 1.0, std::floor(hi));
  return last < first ? 0 : static_cast<std::size_t>(last - first + 1);
}

} // namespace

std::size_t footprint_area(const RegistrationParams &params, int rgn_width,
                           int rgn_height, int thermal_width,
                           int thermal_height) {
  const Warp warp(params, rgn_width, rgn_height, thermal_width, thermal_height);
  const Point s = warp.shift();
  const std::size_t cols =
      count_in(s.x - 0.5, thermal_width - 0.5 + s.x, thermal_width);
  const std::size_t rows =
      count_in(-0.5 - s.y, thermal_height - 0.5 - s.y, thermal_height);
  return cols * rows;
}

} // namespace greenscan::registration

#pragma once

#include "greenscan/errors.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace greenscan::raster {

/// Row-major 2D plane with a top-left origin (x rightward, y downward).
template <typename T> class Plane {
public:
  Plane() = default;
  Plane(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw ValidationError("plane dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  /// Checked access; throws BoundsError outside the plane.
  const T &at(int x, int y) const {
    if (!contains(x, y))
      throw BoundsError("pixel (" + std::to_string(x) + ", " +
                        std::to_string(y) + ") outside " +
                        std::to_string(width_) + "x" + std::to_string(height_));
    return data_[index(x, y)];
  }
  T &at(int x, int y) {
    return const_cast<T &>(std::as_const(*this).at(x, y));
  }

  // Unchecked.
  const T &operator()(int x, int y) const { return data_[index(x, y)]; }
  T &operator()(int x, int y) { return data_[index(x, y)]; }

  std::span<const T> pixels() const { return data_; }
  std::span<T> pixels() { return data_; }

  bool same_shape(const Plane &other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  template <typename U> bool same_shape(const Plane<U> &other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Plane &, const Plane &) = default;

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Plane8 = Plane<std::uint8_t>;
/// Boolean plane stored as 0/1 bytes.
using Mask = Plane<std::uint8_t>;

std::size_t count(const Mask &mask);

enum class Band { red, green, nir };

/// File order of the three RGN bands; default (red, green, nir).
using BandOrder = std::array<Band, 3>;
inline constexpr BandOrder kDefaultBandOrder{Band::red, Band::green, Band::nir};

std::string to_string(Band band);
Band parse_band(const std::string &name);

struct RgnPixel {
  std::uint8_t red = 0;
  std::uint8_t green = 0;
  std::uint8_t nir = 0;
  friend bool operator==(const RgnPixel &, const RgnPixel &) = default;
};

/// Three-band multispectral raster. All planes share the same dimensions.
class RgnImage {
public:
  RgnImage() = default;
  RgnImage(int width, int height, RgnPixel fill = {});
  RgnImage(Plane8 red, Plane8 green, Plane8 nir);

  int width() const { return red_.width(); }
  int height() const { return red_.height(); }

  const Plane8 &red() const { return red_; }
  const Plane8 &green() const { return green_; }
  const Plane8 &nir() const { return nir_; }
  Plane8 &red() { return red_; }
  Plane8 &green() { return green_; }
  Plane8 &nir() { return nir_; }

  void set(int x, int y, RgnPixel px);

  friend bool operator==(const RgnImage &, const RgnImage &) = default;

private:
  Plane8 red_, green_, nir_;
};

struct TemperatureRange {
  double t_min = -10.0;
  double t_max = 40.0;
  void validate() const;
  friend bool operator==(const TemperatureRange &,
                         const TemperatureRange &) = default;
};

/// Normalized single-channel thermal raster plus the range that decodes it.
class ThermalImage {
public:
  ThermalImage() = default;
  ThermalImage(Plane8 values, TemperatureRange range);

  int width() const { return values_.width(); }
  int height() const { return values_.height(); }
  const Plane8 &values() const { return values_; }
  const TemperatureRange &range() const { return range_; }

  friend bool operator==(const ThermalImage &, const ThermalImage &) = default;

private:
  Plane8 values_;
  TemperatureRange range_;
};

RgnPixel pixel_at(const RgnImage &image, int x, int y);
std::uint8_t pixel_at(const ThermalImage &image, int x, int y);

struct CaptureMeta {
  double timestamp = 0.0; // UTC seconds
  std::optional<double> thermal_timestamp;
  double latitude = 0.0;
  double longitude = 0.0;
  double air_temperature = 0.0; // degrees C
  std::string device_id;
  void validate() const;
};

struct CapturePair {
  RgnImage rgn;
  ThermalImage thermal;
  CaptureMeta meta;
  BandOrder band_order = kDefaultBandOrder;
};

struct LoadOptions {
  double max_timestamp_skew_s = 2.0;
  /// Used when the sidecar has no t_min_c/t_max_c; without it those keys are required.
  std::optional<TemperatureRange> default_range;
};

/// Reads an RGN raster whose file channels are in `order`.
RgnImage load_rgn(const std::filesystem::path &path,
                  const BandOrder &order = kDefaultBandOrder);
void save_rgn(const std::filesystem::path &path, const RgnImage &image,
              const BandOrder &order = kDefaultBandOrder);

Plane8 load_plane8(const std::filesystem::path &path);
void save_plane8(const std::filesystem::path &path, const Plane8 &plane);

Plane<std::uint16_t> load_labels(const std::filesystem::path &path);
void save_labels(const std::filesystem::path &path,
                 const Plane<std::uint16_t> &labels);

struct Sidecar {
  CaptureMeta meta;
  std::optional<TemperatureRange> range;
  BandOrder band_order = kDefaultBandOrder;
};

Sidecar load_sidecar(const std::filesystem::path &path);
void save_sidecar(const std::filesystem::path &path, const CaptureMeta &meta,
                  const TemperatureRange &range,
                  const BandOrder &order = kDefaultBandOrder);

CapturePair load_capture(const std::filesystem::path &rgn_path,
                         const std::filesystem::path &thermal_path,
                         const std::filesystem::path &meta_path,
                         const LoadOptions &options = {});

} // namespace greenscan::raster

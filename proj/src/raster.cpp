#include "greenscan/raster.hpp"

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace fs = std::filesystem;
using nlohmann::json;

namespace greenscan::raster {

std::size_t count(const Mask &mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

std::string to_string(Band band) {
  switch (band) {
  case Band::red:
    return "red";
  case Band::green:
    return "green";
  case Band::nir:
    return "nir";
  }
  return "?";
}

Band parse_band(const std::string &name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "red" || lower == "r")
    return Band::red;
  if (lower == "green" || lower == "g")
    return Band::green;
  if (lower == "nir" || lower == "n" || lower == "near-infrared")
    return Band::nir;
  throw MetadataError("unknown band name '" + name + "'");
}

RgnImage::RgnImage(int width, int height, RgnPixel fill)
    : red_(width, height, fill.red), green_(width, height, fill.green),
      nir_(width, height, fill.nir) {}

RgnImage::RgnImage(Plane8 red, Plane8 green, Plane8 nir)
    : red_(std::move(red)), green_(std::move(green)), nir_(std::move(nir)) {
  if (!red_.same_shape(green_) || !red_.same_shape(nir_))
    throw ValidationError("RGN planes differ in size");
}

void RgnImage::set(int x, int y, RgnPixel px) {
  red_.at(x, y) = px.red;
  green_(x, y) = px.green;
  nir_(x, y) = px.nir;
}

void TemperatureRange::validate() const {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max))
    throw ValidationError("thermal range requires t_min < t_max");
}

ThermalImage::ThermalImage(Plane8 values, TemperatureRange range)
    : values_(std::move(values)), range_(range) {
  range_.validate();
}

RgnPixel pixel_at(const RgnImage &image, int x, int y) {
  return {image.red().at(x, y), image.green()(x, y), image.nir()(x, y)};
}

std::uint8_t pixel_at(const ThermalImage &image, int x, int y) {
  return image.values().at(x, y);
}

void CaptureMeta::validate() const {
  if (!(latitude >= -90.0 && latitude <= 90.0))
    throw ValidationError("latitude outside [-90, 90]");
  if (!(longitude >= -180.0 && longitude <= 180.0))
    throw ValidationError("longitude outside [-180, 180]");
  if (!std::isfinite(air_temperature))
    throw ValidationError("air temperature is not finite");
}

namespace {

cv::Mat read_raw(const fs::path &path) {
  if (!fs::exists(path))
    throw FormatError("raster not found: " + path.string());
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty())
    throw FormatError("cannot decode raster: " + path.string());
  return m;
}

void write_raw(const fs::path &path, const cv::Mat &m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception &e) {
    throw FormatError("cannot encode raster " + path.string() + ": " + e.what());
  }
  if (!ok)
    throw FormatError("cannot write raster: " + path.string());
}

Plane8 plane_from_channel(const cv::Mat &m, int channel) {
  Plane8 out(m.cols, m.rows);
  const int channels = m.channels();
  for (int y = 0; y < m.rows; ++y) {
    const auto *row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x)
      out(x, y) = row[x * channels + channel];
  }
  return out;
}

// OpenCV stores decoded colour rasters in reverse file order (BGR for RGB files).
int mat_channel_for_file_channel(int file_channel) { return 2 - file_channel; }

} // namespace

RgnImage load_rgn(const fs::path &path, const BandOrder &order) {
  const cv::Mat m = read_raw(path);
  if (m.depth() != CV_8U || m.channels() != 3)
    throw FormatError("RGN raster must be 8-bit x 3 channels: " + path.string());
  std::array<Plane8, 3> planes;
  for (int file_ch = 0; file_ch < 3; ++file_ch) {
    const auto band = static_cast<std::size_t>(order[file_ch]);
    planes[band] = plane_from_channel(m, mat_channel_for_file_channel(file_ch));
  }
  return RgnImage(std::move(planes[0]), std::move(planes[1]),
                  std::move(planes[2]));
}

void save_rgn(const fs::path &path, const RgnImage &image,
              const BandOrder &order) {
  cv::Mat m(image.height(), image.width(), CV_8UC3);
  for (int file_ch = 0; file_ch < 3; ++file_ch) {
    const Plane8 &plane = order[file_ch] == Band::red     ? image.red()
                          : order[file_ch] == Band::green ? image.green()
                                                          : image.nir();
    const int mat_ch = mat_channel_for_file_channel(file_ch);
    for (int y = 0; y < m.rows; ++y) {
      auto *row = m.ptr<std::uint8_t>(y);
      for (int x = 0; x < m.cols; ++x)
        row[x * 3 + mat_ch] = plane(x, y);
    }
  }
  write_raw(path, m);
}

Plane8 load_plane8(const fs::path &path) {
  const cv::Mat m = read_raw(path);
  if (m.depth() != CV_8U || m.channels() != 1)
    throw FormatError("expected 8-bit single-channel raster: " + path.string());
  return plane_from_channel(m, 0);
}

void save_plane8(const fs::path &path, const Plane8 &plane) {
  cv::Mat m(plane.height(), plane.width(), CV_8UC1,
            const_cast<std::uint8_t *>(plane.pixels().data()));
  write_raw(path, m);
}

Plane<std::uint16_t> load_labels(const fs::path &path) {
  const cv::Mat m = read_raw(path);
  if (m.channels() != 1 || (m.depth() != CV_16U && m.depth() != CV_8U))
    throw FormatError("label raster must be 8/16-bit single-channel: " +
                      path.string());
  Plane<std::uint16_t> out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      out(x, y) = m.depth() == CV_16U ? m.at<std::uint16_t>(y, x)
                                      : m.at<std::uint8_t>(y, x);
  return out;
}

void save_labels(const fs::path &path, const Plane<std::uint16_t> &labels) {
  cv::Mat m(labels.height(), labels.width(), CV_16UC1,
            const_cast<std::uint16_t *>(labels.pixels().data()));
  write_raw(path, m);
}

namespace {

double required_number(const json &j, const char *key, const fs::path &path) {
  if (!j.contains(key) || j[key].is_null())
    throw MetadataError(path.string() + ": missing required field '" + key + "'");
  if (!j[key].is_number())
    throw MetadataError(path.string() + ": field '" + key + "' is not a number");
  return j[key].get<double>();
}

} // namespace

Sidecar load_sidecar(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw MetadataError("metadata sidecar not found: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw MetadataError(path.string() + ": malformed JSON: " + e.what());
  }
  if (!j.is_object())
    throw MetadataError(path.string() + ": sidecar must be a JSON object");

  Sidecar s;
  s.meta.timestamp = j.contains("timestamp") && j["timestamp"].is_number()
                         ? j["timestamp"].get<double>()
                         : 0.0;
  if (j.contains("thermal_timestamp") && j["thermal_timestamp"].is_number())
    s.meta.thermal_timestamp = j["thermal_timestamp"].get<double>();
  s.meta.latitude = required_number(j, "latitude", path);
  s.meta.longitude = required_number(j, "longitude", path);
  s.meta.air_temperature = required_number(j, "air_temperature_c", path);
  s.meta.device_id = j.value("device_id", std::string{});

  const bool has_min = j.contains("t_min_c") && !j["t_min_c"].is_null();
  const bool has_max = j.contains("t_max_c") && !j["t_max_c"].is_null();
  if (has_min || has_max)
    s.range = TemperatureRange{required_number(j, "t_min_c", path),
                               required_number(j, "t_max_c", path)};

  if (j.contains("band_order")) {
    const json &bo = j["band_order"];
    std::vector<std::string> names;
    if (bo.is_array()) {
      for (const auto &b : bo)
        names.push_back(b.get<std::string>());
    } else if (bo.is_string()) {
      const std::string text = bo.get<std::string>();
      if (text.size() == 3 && text.find(',') == std::string::npos) {
        for (char c : text)
          names.emplace_back(1, c);
      } else {
        std::size_t start = 0;
        while (start <= text.size()) {
          const auto comma = text.find(',', start);
          names.push_back(text.substr(start, comma - start));
          if (comma == std::string::npos)
            break;
          start = comma + 1;
        }
      }
    }
    if (names.size() != 3)
      throw MetadataError(path.string() + ": band_order needs three bands");
    for (std::size_t i = 0; i < 3; ++i)
      s.band_order[i] = parse_band(names[i]);
    auto sorted = s.band_order;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw MetadataError(path.string() + ": band_order repeats a band");
  }
  return s;
}

void save_sidecar(const fs::path &path, const CaptureMeta &meta,
                  const TemperatureRange &range, const BandOrder &order) {
  json j;
  j["timestamp"] = meta.timestamp;
  if (meta.thermal_timestamp)
    j["thermal_timestamp"] = *meta.thermal_timestamp;
  j["latitude"] = meta.latitude;
  j["longitude"] = meta.longitude;
  j["air_temperature_c"] = meta.air_temperature;
  j["t_min_c"] = range.t_min;
  j["t_max_c"] = range.t_max;
  j["band_order"] = {to_string(order[0]), to_string(order[1]),
                     to_string(order[2])};
  j["device_id"] = meta.device_id;
  std::ofstream out(path);
  if (!out)
    throw FormatError("cannot write sidecar: " + path.string());
  out << j.dump(2) << '\n';
}

CapturePair load_capture(const fs::path &rgn_path, const fs::path &thermal_path,
                         const fs::path &meta_path, const LoadOptions &options) {
  Sidecar sidecar = load_sidecar(meta_path);
  TemperatureRange range;
  if (sidecar.range)
    range = *sidecar.range;
  else if (options.default_range)
    range = *options.default_range;
  else
    throw MetadataError(meta_path.string() +
                        ": missing required field 't_min_c'/'t_max_c'");

  CapturePair pair;
  pair.band_order = sidecar.band_order;
  pair.rgn = load_rgn(rgn_path, sidecar.band_order);
  Plane8 values = load_plane8(thermal_path);
  range.validate();
  pair.thermal = ThermalImage(std::move(values), range);
  pair.meta = std::move(sidecar.meta);
  pair.meta.validate();
  if (pair.meta.thermal_timestamp &&
      std::abs(*pair.meta.thermal_timestamp - pair.meta.timestamp) >
          options.max_timestamp_skew_s)
    throw ValidationError("RGN and thermal timestamps differ by more than " +
                          std::to_string(options.max_timestamp_skew_s) + " s");
  return pair;
}

} // namespace greenscan::raster

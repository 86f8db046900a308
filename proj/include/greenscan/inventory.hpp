#pragma once

#include "greenscan/errors.hpp"
#include "greenscan/raster.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace greenscan::inventory {

enum class Condition { good, fair, poor };

std::string to_string(Condition c);
/// Case-insensitive; nullopt for anything other than good/fair/poor.
std::optional<Condition> parse_condition(const std::string &text);

struct InventoryRecord {
  std::string tree_id;
  std::string species;
  Condition condition = Condition::good;
  double remote_ndvi = 0.0;
  double canopy_area_m2 = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
};

struct RowDiagnostic {
  std::size_t row = 0; ///< 1-based data row (CSV) or feature index (GeoJSON)
  std::string message;
};

struct Inventory {
  std::vector<InventoryRecord> records;
  std::vector<RowDiagnostic> rejected;
};

/// CSV (tree_id, species, condition, remote_ndvi, canopy_area_m2, latitude,
/// longitude) or GeoJSON Point features with the same property names, chosen
/// by extension. Missing required column -> SchemaError; bad rows are rejected
/// with diagnostics.
Inventory load_inventory(const std::filesystem::path &path);
Inventory parse_inventory_csv(const std::string &text);
Inventory parse_inventory_geojson(const std::string &text);

inline constexpr double kEarthRadiusM = 6371008.8;
inline constexpr double kDefaultMatchRadiusM = 25.0;

/// Great-circle distance in metres.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

struct Match {
  const InventoryRecord *record = nullptr;
  double distance_m = 0.0;
};

/// Nearest tree within `radius_m`; ties broken by ascending tree_id.
std::optional<Match> match_capture(const raster::CaptureMeta &meta,
                                   const std::vector<InventoryRecord> &inventory,
                                   double radius_m);
std::optional<Match> match_point(double latitude, double longitude,
                                 const std::vector<InventoryRecord> &inventory,
                                 double radius_m);

/// One per-tree result row as emitted by the process command.
struct IndexRow {
  std::string capture_id;
  int instance_id = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double ndvi_corrected_mean = 0.0;
  double ctd_c = 0.0;
  std::size_t canopy_pixel_count = 0;
};

struct TreeHealthRecord {
  std::optional<std::string> tree_id;
  std::string capture_id;
  int instance_id = 0;
  double measured_ndvi = 0.0;
  double measured_ctd = 0.0;
  std::optional<double> match_distance_m;
  bool duplicate = false; ///< another row matched the same tree
  std::optional<InventoryRecord> tree;
};

std::vector<TreeHealthRecord> join_results(const std::vector<IndexRow> &rows,
                                           const std::vector<InventoryRecord> &inventory,
                                           double radius_m);

} // namespace greenscan::inventory

#include "greenscan/inventory.hpp"

#include "csv.hpp"
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace greenscan::inventory {

std::string to_string(Condition c) {
  switch (c) {
  case Condition::good:
    return "good";
  case Condition::fair:
    return "fair";
  case Condition::poor:
    return "poor";
  }
  return "?";
}

namespace {

std::string trim_lower(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  const auto last = s.find_last_not_of(" \t\r\n");
  s = first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  const auto last = s.find_last_not_of(" \t\r\n");
  return first == std::string::npos ? std::string{}
                                    : s.substr(first, last - first + 1);
}

const std::vector<std::string> kColumns{"tree_id",        "species",  "condition",
                                        "remote_ndvi",    "canopy_area_m2",
                                        "latitude",       "longitude"};

double parse_number(const std::string &text, const std::string &column) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception &) {
    throw ValidationError(column + ": '" + t + "' is not a number");
  }
  if (used != t.size() || !std::isfinite(v))
    throw ValidationError(column + ": '" + t + "' is not a number");
  return v;
}

// Field values keyed by column name -> record; throws ValidationError.
InventoryRecord make_record(const std::map<std::string, std::string> &fields) {
  InventoryRecord r;
  r.tree_id = trim(fields.at("tree_id"));
  if (r.tree_id.empty())
    throw ValidationError("tree_id is empty");
  r.species = trim(fields.at("species"));
  const auto cond = parse_condition(fields.at("condition"));
  if (!cond)
    throw ValidationError("condition '" + trim(fields.at("condition")) +
                          "' is not one of good/fair/poor");
  r.condition = *cond;
  r.remote_ndvi = parse_number(fields.at("remote_ndvi"), "remote_ndvi");
  r.canopy_area_m2 = parse_number(fields.at("canopy_area_m2"), "canopy_area_m2");
  if (r.canopy_area_m2 < 0.0)
    throw ValidationError("canopy_area_m2 is negative");
  r.latitude = parse_number(fields.at("latitude"), "latitude");
  r.longitude = parse_number(fields.at("longitude"), "longitude");
  if (std::abs(r.latitude) > 90.0 || std::abs(r.longitude) > 180.0)
    throw ValidationError("coordinates out of range");
  return r;
}

} // namespace

std::optional<Condition> parse_condition(const std::string &text) {
  const std::string t = trim_lower(text);
  if (t == "good")
    return Condition::good;
  if (t == "fair")
    return Condition::fair;
  if (t == "poor")
    return Condition::poor;
  return std::nullopt;
}

Inventory parse_inventory_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("inventory CSV is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  std::vector<std::string> header;
  for (auto &h : csv::split_line(line))
    header.push_back(trim_lower(h));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i)
    index[header[i]] = i;
  for (const auto &col : kColumns)
    if (!index.contains(col))
      throw SchemaError("inventory CSV is missing required column '" + col + "'");

  Inventory inv;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    ++row;
    try {
      const auto cells = csv::split_line(line);
      std::map<std::string, std::string> fields;
      for (const auto &col : kColumns) {
        const std::size_t i = index[col];
        if (i >= cells.size())
          throw ValidationError("row has too few fields");
        fields[col] = cells[i];
      }
      inv.records.push_back(make_record(fields));
    } catch (const std::exception &e) {
      inv.rejected.push_back({row, e.what()});
    }
  }
  return inv;
}

Inventory parse_inventory_geojson(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw SchemaError(std::string("inventory GeoJSON is malformed: ") + e.what());
  }
  if (!j.is_object() || !j.contains("features") || !j["features"].is_array())
    throw SchemaError("inventory GeoJSON needs a FeatureCollection");

  Inventory inv;
  std::size_t row = 0;
  for (const auto &feature : j["features"]) {
    ++row;
    const json props = feature.value("properties", json::object());
    try {
      std::map<std::string, std::string> fields;
      for (const auto &col : kColumns) {
        if (col == "latitude" || col == "longitude")
          continue;
        if (!props.contains(col))
          throw SchemaError("feature is missing property '" + col + "'");
        const json &v = props[col];
        fields[col] = v.is_string() ? v.get<std::string>() : v.dump();
      }
      const json geom = feature.value("geometry", json::object());
      if (geom.value("type", "") != "Point" || !geom.contains("coordinates") ||
          geom["coordinates"].size() < 2)
        throw ValidationError("feature geometry must be a Point");
      // GeoJSON positions are [longitude, latitude].
      fields["longitude"] = geom["coordinates"][0].dump();
      fields["latitude"] = geom["coordinates"][1].dump();
      inv.records.push_back(make_record(fields));
    } catch (const SchemaError &) {
      throw;
    } catch (const std::exception &e) {
      inv.rejected.push_back({row, e.what()});
    }
  }
  return inv;
}

Inventory load_inventory(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw SchemaError("cannot open inventory: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".geojson" || ext == ".json")
    return parse_inventory_geojson(buf.str());
  return parse_inventory_csv(buf.str());
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * deg;
  const double dlon = (lon2 - lon1) * deg;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * deg) * std::cos(lat2 * deg) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

std::optional<Match> match_point(double latitude, double longitude,
                                 const std::vector<InventoryRecord> &inventory,
                                 double radius_m) {
  if (!(radius_m > 0.0))
    throw ValidationError("match radius must be positive");
  std::optional<Match> best;
  for (const auto &rec : inventory) {
    const double d = haversine_m(latitude, longitude, rec.latitude, rec.longitude);
    if (d > radius_m)
      continue;
    if (!best || d < best->distance_m ||
        (d == best->distance_m && rec.tree_id < best->record->tree_id))
      best = Match{&rec, d};
  }
  return best;
}

std::optional<Match> match_capture(const raster::CaptureMeta &meta,
                                   const std::vector<InventoryRecord> &inventory,
                                   double radius_m) {
  return match_point(meta.latitude, meta.longitude, inventory, radius_m);
}

std::vector<TreeHealthRecord> join_results(const std::vector<IndexRow> &rows,
                                           const std::vector<InventoryRecord> &inventory,
                                           double radius_m) {
  std::vector<TreeHealthRecord> out;
  std::map<std::string, std::size_t> uses;
  for (const auto &row : rows) {
    TreeHealthRecord rec;
    rec.capture_id = row.capture_id;
    rec.instance_id = row.instance_id;
    rec.measured_ndvi = row.ndvi_corrected_mean;
    rec.measured_ctd = row.ctd_c;
    if (const auto m = match_point(row.latitude, row.longitude, inventory, radius_m)) {
      rec.tree_id = m->record->tree_id;
      rec.match_distance_m = m->distance_m;
      rec.tree = *m->record;
      ++uses[*rec.tree_id];
    }
    out.push_back(std::move(rec));
  }
  for (auto &rec : out)
    if (rec.tree_id && uses[*rec.tree_id] > 1)
      rec.duplicate = true;
  return out;
}

} // namespace greenscan::inventory

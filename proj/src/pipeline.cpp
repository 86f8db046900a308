#include "greenscan/pipeline.hpp"

#include "csv.hpp"

#include "greenscan/synthgen.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace greenscan::pipeline {

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
  if (!(registration.zoom > 0.0 && registration.zoom <= 1.0))
    throw ValidationError("config: zoom must lie in (0, 1]");
  segmenter.validate();
  thermal_default_range.validate();
  if (!(match_radius_m > 0.0))
    throw ValidationError("config: match radius must be positive");
  if (!(max_timestamp_skew_s >= 0.0))
    throw ValidationError("config: timestamp skew must be >= 0");
  if (workers < 1)
    throw ValidationError("config: workers must be >= 1");
}

json config_to_json(const PipelineConfig &cfg) {
  const auto &r = cfg.registration;
  json j;
  j["registration"] = {
      {"translate_x", r.translate_x},
      {"translate_y", r.translate_y},
      {"zoom", r.zoom},
      {"units", r.units == registration::TranslationUnits::source ? "source" : "thermal"},
      {"interpolation",
       r.interpolation == registration::Interpolation::nearest ? "nearest" : "bilinear"}};
  j["segmentation"] = {
      {"ndvi_cutoff", cfg.segmenter.ndvi_cutoff},
      {"median_kernel", cfg.segmenter.median_kernel},
      {"min_instance_area", cfg.segmenter.min_instance_area},
      {"mode", cfg.segmenter.mode == segmentation::SegmenterMode::external ? "external"
                                                                            : "threshold"}};
  j["indexes"] = {{"apply_correction", cfg.indexes.apply_correction}};
  j["thermal"] = {{"t_min_c", cfg.thermal_default_range.t_min},
                  {"t_max_c", cfg.thermal_default_range.t_max},
                  {"max_timestamp_skew_s", cfg.max_timestamp_skew_s}};
  j["inventory"] = {{"match_radius_m", cfg.match_radius_m},
                    {"condition_ordinal", cfg.condition_ordinal}};
  j["workers"] = cfg.workers;
  return j;
}

PipelineConfig config_from_json(const json &j) {
  PipelineConfig cfg;
  try {
    if (j.contains("registration")) {
      const json &r = j["registration"];
      auto &p = cfg.registration;
      p.translate_x = r.value("translate_x", p.translate_x);
      p.translate_y = r.value("translate_y", p.translate_y);
      p.zoom = r.value("zoom", p.zoom);
      const std::string units = r.value("units", std::string(
          p.units == registration::TranslationUnits::source ? "source" : "thermal"));
      if (units != "source" && units != "thermal")
        throw ValidationError("config: registration.units must be source|thermal");
      p.units = units == "source" ? registration::TranslationUnits::source
                                  : registration::TranslationUnits::thermal;
      const std::string interp = r.value("interpolation", std::string("bilinear"));
      if (interp != "bilinear" && interp != "nearest")
        throw ValidationError("config: registration.interpolation must be bilinear|nearest");
      p.interpolation = interp == "nearest" ? registration::Interpolation::nearest
                                            : registration::Interpolation::bilinear;
    }
    if (j.contains("segmentation")) {
      const json &s = j["segmentation"];
      auto &c = cfg.segmenter;
      c.ndvi_cutoff = s.value("ndvi_cutoff", c.ndvi_cutoff);
      c.median_kernel = s.value("median_kernel", c.median_kernel);
      c.min_instance_area = s.value("min_instance_area", c.min_instance_area);
      const std::string mode = s.value("mode", std::string("threshold"));
      if (mode != "threshold" && mode != "external")
        throw ValidationError("config: segmentation.mode must be threshold|external");
      c.mode = mode == "external" ? segmentation::SegmenterMode::external
                                  : segmentation::SegmenterMode::threshold;
    }
    if (j.contains("indexes"))
      cfg.indexes.apply_correction =
          j["indexes"].value("apply_correction", cfg.indexes.apply_correction);
    if (j.contains("thermal")) {
      const json &t = j["thermal"];
      cfg.thermal_default_range.t_min = t.value("t_min_c", cfg.thermal_default_range.t_min);
      cfg.thermal_default_range.t_max = t.value("t_max_c", cfg.thermal_default_range.t_max);
      cfg.max_timestamp_skew_s = t.value("max_timestamp_skew_s", cfg.max_timestamp_skew_s);
    }
    if (j.contains("inventory")) {
      const json &i = j["inventory"];
      cfg.match_radius_m = i.value("match_radius_m", cfg.match_radius_m);
      if (i.contains("condition_ordinal"))
        cfg.condition_ordinal = i["condition_ordinal"].get<stats::OrdinalMap>();
    }
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const json::exception &e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open config: " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string config_hash(const PipelineConfig &cfg) {
  json j = config_to_json(cfg);
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- process

namespace {

bool has_suffix(const std::string &name, const std::string &suffix) {
  return name.size() > suffix.size() &&
         name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::optional<std::string> strip_any(const std::string &name, const std::string &role,
                                     std::initializer_list<const char *> exts) {
  for (const char *ext : exts) {
    const std::string suffix = "." + role + ext;
    if (has_suffix(name, suffix))
      return name.substr(0, name.size() - suffix.size());
  }
  return std::nullopt;
}

} // namespace

std::vector<CaptureFiles> discover_captures(const fs::path &dir) {
  if (!fs::is_directory(dir))
    throw NoInputError("captures directory not found: " + dir.string());
  std::map<std::string, CaptureFiles> found;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    const std::string name = entry.path().filename().string();
    if (auto id = strip_any(name, "rgn", {".png", ".tif", ".tiff"}))
      found[*id].rgn = entry.path();
    else if (auto id = strip_any(name, "thermal", {".png", ".tif", ".tiff"}))
      found[*id].thermal = entry.path();
    else if (auto id = strip_any(name, "meta", {".json"}))
      found[*id].meta = entry.path();
    else if (auto id = strip_any(name, "masks", {".png", ".tif", ".tiff"}))
      found[*id].masks = entry.path();
  }
  std::vector<CaptureFiles> out;
  for (auto &[id, files] : found) {
    files.id = id;
    out.push_back(std::move(files));
  }
  return out;
}

std::string to_string(CaptureStatus s) {
  switch (s) {
  case CaptureStatus::detected:
    return "detected";
  case CaptureStatus::empty:
    return "empty";
  case CaptureStatus::failed:
    return "failed";
  }
  return "?";
}

std::vector<inventory::IndexRow> process_pair(const std::string &capture_id,
                                              const raster::CapturePair &pair,
                                              const PipelineConfig &cfg,
                                              const segmentation::InstanceMaskSet *external,
                                              std::vector<std::string> *warnings) {
  const auto reg = registration::register_pair(pair, cfg.registration);
  const auto leaves = segmentation::segment(reg, cfg.segmenter, external);
  std::vector<inventory::IndexRow> rows;
  for (const auto &inst : leaves.instances) {
    const auto t = indexes::tree_indexes(reg, inst.mask, inst.label,
                                         pair.meta.air_temperature, cfg.indexes);
    if (t.anomalous_scale && warnings)
      warnings->push_back("instance " + std::to_string(inst.label) +
                          ": |NDVI_min| > |NDVI_max|, correction enlarges values");
    rows.push_back({capture_id, t.instance_id, pair.meta.latitude, pair.meta.longitude,
                    t.ndvi_corrected_mean, t.ctd, t.canopy_pixel_count});
  }
  return rows;
}

CaptureOutcome process_capture(const CaptureFiles &files, const PipelineConfig &cfg) {
  CaptureOutcome out;
  out.id = files.id;
  try {
    if (!files.rgn || !files.thermal || !files.meta)
      throw FormatError(std::string("incomplete capture triplet, missing ") +
                        (!files.rgn ? "rgn " : "") + (!files.thermal ? "thermal " : "") +
                        (!files.meta ? "meta" : ""));
    raster::LoadOptions opts;
    opts.max_timestamp_skew_s = cfg.max_timestamp_skew_s;
    opts.default_range = cfg.thermal_default_range;
    const auto pair = raster::load_capture(*files.rgn, *files.thermal, *files.meta, opts);

    std::optional<segmentation::InstanceMaskSet> external;
    if (cfg.segmenter.mode == segmentation::SegmenterMode::external) {
      if (!files.masks)
        throw FormatError("external segmenter mode but no <id>.masks raster");
      external = segmentation::load_external_masks(*files.masks, pair.thermal.width(),
                                                   pair.thermal.height());
    }
    out.rows = process_pair(files.id, pair, cfg, external ? &*external : nullptr,
                            &out.warnings);
    out.status = out.rows.empty() ? CaptureStatus::empty : CaptureStatus::detected;
  } catch (const std::exception &e) {
    out.rows.clear();
    out.status = CaptureStatus::failed;
    out.reason = e.what();
  }
  return out;
}

namespace {

const char *kIndexHeader =
    "capture_id,instance_id,lat,lon,ndvi_corrected_mean,ctd_c,canopy_pixel_count";

json index_row_json(const inventory::IndexRow &r) {
  return {{"capture_id", r.capture_id},
          {"instance_id", r.instance_id},
          {"lat", r.latitude},
          {"lon", r.longitude},
          {"ndvi_corrected_mean", r.ndvi_corrected_mean},
          {"ctd_c", r.ctd_c},
          {"canopy_pixel_count", r.canopy_pixel_count}};
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw FormatError("cannot write " + path.string());
  out << text;
}

std::vector<std::map<std::string, std::string>> read_csv_rows(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw SchemaError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError(path.string() + " is empty");
  const auto header = csv::split_line(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r")
      continue;
    const auto cells = csv::split_line(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i)
      row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::string &require(const std::map<std::string, std::string> &row,
                           const std::string &key, const fs::path &path) {
  const auto it = row.find(key);
  if (it == row.end())
    throw SchemaError(path.string() + ": missing column '" + key + "'");
  return it->second;
}

} // namespace

void write_index_rows_csv(const fs::path &path, const std::vector<inventory::IndexRow> &rows) {
  std::ostringstream out;
  out << kIndexHeader << '\n';
  for (const auto &r : rows)
    out << csv::quote(r.capture_id) << ',' << r.instance_id << ','
        << csv::number(r.latitude) << ',' << csv::number(r.longitude) << ','
        << csv::number(r.ndvi_corrected_mean) << ',' << csv::number(r.ctd_c) << ','
        << r.canopy_pixel_count << '\n';
  write_text(path, out.str());
}

std::vector<inventory::IndexRow> read_index_rows_csv(const fs::path &path) {
  std::vector<inventory::IndexRow> rows;
  try {
    for (const auto &row : read_csv_rows(path)) {
      inventory::IndexRow r;
      r.capture_id = require(row, "capture_id", path);
      r.instance_id = std::stoi(require(row, "instance_id", path));
      r.latitude = std::stod(require(row, "lat", path));
      r.longitude = std::stod(require(row, "lon", path));
      r.ndvi_corrected_mean = std::stod(require(row, "ndvi_corrected_mean", path));
      r.ctd_c = std::stod(require(row, "ctd_c", path));
      r.canopy_pixel_count = std::stoull(require(row, "canopy_pixel_count", path));
      rows.push_back(std::move(r));
    }
  } catch (const std::invalid_argument &) {
    throw SchemaError(path.string() + ": non-numeric value in results");
  } catch (const std::out_of_range &) {
    throw SchemaError(path.string() + ": value out of range in results");
  }
  return rows;
}

ProcessSummary cmd_process(const fs::path &captures_dir, const PipelineConfig &cfg,
                           const fs::path &out_dir) {
  cfg.validate();
  const auto captures = discover_captures(captures_dir);
  if (captures.empty())
    throw NoInputError("no captures found in " + captures_dir.string());

  ProcessSummary summary;
  summary.config_hash = config_hash(cfg);
  summary.captures.resize(captures.size());

  // Workers claim captures by index; results land in input order.
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < captures.size(); i = next++)
      summary.captures[i] = process_capture(captures[i], cfg);
  };
  const int nthreads =
      std::max(1, std::min<int>(cfg.workers, static_cast<int>(captures.size())));
  std::vector<std::jthread> pool;
  for (int t = 1; t < nthreads; ++t)
    pool.emplace_back(work);
  work();
  pool.clear();

  std::vector<inventory::IndexRow> rows;
  json manifest_captures = json::array();
  for (const auto &c : summary.captures) {
    switch (c.status) {
    case CaptureStatus::detected:
      ++summary.detected;
      break;
    case CaptureStatus::empty:
      ++summary.empty;
      break;
    case CaptureStatus::failed:
      ++summary.failed;
      break;
    }
    rows.insert(rows.end(), c.rows.begin(), c.rows.end());
    json entry = {{"id", c.id}, {"status", to_string(c.status)}, {"rows", c.rows.size()}};
    if (!c.reason.empty())
      entry["reason"] = c.reason;
    if (!c.warnings.empty())
      entry["warnings"] = c.warnings;
    manifest_captures.push_back(entry);
  }
  summary.rows_emitted = rows.size();

  fs::create_directories(out_dir);
  write_index_rows_csv(out_dir / "results.csv", rows);
  json results = json::array();
  for (const auto &r : rows)
    results.push_back(index_row_json(r));
  write_text(out_dir / "results.json", results.dump(2) + "\n");

  json manifest;
  manifest["config_hash"] = summary.config_hash;
  manifest["config"] = config_to_json(cfg);
  manifest["config"].erase("workers");
  manifest["captures_in"] = summary.captures_in();
  manifest["captures_detected"] = summary.detected;
  manifest["captures_empty"] = summary.empty;
  manifest["captures_failed"] = summary.failed;
  manifest["rows_emitted"] = summary.rows_emitted;
  manifest["captures"] = manifest_captures;
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------- validate

namespace {

json pearson_json(const std::optional<stats::PearsonResult> &p) {
  if (!p)
    return nullptr;
  return {{"r", p->r}, {"p", p->p}, {"n", p->n}, {"significant", p->significant()}};
}

json summary_json(const stats::Summary &s) {
  json j = {{"n", s.n}, {"mean", s.mean}};
  j["sd"] = s.sd ? json(*s.sd) : json(nullptr);
  return j;
}

json groups_json(const std::vector<stats::GroupSummary> &groups) {
  json out = json::array();
  for (const auto &g : groups) {
    json j;
    if (!g.species.empty())
      j["species"] = g.species;
    if (!g.condition.empty())
      j["condition"] = g.condition;
    j["ndvi"] = summary_json(g.ndvi);
    j["ctd"] = summary_json(g.ctd);
    out.push_back(j);
  }
  return out;
}

std::optional<stats::PearsonResult> try_pearson(const std::vector<double> &x,
                                                const std::vector<double> &y) {
  try {
    return stats::pearson(x, y);
  } catch (const UndefinedCorrelationError &) {
    return std::nullopt;
  }
}

} // namespace

json ValidationReport::to_json() const {
  json j;
  j["matched"] = matched;
  j["rows"] = joined.size();
  j["pearson"] = pearson_json(ndvi_vs_remote);
  j["pearson_ctd_vs_condition"] = pearson_json(ctd_vs_condition);
  j["pearson_ndvi_vs_area"] = pearson_json(ndvi_vs_area);
  j["bland_altman"] = {{"mean_diff", bland_altman.mean_diff},
                       {"sd_diff", bland_altman.sd_diff},
                       {"upper_loa", bland_altman.upper_loa},
                       {"lower_loa", bland_altman.lower_loa},
                       {"outside_count", bland_altman.outside_count}};
  json matrix = json::array();
  for (const auto &row : correlation.r) {
    json jr = json::array();
    for (const auto &v : row)
      jr.push_back(v ? json(*v) : json(nullptr));
    matrix.push_back(jr);
  }
  j["correlation_matrix"] = {{"columns", correlation.names}, {"r", matrix}};
  j["aggregates"] = {{"by_species", groups_json(by_species)},
                     {"by_condition", groups_json(by_condition)},
                     {"by_species_condition", groups_json(by_species_condition)}};
  return j;
}

ValidationReport validate_rows(const std::vector<inventory::IndexRow> &rows,
                               const std::vector<inventory::InventoryRecord> &inventory,
                               const PipelineConfig &cfg) {
  ValidationReport report;
  report.joined = inventory::join_results(rows, inventory, cfg.match_radius_m);

  stats::PairedSeries ndvi;
  std::vector<double> ctd, condition, area;
  std::vector<stats::AggregateRow> agg;
  for (const auto &rec : report.joined) {
    if (!rec.tree)
      continue;
    ++report.matched;
    ndvi.measured.push_back(rec.measured_ndvi);
    ndvi.reference.push_back(rec.tree->remote_ndvi);
    ctd.push_back(rec.measured_ctd);
    const std::string cond = inventory::to_string(rec.tree->condition);
    const auto ord = cfg.condition_ordinal.find(cond);
    if (ord == cfg.condition_ordinal.end())
      throw ValidationError("condition ordinal map has no entry for '" + cond + "'");
    condition.push_back(ord->second);
    area.push_back(rec.tree->canopy_area_m2);
    agg.push_back({rec.tree->species, cond, rec.measured_ndvi, rec.measured_ctd});
  }
  if (report.matched < 3)
    throw InsufficientDataError("validation needs at least 3 matched records, got " +
                                std::to_string(report.matched));

  report.ndvi_vs_remote = try_pearson(ndvi.measured, ndvi.reference);
  report.ctd_vs_condition = try_pearson(ctd, condition);
  report.ndvi_vs_area = try_pearson(ndvi.measured, area);
  report.bland_altman = stats::bland_altman(ndvi);
  report.correlation = stats::correlation_matrix({{"measured_ndvi", ndvi.measured},
                                                  {"measured_ctd", ctd},
                                                  {"remote_ndvi", ndvi.reference},
                                                  {"canopy_area_m2", area},
                                                  {"condition", condition}});
  report.by_species = stats::aggregate_by(agg, stats::GroupKey::species);
  report.by_condition = stats::aggregate_by(agg, stats::GroupKey::condition);
  report.by_species_condition = stats::aggregate_by(agg, stats::GroupKey::species_condition);
  return report;
}

ValidationReport cmd_validate(const fs::path &results_path, const fs::path &inventory_path,
                              const PipelineConfig &cfg, const fs::path &out_dir) {
  const auto rows = read_index_rows_csv(results_path);
  const auto inv = inventory::load_inventory(inventory_path);
  for (const auto &d : inv.rejected)
    std::cerr << "inventory row " << d.row << " rejected: " << d.message << '\n';
  ValidationReport report = validate_rows(rows, inv.records, cfg);

  fs::create_directories(out_dir);
  json j = report.to_json();
  j["inventory_rejected"] = inv.rejected.size();
  write_text(out_dir / "validation.json", j.dump(2) + "\n");

  std::ostringstream joined, scatter, ba;
  joined << "capture_id,instance_id,tree_id,species,condition,measured_ndvi,measured_ctd,"
            "remote_ndvi,match_distance_m,duplicate\n";
  scatter << "tree_id,measured_ndvi,remote_ndvi\n";
  for (const auto &r : report.joined) {
    joined << csv::quote(r.capture_id) << ',' << r.instance_id << ','
           << csv::quote(r.tree_id.value_or("")) << ','
           << csv::quote(r.tree ? r.tree->species : "") << ','
           << (r.tree ? inventory::to_string(r.tree->condition) : "") << ','
           << csv::number(r.measured_ndvi) << ',' << csv::number(r.measured_ctd) << ','
           << (r.tree ? csv::number(r.tree->remote_ndvi) : "") << ','
           << (r.match_distance_m ? csv::number(*r.match_distance_m) : "") << ','
           << (r.duplicate ? "true" : "false") << '\n';
    if (r.tree)
      scatter << csv::quote(*r.tree_id) << ',' << csv::number(r.measured_ndvi) << ','
              << csv::number(r.tree->remote_ndvi) << '\n';
  }
  ba << "mean,diff\n";
  for (std::size_t i = 0; i < report.bland_altman.diffs.size(); ++i)
    ba << csv::number(report.bland_altman.means[i]) << ','
       << csv::number(report.bland_altman.diffs[i]) << '\n';
  write_text(out_dir / "joined.csv", joined.str());
  write_text(out_dir / "scatter.csv", scatter.str());
  write_text(out_dir / "bland_altman.csv", ba.str());
  return report;
}

// ---------------------------------------------------------------- eval-seg

json ap_report_to_json(const seg_eval::ApReport &report) {
  auto opt = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
  json ap_at = json::object();
  for (const auto &[t, v] : report.ap_at) {
    char key[16];
    std::snprintf(key, sizeof key, "%.2f", t);
    ap_at[key] = opt(v);
  }
  return {{"AP", opt(report.map_coco)},
          {"AP50", opt(report.ap50())},
          {"AP75", opt(report.ap75())},
          {"ap_at", ap_at}};
}

namespace {

std::map<std::string, fs::path> label_rasters(const fs::path &dir) {
  if (!fs::is_directory(dir))
    throw PairingError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".tif" || ext == ".tiff")
      out[entry.path().filename().string()] = entry.path();
  }
  return out;
}

} // namespace

seg_eval::ApReport cmd_eval_seg(const fs::path &pred_dir, const fs::path &truth_dir,
                                const std::optional<fs::path> &out_path) {
  const auto preds = label_rasters(pred_dir);
  const auto truths = label_rasters(truth_dir);
  std::vector<std::string> orphans;
  for (const auto &[name, _] : preds)
    if (!truths.contains(name))
      orphans.push_back("prediction without truth: " + name);
  for (const auto &[name, _] : truths)
    if (!preds.contains(name))
      orphans.push_back("truth without prediction: " + name);
  if (!orphans.empty()) {
    std::string msg = "unpaired mask files:";
    for (const auto &o : orphans)
      msg += "\n  " + o;
    throw PairingError(msg);
  }

  std::vector<seg_eval::ImageEval> dataset;
  for (const auto &[name, truth_path] : truths) {
    const auto t = raster::load_labels(truth_path);
    const auto truth_set = segmentation::load_external_masks(truth_path, t.width(), t.height());
    const auto pred_set =
        segmentation::load_external_masks(preds.at(name), t.width(), t.height());
    dataset.push_back(seg_eval::image_eval_from(pred_set, truth_set));
  }
  const auto report = seg_eval::coco_map(dataset);
  if (out_path) {
    if (out_path->has_parent_path())
      fs::create_directories(out_path->parent_path());
    json j = ap_report_to_json(report);
    j["images"] = dataset.size();
    write_text(*out_path, j.dump(2) + "\n");
  }
  return report;
}

// ---------------------------------------------------------------- synth

std::size_t cmd_synth(const fs::path &spec_path, const fs::path &out_dir) {
  const auto specs = synthgen::load_scene_specs(spec_path);
  std::set<std::string> ids;
  for (const auto &s : specs)
    if (!ids.insert(s.id).second)
      throw SpecError("duplicate scene id '" + s.id + "'");

  std::ostringstream truth;
  truth << "scene_id,label,target_ndvi,achieved_ndvi,quantization_error,target_temp_c,"
           "achieved_temp_c,target_ctd,achieved_ctd,pixel_count\n";
  for (const auto &spec : specs) {
    const auto scene = synthgen::generate(spec);
    synthgen::write_scene(out_dir, spec, scene);
    for (const auto &t : scene.truth.trees)
      truth << csv::quote(spec.id) << ',' << t.label << ',' << csv::number(t.target_ndvi)
            << ',' << csv::number(t.achieved_ndvi) << ','
            << csv::number(t.quantization_error) << ',' << csv::number(t.target_temp_c)
            << ',' << csv::number(t.achieved_temp_c) << ',' << csv::number(t.target_ctd)
            << ',' << csv::number(t.achieved_ctd) << ',' << t.pixel_count << '\n';
  }
  write_text(out_dir / "truth.csv", truth.str());
  return specs.size();
}

// ---------------------------------------------------------------- flag

std::vector<FlaggedRow> flag_rows(const std::vector<FlagInputRow> &rows, const FlagRule &rule) {
  std::vector<FlaggedRow> out;
  for (const auto &r : rows) {
    const auto it = rule.per_species.find(r.species);
    const double threshold = it == rule.per_species.end() ? rule.default_threshold : it->second;
    if (r.ndvi < threshold)
      out.push_back({r.capture_id, r.instance_id, r.tree_id, r.species, r.ndvi, threshold});
  }
  return out;
}

std::vector<FlaggedRow> cmd_flag(const fs::path &results_path, const FlagRule &rule,
                                 const std::optional<fs::path> &out_path) {
  std::vector<FlagInputRow> rows;
  try {
    for (const auto &row : read_csv_rows(results_path)) {
      FlagInputRow r;
      r.capture_id = require(row, "capture_id", results_path);
      r.instance_id = std::stoi(require(row, "instance_id", results_path));
      auto ndvi = row.find("ndvi_corrected_mean");
      if (ndvi == row.end())
        ndvi = row.find("measured_ndvi");
      if (ndvi == row.end())
        throw SchemaError(results_path.string() + ": no NDVI column");
      r.ndvi = std::stod(ndvi->second);
      if (const auto s = row.find("species"); s != row.end())
        r.species = s->second;
      if (const auto t = row.find("tree_id"); t != row.end())
        r.tree_id = t->second;
      rows.push_back(std::move(r));
    }
  } catch (const std::invalid_argument &) {
    throw SchemaError(results_path.string() + ": non-numeric value");
  }
  const auto flagged = flag_rows(rows, rule);
  if (out_path) {
    std::ostringstream out;
    out << "capture_id,instance_id,tree_id,species,ndvi,threshold,flag\n";
    for (const auto &f : flagged)
      out << csv::quote(f.capture_id) << ',' << f.instance_id << ',' << csv::quote(f.tree_id)
          << ',' << csv::quote(f.species) << ',' << csv::number(f.ndvi) << ','
          << csv::number(f.threshold) << ",attention\n";
    if (out_path->has_parent_path())
      fs::create_directories(out_path->parent_path());
    write_text(*out_path, out.str());
  }
  return flagged;
}

} // namespace greenscan::pipeline

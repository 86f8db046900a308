#pragma once

#include "greenscan/indexes.hpp"
#include "greenscan/inventory.hpp"
#include "greenscan/raster.hpp"
#include "greenscan/registration.hpp"
#include "greenscan/seg_eval.hpp"
#include "greenscan/segmentation.hpp"
#include "greenscan/stats.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace greenscan::pipeline {

/// Every tunable of a run. Defaults are the reference rig calibration.
struct PipelineConfig {
  registration::RegistrationParams registration = registration::default_rig_params();
  segmentation::SegmenterConfig segmenter;
  indexes::IndexConfig indexes;
  raster::TemperatureRange thermal_default_range{-10.0, 40.0};
  double max_timestamp_skew_s = 2.0;
  double match_radius_m = inventory::kDefaultMatchRadiusM;
  stats::OrdinalMap condition_ordinal = stats::default_condition_ordinal();
  int workers = 1;

  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig &cfg);
/// Keys absent from `j` keep their defaults.
PipelineConfig config_from_json(const nlohmann::json &j);
PipelineConfig load_config(const std::filesystem::path &path);

/// FNV-1a 64 of the canonical config JSON, as 16 hex digits. `workers` is
/// excluded because it cannot change results.
std::string config_hash(const PipelineConfig &cfg);

/// One capture triplet found in an input directory.
struct CaptureFiles {
  std::string id;
  std::optional<std::filesystem::path> rgn;
  std::optional<std::filesystem::path> thermal;
  std::optional<std::filesystem::path> meta;
  std::optional<std::filesystem::path> masks;
};

/// `<id>.rgn.{png,tif,tiff}`, `<id>.thermal.{...}`, `<id>.meta.json`,
/// optional `<id>.masks.png`. Sorted by id.
std::vector<CaptureFiles> discover_captures(const std::filesystem::path &dir);

enum class CaptureStatus { detected, empty, failed };
std::string to_string(CaptureStatus s);

struct CaptureOutcome {
  std::string id;
  CaptureStatus status = CaptureStatus::failed;
  std::vector<inventory::IndexRow> rows;
  std::string reason;
  std::vector<std::string> warnings;
};

/// Register -> segment -> indexes for one capture. Never throws; failures are
/// reported in the outcome.
CaptureOutcome process_capture(const CaptureFiles &files, const PipelineConfig &cfg);

/// Same, for an in-memory capture.
std::vector<inventory::IndexRow> process_pair(const std::string &capture_id,
                                              const raster::CapturePair &pair,
                                              const PipelineConfig &cfg,
                                              const segmentation::InstanceMaskSet *external,
                                              std::vector<std::string> *warnings = nullptr);

struct ProcessSummary {
  std::vector<CaptureOutcome> captures; ///< input order
  std::size_t rows_emitted = 0;
  std::size_t detected = 0;
  std::size_t empty = 0;
  std::size_t failed = 0;
  std::string config_hash;

  std::size_t captures_in() const { return captures.size(); }
  bool balanced() const { return detected + empty + failed == captures_in(); }
  /// 0 when every capture was processed, 3 when some failed.
  int exit_code() const { return failed > 0 ? 3 : 0; }
};

/// Writes results.csv, results.json and manifest.json into `out_dir`.
/// Throws NoInputError when `captures_dir` holds no captures.
ProcessSummary cmd_process(const std::filesystem::path &captures_dir,
                           const PipelineConfig &cfg,
                           const std::filesystem::path &out_dir);

void write_index_rows_csv(const std::filesystem::path &path,
                          const std::vector<inventory::IndexRow> &rows);
std::vector<inventory::IndexRow> read_index_rows_csv(const std::filesystem::path &path);

struct ValidationReport {
  std::vector<inventory::TreeHealthRecord> joined;
  std::size_t matched = 0;
  std::optional<stats::PearsonResult> ndvi_vs_remote;
  std::optional<stats::PearsonResult> ctd_vs_condition;
  std::optional<stats::PearsonResult> ndvi_vs_area;
  stats::BlandAltmanResult bland_altman;
  stats::CorrelationMatrix correlation;
  std::vector<stats::GroupSummary> by_species;
  std::vector<stats::GroupSummary> by_condition;
  std::vector<stats::GroupSummary> by_species_condition;

  nlohmann::json to_json() const;
};

/// Joins index rows with the inventory and runs the statistics. Throws
/// InsufficientDataError below 3 matched rows.
ValidationReport validate_rows(const std::vector<inventory::IndexRow> &rows,
                               const std::vector<inventory::InventoryRecord> &inventory,
                               const PipelineConfig &cfg);

/// Writes validation.json, joined.csv, scatter.csv, bland_altman.csv.
ValidationReport cmd_validate(const std::filesystem::path &results_path,
                              const std::filesystem::path &inventory_path,
                              const PipelineConfig &cfg,
                              const std::filesystem::path &out_dir);

nlohmann::json ap_report_to_json(const seg_eval::ApReport &report);

/// Pairs label rasters by file name. Unpaired files -> PairingError.
seg_eval::ApReport cmd_eval_seg(const std::filesystem::path &pred_dir,
                                const std::filesystem::path &truth_dir,
                                const std::optional<std::filesystem::path> &out_path);

/// Generates every scene in the spec file; also writes truth.csv.
std::size_t cmd_synth(const std::filesystem::path &spec_path,
                      const std::filesystem::path &out_dir);

struct FlagRule {
  double default_threshold = 0.0;
  std::map<std::string, double> per_species;
};

struct FlaggedRow {
  std::string capture_id;
  int instance_id = 0;
  std::string tree_id;
  std::string species;
  double ndvi = 0.0;
  double threshold = 0.0;
};

struct FlagInputRow {
  std::string capture_id;
  int instance_id = 0;
  std::string tree_id;
  std::string species;
  double ndvi = 0.0;
};

/// Rows whose NDVI is strictly below their (species) threshold, flagged "attention".
std::vector<FlaggedRow> flag_rows(const std::vector<FlagInputRow> &rows,
                                  const FlagRule &rule);

/// Reads results.csv or joined.csv (species column optional).
std::vector<FlaggedRow> cmd_flag(const std::filesystem::path &results_path,
                                 const FlagRule &rule,
                                 const std::optional<std::filesystem::path> &out_path);

} // namespace greenscan::pipeline

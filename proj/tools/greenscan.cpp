// greenscan: batch driver for the tree-health pipeline.
//
//   greenscan process  <captures_dir> --out DIR [--config FILE] [--workers N] ...
//   greenscan validate <results.csv> <inventory.csv|geojson> --out DIR
//   greenscan eval-seg <pred_dir> <truth_dir> [--out report.json]
//   greenscan synth    <scene.json> --out DIR
//   greenscan flag     <results.csv> --ndvi-threshold T [--species-threshold NAME=T]
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 partial failures.

#include "greenscan/pipeline.hpp"
#include "greenscan/synthgen.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
namespace gp = greenscan::pipeline;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Overrides {
  std::optional<fs::path> config;
  std::optional<int> workers;
  std::optional<double> translate_x, translate_y, zoom;
  std::optional<std::string> units;
  std::optional<double> ndvi_cutoff;
  std::optional<double> radius;
};

void add_config_flags(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--translate-x", o.translate_x, "Registration shift, + = right");
  cmd->add_option("--translate-y", o.translate_y, "Registration shift, + = up");
  cmd->add_option("--zoom", o.zoom, "Registration zoom in (0, 1]");
  cmd->add_option("--translate-units", o.units, "Units of the shift")
      ->check(CLI::IsMember({"source", "thermal"}));
  cmd->add_option("--ndvi-cutoff", o.ndvi_cutoff, "Leaf NDVI cutoff");
  cmd->add_option("--radius", o.radius, "Inventory match radius (m)");
}

gp::PipelineConfig resolve_config(const Overrides &o) {
  gp::PipelineConfig cfg = o.config ? gp::load_config(*o.config) : gp::PipelineConfig{};
  if (o.workers)
    cfg.workers = *o.workers;
  if (o.translate_x)
    cfg.registration.translate_x = *o.translate_x;
  if (o.translate_y)
    cfg.registration.translate_y = *o.translate_y;
  if (o.zoom)
    cfg.registration.zoom = *o.zoom;
  if (o.units)
    cfg.registration.units = *o.units == "source"
                                 ? greenscan::registration::TranslationUnits::source
                                 : greenscan::registration::TranslationUnits::thermal;
  if (o.ndvi_cutoff)
    cfg.segmenter.ndvi_cutoff = *o.ndvi_cutoff;
  if (o.radius)
    cfg.match_radius_m = *o.radius;
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"GreenScan tree-health pipeline"};
  app.require_subcommand(1);

  Overrides overrides;
  fs::path out_dir;

  fs::path captures_dir;
  auto *process = app.add_subcommand("process", "Register, segment and index captures");
  process->add_option("captures_dir", captures_dir)->required();
  process->add_option("--out", out_dir, "Output directory")->required();
  add_config_flags(process, overrides);

  fs::path results_path, inventory_path;
  auto *validate = app.add_subcommand("validate", "Validate results against an inventory");
  validate->add_option("results", results_path)->required()->check(CLI::ExistingFile);
  validate->add_option("inventory", inventory_path)->required()->check(CLI::ExistingFile);
  validate->add_option("--out", out_dir, "Output directory")->required();
  add_config_flags(validate, overrides);

  fs::path pred_dir, truth_dir;
  std::optional<fs::path> report_path;
  auto *eval = app.add_subcommand("eval-seg", "COCO-style mask AP");
  eval->add_option("pred_dir", pred_dir)->required();
  eval->add_option("truth_dir", truth_dir)->required();
  eval->add_option("--out", report_path, "Report JSON path");

  fs::path spec_path;
  std::optional<std::uint64_t> seed;
  auto *synth = app.add_subcommand("synth", "Generate synthetic scenes with known truth");
  synth->add_option("spec", spec_path)->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--seed", seed, "Override the seed of every scene");

  fs::path flag_input;
  double ndvi_threshold = 0.0;
  std::vector<std::string> species_thresholds;
  std::optional<fs::path> flag_out;
  auto *flag = app.add_subcommand("flag", "Flag trees with NDVI below a threshold");
  flag->add_option("results", flag_input)->required()->check(CLI::ExistingFile);
  flag->add_option("--ndvi-threshold", ndvi_threshold, "Default NDVI threshold")->required();
  flag->add_option("--species-threshold", species_thresholds, "NAME=T per-species threshold");
  flag->add_option("--out", flag_out, "Flagged CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*process) {
      const auto cfg = resolve_config(overrides);
      const auto summary = gp::cmd_process(captures_dir, cfg, out_dir);
      std::cout << summary.captures_in() << " captures: " << summary.detected
                << " detected, " << summary.empty << " empty, " << summary.failed
                << " failed; " << summary.rows_emitted << " rows\n";
      for (const auto &c : summary.captures)
        if (c.status == gp::CaptureStatus::failed)
          std::cerr << "failed " << c.id << ": " << c.reason << '\n';
      return summary.exit_code();
    }
    if (*validate) {
      const auto cfg = resolve_config(overrides);
      const auto report = gp::cmd_validate(results_path, inventory_path, cfg, out_dir);
      std::cout << report.matched << " matched records";
      if (report.ndvi_vs_remote)
        std::cout << "; NDVI vs remote r=" << report.ndvi_vs_remote->r
                  << " p=" << report.ndvi_vs_remote->p;
      std::cout << '\n';
      return 0;
    }
    if (*eval) {
      const auto report = gp::cmd_eval_seg(pred_dir, truth_dir, report_path);
      std::cout << gp::ap_report_to_json(report).dump(2) << '\n';
      return 0;
    }
    if (*synth) {
      fs::path spec = spec_path;
      if (seed) {
        auto specs = greenscan::synthgen::load_scene_specs(spec_path);
        nlohmann::json j;
        j["scenes"] = nlohmann::json::array();
        for (auto &s : specs) {
          s.seed = *seed;
          j["scenes"].push_back(greenscan::synthgen::scene_to_json(s));
        }
        fs::create_directories(out_dir);
        spec = out_dir / "scene_spec.resolved.json";
        std::ofstream(spec) << j.dump(2) << '\n';
      }
      const auto n = gp::cmd_synth(spec, out_dir);
      std::cout << "generated " << n << " scene(s) in " << out_dir.string() << '\n';
      return 0;
    }
    if (*flag) {
      gp::FlagRule rule;
      rule.default_threshold = ndvi_threshold;
      for (const auto &s : species_thresholds) {
        const auto eq = s.rfind('=');
        if (eq == std::string::npos) {
          std::cerr << "--species-threshold expects NAME=T, got '" << s << "'\n";
          return kExitUsage;
        }
        rule.per_species[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
      }
      const auto flagged = gp::cmd_flag(flag_input, rule, flag_out);
      for (const auto &f : flagged)
        std::cout << f.capture_id << ',' << f.instance_id << ',' << f.tree_id << ','
                  << f.ndvi << ",attention\n";
      return 0;
    }
  } catch (const greenscan::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

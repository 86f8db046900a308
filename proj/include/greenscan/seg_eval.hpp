#pragma once

#include "greenscan/raster.hpp"
#include "greenscan/segmentation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace greenscan::seg_eval {

struct ScoredMask {
  raster::Mask mask;
  double score = 1.0;
};

/// Predictions and ground truth for one image.
struct ImageEval {
  std::vector<ScoredMask> predictions;
  std::vector<raster::Mask> truths;
};

/// |a & b| / |a | b|; 0 when both are empty.
double mask_iou(const raster::Mask &a, const raster::Mask &b);

/// Detections in global evaluation order after COCO greedy matching.
struct MatchedDetection {
  double score = 0.0;
  bool true_positive = false;
};

struct MatchResult {
  std::vector<MatchedDetection> detections; ///< sorted by descending score
  std::size_t num_truths = 0;
};

/// Per image: predictions by descending score each take the unmatched truth
/// with the highest IoU >= threshold (ties: lower truth index).
MatchResult match_detections(const std::vector<ImageEval> &dataset,
                             double iou_threshold);

inline constexpr int kRecallPoints = 101;

/// 101-point interpolated AP. nullopt when there are neither truths nor
/// predictions; 0 when there are no truths but some predictions.
std::optional<double> average_precision(const std::vector<ImageEval> &dataset,
                                        double iou_threshold);

/// Thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

struct ApReport {
  std::map<double, std::optional<double>> ap_at;
  std::optional<double> map_coco;
  std::optional<double> ap50() const;
  std::optional<double> ap75() const;
};

ApReport coco_map(const std::vector<ImageEval> &dataset);

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Seeded shuffle into k folds whose test sizes differ by at most one.
std::vector<Fold> kfold_split(const std::vector<std::string> &items, int k,
                              std::uint64_t seed);

ImageEval image_eval_from(const segmentation::InstanceMaskSet &predictions,
                          const segmentation::InstanceMaskSet &truths);

} // namespace greenscan::seg_eval

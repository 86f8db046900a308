#include "greenscan/seg_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace greenscan::seg_eval {

double mask_iou(const raster::Mask &a, const raster::Mask &b) {
  if (!a.same_shape(b))
    throw ValidationError("IoU of masks with different dimensions");
  std::size_t inter = 0, uni = 0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const bool x = pa[i] != 0, y = pb[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

MatchResult match_detections(const std::vector<ImageEval> &dataset,
                             double iou_threshold) {
  MatchResult result;
  for (const auto &image : dataset) {
    result.num_truths += image.truths.size();
    std::vector<std::size_t> order(image.predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return image.predictions[a].score > image.predictions[b].score;
    });
    std::vector<bool> taken(image.truths.size(), false);
    for (const std::size_t p : order) {
      const auto &pred = image.predictions[p];
      double best = iou_threshold;
      std::optional<std::size_t> match;
      for (std::size_t g = 0; g < image.truths.size(); ++g) {
        if (taken[g])
          continue;
        const double iou = mask_iou(pred.mask, image.truths[g]);
        if (iou < iou_threshold)
          continue;
        if (!match || iou > best) {
          best = iou;
          match = g;
        }
      }
      if (match)
        taken[*match] = true;
      result.detections.push_back({pred.score, match.has_value()});
    }
  }
  std::stable_sort(result.detections.begin(), result.detections.end(),
                   [](const MatchedDetection &a, const MatchedDetection &b) {
                     return a.score > b.score;
                   });
  return result;
}

std::optional<double> average_precision(const std::vector<ImageEval> &dataset,
                                        double iou_threshold) {
  const MatchResult m = match_detections(dataset, iou_threshold);
  if (m.num_truths == 0)
    return m.detections.empty() ? std::nullopt : std::optional<double>(0.0);
  const std::size_t n = m.detections.size();
  if (n == 0)
    return 0.0;

  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    (m.detections[i].true_positive ? tp : fp) += 1;
    precision[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
    recall[i] = static_cast<double>(tp) / static_cast<double>(m.num_truths);
  }
  // Precision envelope: best precision at any equal-or-higher recall.
  for (std::size_t i = n - 1; i > 0; --i)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  for (int k = 0; k < kRecallPoints; ++k) {
    const double r = k / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end())
      sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i)
    t.push_back((50 + 5 * i) / 100.0);
  return t;
}

std::optional<double> ApReport::ap50() const {
  const auto it = ap_at.find(0.5);
  return it == ap_at.end() ? std::nullopt : it->second;
}

std::optional<double> ApReport::ap75() const {
  const auto it = ap_at.find(0.75);
  return it == ap_at.end() ? std::nullopt : it->second;
}

ApReport coco_map(const std::vector<ImageEval> &dataset) {
  ApReport report;
  double sum = 0.0;
  int defined = 0;
  for (const double t : coco_thresholds()) {
    const auto ap = average_precision(dataset, t);
    report.ap_at[t] = ap;
    if (ap) {
      sum += *ap;
      ++defined;
    }
  }
  if (defined > 0)
    report.map_coco = sum / defined;
  return report;
}

std::vector<Fold> kfold_split(const std::vector<std::string> &items, int k,
                              std::uint64_t seed) {
  if (k < 2)
    throw ValidationError("k-fold needs k >= 2");
  if (static_cast<std::size_t>(k) > items.size())
    throw ValidationError("k-fold needs at least k items");
  std::vector<std::string> shuffled(items);
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  const std::size_t n = shuffled.size();
  const std::size_t base = n / k, extra = n % k;
  std::vector<Fold> folds(k);
  std::size_t begin = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < n; ++i)
      (i >= begin && i < begin + size ? folds[f].test : folds[f].train)
          .push_back(shuffled[i]);
    begin += size;
  }
  return folds;
}

ImageEval image_eval_from(const segmentation::InstanceMaskSet &predictions,
                          const segmentation::InstanceMaskSet &truths) {
  if (predictions.width != truths.width || predictions.height != truths.height)
    throw ValidationError("prediction and truth rasters differ in size");
  ImageEval e;
  for (const auto &inst : predictions.instances)
    e.predictions.push_back({inst.mask, inst.score});
  for (const auto &inst : truths.instances)
    e.truths.push_back(inst.mask);
  return e;
}

} // namespace greenscan::seg_eval

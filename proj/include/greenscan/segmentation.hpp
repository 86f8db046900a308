#pragma once

#include "greenscan/indexes.hpp"
#include "greenscan/raster.hpp"
#include "greenscan/registration.hpp"

#include <filesystem>
#include <vector>

namespace greenscan::segmentation {

struct Instance {
  raster::Mask mask;
  double score = 1.0;
  int label = 0;
};

struct InstanceMaskSet {
  int width = 0;
  int height = 0;
  std::vector<Instance> instances;

  /// Dimensions match and labels are unique.
  void validate() const;
  /// Label raster (0 = background). Overlapping pixels keep the later label.
  raster::Plane<std::uint16_t> to_labels() const;
};

enum class SegmenterMode { threshold, external };

struct SegmenterConfig {
  double ndvi_cutoff = 0.02;
  int median_kernel = 3;
  int min_instance_area = 50;
  SegmenterMode mode = SegmenterMode::threshold;
  void validate() const;
};

/// Connected components of a binary plane, 8-connected, labelled 1..n in
/// raster order of each component's first pixel. Returns n.
int label_components(const raster::Mask &binary, raster::Plane<int> &labels);

/// Reference stage-1 segmenter: NDVI >= cutoff, split into components, drop
/// components below min_instance_area. Score is the mean raw NDVI clamped to [0, 1].
InstanceMaskSet propose_instances_threshold(const registration::RegisteredPair &reg,
                                            const SegmenterConfig &cfg);

/// Label raster + optional `<stem>.scores.json` ({"label": score}).
InstanceMaskSet load_external_masks(const std::filesystem::path &path,
                                    int expected_width, int expected_height);
std::filesystem::path scores_sidecar_path(const std::filesystem::path &labels);

void save_instance_masks(const std::filesystem::path &path,
                         const InstanceMaskSet &set);

/// Majority vote over a k x k window; pixels outside the plane count as false.
raster::Mask median_filter(const raster::Mask &mask, int kernel);

/// Stage 2: clear pixels with raw NDVI below the cutoff (or undefined), then
/// smooth edges with the median filter. Instances left empty are dropped.
InstanceMaskSet remove_noise(const InstanceMaskSet &instances,
                             const registration::RegisteredPair &reg,
                             const SegmenterConfig &cfg);

/// Stage 1 (threshold proposals, or `external` when given) followed by stage 2.
InstanceMaskSet segment(const registration::RegisteredPair &reg,
                        const SegmenterConfig &cfg,
                        const InstanceMaskSet *external = nullptr);

} // namespace greenscan::segmentation

#include "greenscan/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;

namespace greenscan::segmentation {

using raster::Mask;

void InstanceMaskSet::validate() const {
  std::set<int> seen;
  for (const auto &inst : instances) {
    if (inst.mask.width() != width || inst.mask.height() != height)
      throw ValidationError("instance mask does not match set dimensions");
    if (!seen.insert(inst.label).second)
      throw ValidationError("duplicate instance id " + std::to_string(inst.label));
  }
}

raster::Plane<std::uint16_t> InstanceMaskSet::to_labels() const {
  raster::Plane<std::uint16_t> labels(width, height, 0);
  for (const auto &inst : instances) {
    if (inst.label <= 0 || inst.label > 0xFFFF)
      throw ValidationError("instance id not representable in a label raster");
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (inst.mask(x, y))
          labels(x, y) = static_cast<std::uint16_t>(inst.label);
  }
  return labels;
}

void SegmenterConfig::validate() const {
  if (median_kernel < 1 || median_kernel % 2 == 0)
    throw ValidationError("median_kernel must be odd and >= 1");
  if (min_instance_area < 1)
    throw ValidationError("min_instance_area must be >= 1");
}

int label_components(const Mask &binary, raster::Plane<int> &labels) {
  const int w = binary.width();
  const int h = binary.height();
  labels = raster::Plane<int>(w, h, 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (!binary(x0, y0) || labels(x0, y0))
        continue;
      ++next;
      labels(x0, y0) = next;
      stack.emplace_back(x0, y0);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (binary.contains(nx, ny) && binary(nx, ny) && !labels(nx, ny)) {
              labels(nx, ny) = next;
              stack.emplace_back(nx, ny);
            }
          }
      }
    }
  }
  return next;
}

InstanceMaskSet propose_instances_threshold(const registration::RegisteredPair &reg,
                                            const SegmenterConfig &cfg) {
  cfg.validate();
  if (raster::count(reg.valid_mask) == 0)
    throw EmptyFootprintError("registered pair has no valid pixels");
  const auto plane = indexes::ndvi_plane(reg);
  const int w = plane.values.width();
  const int h = plane.values.height();

  Mask binary(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      binary(x, y) = plane.defined(x, y) && plane.values(x, y) >= cfg.ndvi_cutoff;

  raster::Plane<int> labels;
  const int n = label_components(binary, labels);
  std::vector<std::size_t> area(n + 1, 0);
  std::vector<double> ndvi_sum(n + 1, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (const int l = labels(x, y)) {
        ++area[l];
        ndvi_sum[l] += plane.values(x, y);
      }

  InstanceMaskSet out{w, h, {}};
  std::vector<int> remap(n + 1, 0);
  for (int l = 1; l <= n; ++l) {
    if (area[l] < static_cast<std::size_t>(cfg.min_instance_area))
      continue;
    Instance inst;
    inst.label = static_cast<int>(out.instances.size()) + 1;
    inst.score = std::clamp(ndvi_sum[l] / static_cast<double>(area[l]), 0.0, 1.0);
    inst.mask = Mask(w, h, 0);
    remap[l] = static_cast<int>(out.instances.size()) + 1;
    out.instances.push_back(std::move(inst));
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (const int r = remap[labels(x, y)])
        out.instances[r - 1].mask(x, y) = 1;
  return out;
}

fs::path scores_sidecar_path(const fs::path &labels) {
  fs::path p = labels;
  p.replace_extension(".scores.json");
  return p;
}

InstanceMaskSet load_external_masks(const fs::path &path, int expected_width,
                                    int expected_height) {
  const auto labels = raster::load_labels(path);
  if (labels.width() != expected_width || labels.height() != expected_height)
    throw ValidationError(path.string() + ": mask raster is " +
                          std::to_string(labels.width()) + "x" +
                          std::to_string(labels.height()) + ", expected " +
                          std::to_string(expected_width) + "x" +
                          std::to_string(expected_height));

  std::map<int, double> scores;
  if (const auto sidecar = scores_sidecar_path(path); fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    try {
      const json j = json::parse(in);
      for (const auto &[key, value] : j.items())
        scores[std::stoi(key)] = value.get<double>();
    } catch (const std::exception &e) {
      throw FormatError(sidecar.string() + ": malformed scores sidecar: " +
                        e.what());
    }
  }

  std::map<int, Mask> masks;
  for (int y = 0; y < labels.height(); ++y)
    for (int x = 0; x < labels.width(); ++x)
      if (const int l = labels(x, y)) {
        auto [it, inserted] = masks.try_emplace(l);
        if (inserted)
          it->second = Mask(labels.width(), labels.height(), 0);
        it->second(x, y) = 1;
      }

  InstanceMaskSet out{labels.width(), labels.height(), {}};
  for (auto &[label, mask] : masks) {
    const auto s = scores.find(label);
    const double score = s == scores.end() ? 1.0 : s->second;
    if (!(score >= 0.0 && score <= 1.0))
      throw ValidationError("instance score outside [0, 1]");
    out.instances.push_back({std::move(mask), score, label});
  }
  return out;
}

void save_instance_masks(const fs::path &path, const InstanceMaskSet &set) {
  set.validate();
  raster::save_labels(path, set.to_labels());
  json scores = json::object();
  for (const auto &inst : set.instances)
    scores[std::to_string(inst.label)] = inst.score;
  std::ofstream out(scores_sidecar_path(path));
  if (!out)
    throw FormatError("cannot write scores sidecar for " + path.string());
  out << scores.dump(2) << '\n';
}

Mask median_filter(const Mask &mask, int kernel) {
  if (kernel < 1 || kernel % 2 == 0)
    throw ValidationError("median kernel must be odd and >= 1");
  if (kernel == 1)
    return mask;
  const int r = kernel / 2;
  const int w = mask.width();
  const int h = mask.height();
  const int majority = kernel * kernel / 2 + 1;

  // Summed-area table keeps the vote O(1) per pixel.
  std::vector<int> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto S = [&](int x, int y) -> int & {
    return sat[static_cast<std::size_t>(y) * (w + 1) + x];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      S(x + 1, y + 1) = (mask(x, y) ? 1 : 0) + S(x, y + 1) + S(x + 1, y) - S(x, y);

  Mask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
      const int votes = S(x1, y1) - S(x0, y1) - S(x1, y0) + S(x0, y0);
      out(x, y) = votes >= majority ? 1 : 0;
    }
  }
  return out;
}

InstanceMaskSet remove_noise(const InstanceMaskSet &instances,
                             const registration::RegisteredPair &reg,
                             const SegmenterConfig &cfg) {
  cfg.validate();
  instances.validate();
  if (instances.width != reg.valid_mask.width() ||
      instances.height != reg.valid_mask.height())
    throw ValidationError("instance masks are not aligned with the registered pair");
  const auto plane = indexes::ndvi_plane(reg);

  InstanceMaskSet out{instances.width, instances.height, {}};
  for (const auto &inst : instances.instances) {
    Mask leaf(instances.width, instances.height, 0);
    for (int y = 0; y < leaf.height(); ++y)
      for (int x = 0; x < leaf.width(); ++x)
        leaf(x, y) = inst.mask(x, y) && plane.defined(x, y) &&
                     plane.values(x, y) >= cfg.ndvi_cutoff;
    // The vote may only remove pixels: re-adding would bring back sub-cutoff
    // trunk/sky pixels.
    const Mask smoothed = median_filter(leaf, cfg.median_kernel);
    for (std::size_t i = 0; i < leaf.size(); ++i)
      leaf.pixels()[i] = leaf.pixels()[i] && smoothed.pixels()[i];
    if (raster::count(leaf) == 0)
      continue;
    out.instances.push_back({std::move(leaf), inst.score, inst.label});
  }
  return out;
}

InstanceMaskSet segment(const registration::RegisteredPair &reg,
                        const SegmenterConfig &cfg,
                        const InstanceMaskSet *external) {
  cfg.validate();
  if (cfg.mode == SegmenterMode::external) {
    if (!external)
      throw ValidationError("external segmenter mode needs an instance mask set");
    return remove_noise(*external, reg, cfg);
  }
  return remove_noise(propose_instances_threshold(reg, cfg), reg, cfg);
}

} // namespace greenscan::segmentation

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "ap_fixtures.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "pvalue_table.hpp"

#include "greenscan/indexes.hpp"
#include "greenscan/pipeline.hpp"
#include "greenscan/registration.hpp"
#include "greenscan/seg_eval.hpp"
#include "greenscan/segmentation.hpp"
#include "greenscan/stats.hpp"
#include "greenscan/synthgen.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

using namespace greenscan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

registration::RegistrationParams thermal_params(double tx, double ty, double zoom) {
  registration::RegistrationParams p;
  p.translate_x = tx;
  p.translate_y = ty;
  p.zoom = zoom;
  p.units = registration::TranslationUnits::thermal;
  return p;
}

raster::RgnImage random_rgn(std::mt19937_64 &rng, int w, int h) {
  std::uniform_int_distribution<int> byte(0, 255);
  raster::RgnImage img(w, h);
  for (auto *plane : {&img.red(), &img.green(), &img.nir()})
    for (auto &v : plane->pixels())
      v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome radiometry() {
  Outcome o;
  const raster::TemperatureRange range{-10.0, 40.0};
  raster::Plane8 plane(256, 1);
  for (int p = 0; p < 256; ++p)
    plane(p, 0) = static_cast<std::uint8_t>(p);
  const raster::ThermalImage img(plane, range);
  o.require(std::abs(indexes::pixel_temperature(img, 0, 0) + 10.0) <= 1e-3, "P=0");
  o.require(std::abs(indexes::pixel_temperature(img, 255, 0) - 40.0) <= 1e-3, "P=255");
  o.require(std::abs(indexes::pixel_temperature(img, 128, 0) - 15.098) <= 1e-3, "P=128");

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lo(-40.0, 10.0), span(1.0, 80.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = lo(rng);
    const raster::TemperatureRange r{a, a + span(rng)};
    const raster::ThermalImage t(plane, r);
    for (int p = 0; p < 256; ++p) {
      const double expected = r.t_min + (r.t_max - r.t_min) * p / 255.0;
      if (std::abs(indexes::pixel_temperature(t, p, 0) - expected) > 1e-9) {
        o.require(false, "affine property at P=" + std::to_string(p));
        return o;
      }
    }
  }
  o.detail = "P=128 -> " + fmt("%.3f", indexes::pixel_temperature(img, 128, 0)) + " C";
  return o;
}

// ---------------------------------------------------------------- 2

Outcome ndvi_correctness() {
  Outcome o;
  std::mt19937_64 rng(2);
  auto rgn = random_rgn(rng, 1000, 1000);
  // Force some zero-sum and single-zero pixels.
  for (int i = 0; i < 1000; ++i) {
    rgn.red()(i, i) = 0;
    rgn.nir()(i, i) = 0;
    rgn.red()(i, (i + 1) % 1000) = 0;
  }
  const auto reg = testing::identity_pair(rgn);
  const auto t0 = std::chrono::steady_clock::now();
  const auto plane = indexes::ndvi_plane(reg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::size_t undefined = 0;
  for (int y = 0; y < 1000; ++y)
    for (int x = 0; x < 1000; ++x) {
      const int nir = rgn.nir()(x, y), red = rgn.red()(x, y);
      const auto [num, den] = oracle::ndvi_fraction(nir, red);
      if (den == 0) {
        ++undefined;
        o.require(!plane.defined(x, y), "defined at zero sum");
        continue;
      }
      o.require(plane.defined(x, y) != 0, "undefined at nonzero sum");
      const double expected = static_cast<double>(num) / static_cast<double>(den);
      o.require(std::abs(plane.values(x, y) - expected) <= 1e-9, "value mismatch");
      if (!o.pass)
        return o;
    }
  o.require(secs < 5.0, "too slow");
  if (o.pass)
    o.detail = "10^6 pixels, " + std::to_string(undefined) + " undefined, ndvi_plane " +
               fmt("%.3f s", secs);
  return o;
}

// ---------------------------------------------------------------- 3

Outcome correction_fidelity() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 200), kind(0, 9);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  std::size_t degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> raw(size(rng));
    for (auto &x : raw)
      x = v(rng);
    if (kind(rng) == 0) {
      // Non-positive set whose maximum is exactly 0.
      for (auto &x : raw)
        x = -std::abs(x);
      raw[raw.size() / 2] = 0.0;
    }
    double lo = raw[0], hi = raw[0];
    for (double x : raw) {
      lo = x < lo ? x : lo;
      hi = x > hi ? x : hi;
    }
    if (hi == 0.0) {
      ++degenerate;
      bool threw = false;
      try {
        indexes::correct_values(raw);
      } catch (const DegenerateScaleError &) {
        threw = true;
      }
      o.require(threw, "no DegenerateScaleError at max = 0");
      continue;
    }
    std::vector<double> got;
    try {
      got = indexes::correct_values(raw);
    } catch (const Error &e) {
      o.require(false, std::string("unexpected throw: ") + e.what());
      return o;
    }
    for (std::size_t i = 0; i < raw.size(); ++i)
      o.require(std::abs(got[i] - raw[i] * std::abs(lo) / std::abs(hi)) <= 1e-12,
                "corrected value mismatch");
  }
  if (o.pass)
    o.detail = "1000 sets, " + std::to_string(degenerate) + " degenerate";
  return o;
}

// ---------------------------------------------------------------- 4

Outcome end_to_end() {
  Outcome o;
  const auto identity = thermal_params(0, 0, 1.0);
  int noiseless_ok = 0, noisy_ok = 0, trees = 0;
  double worst_ndvi = 0.0, worst_ctd = 0.0;
  for (int seed = 1; seed <= 50; ++seed) {
    const int n = 1 + (seed - 1) % 4;
    for (double sigma : {0.0, 2.0}) {
      const auto spec = synthgen::random_scene(seed, n, sigma);
      const auto scene = synthgen::generate(spec);
      const auto reg = registration::register_pair(scene.capture, identity);
      const auto set = segmentation::segment(reg, {});
      const bool count_ok = static_cast<int>(set.instances.size()) == n;
      if (sigma > 0.0) {
        noisy_ok += count_ok;
        continue;
      }
      noiseless_ok += count_ok;
      // Pair each truth tree with the detection covering most of it.
      for (int t = 0; t < n; ++t) {
        const auto &truth = scene.truth.masks.instances[t].mask;
        const segmentation::Instance *best = nullptr;
        std::size_t best_overlap = 0;
        for (const auto &inst : set.instances) {
          std::size_t overlap = 0;
          for (int y = 0; y < truth.height(); ++y)
            for (int x = 0; x < truth.width(); ++x)
              overlap += truth(x, y) && inst.mask(x, y);
          if (overlap > best_overlap) {
            best_overlap = overlap;
            best = &inst;
          }
        }
        ++trees;
        if (!best) {
          o.require(false, "tree missed in seed " + std::to_string(seed));
          continue;
        }
        const auto ix = indexes::tree_indexes(reg, best->mask, best->label, spec.air_temp_c);
        const double dn = std::abs(ix.ndvi_corrected_mean - spec.trees[t].canopy_raw_ndvi);
        const double dc = std::abs(ix.ctd - (spec.trees[t].canopy_temp_c - spec.air_temp_c));
        worst_ndvi = std::max(worst_ndvi, dn);
        worst_ctd = std::max(worst_ctd, dc);
      }
    }
  }
  o.require(noiseless_ok >= 48, "count match " + std::to_string(noiseless_ok) + "/50");
  o.require(worst_ndvi <= 0.02, "NDVI error " + fmt("%.4f", worst_ndvi));
  o.require(worst_ctd <= 0.5, "CTD error " + fmt("%.4f", worst_ctd));
  if (o.pass)
    o.detail = "count " + std::to_string(noiseless_ok) + "/50 noiseless, " +
               std::to_string(noisy_ok) + "/50 at sigma 2; " + std::to_string(trees) +
               " trees, max |dNDVI| " + fmt("%.4f", worst_ndvi) + ", max |dCTD| " +
               fmt("%.3f C", worst_ctd);
  return o;
}

// ---------------------------------------------------------------- 5

Outcome registration_checks() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> zoom(0.3, 1.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(40, 120);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int tw = dim(rng), th = dim(rng);
    const int rw = tw * (1 + trial % 3), rh = th * (1 + trial % 3);
    const auto p = thermal_params((unit(rng) - 0.5) * tw, (unit(rng) - 0.5) * th, zoom(rng));
    const registration::Warp warp(p, rw, rh, tw, th);
    raster::CapturePair pair;
    pair.rgn = raster::RgnImage(rw, rh, {0, 0, 0});
    pair.thermal = raster::ThermalImage(raster::Plane8(tw, th, 0), {-10, 40});
    std::vector<std::pair<int, int>> probes;
    for (int k = 0; k < 20; ++k) {
      const int x = static_cast<int>(unit(rng) * tw), y = static_cast<int>(unit(rng) * th);
      if (!warp.covers(x, y))
        continue;
      const auto s = registration::invert_registration(p, rw, rh, tw, th, x, y);
      const auto back = warp.to_thermal(s.x, s.y);
      worst = std::max(worst, std::hypot(back.x - x, back.y - y));
      // Mark the source pixel the inverse names; the resampler must fetch it.
      const int sx = std::clamp(static_cast<int>(std::lround(s.x)), 0, rw - 1);
      const int sy = std::clamp(static_cast<int>(std::lround(s.y)), 0, rh - 1);
      pair.rgn.set(sx, sy, {255, static_cast<std::uint8_t>(k + 1), 255});
      probes.push_back({x, y});
    }
    auto nearest = p;
    nearest.interpolation = registration::Interpolation::nearest;
    const auto reg = registration::register_pair(pair, nearest);
    for (const auto &[x, y] : probes)
      o.require(raster::pixel_at(reg.rgn_aligned, x, y).red == 255, "forward(inverse) missed");
  }
  o.require(worst <= 0.5, "composition error " + fmt("%.3g", worst));

  // Identity params reproduce the input bit for bit.
  const auto rgn = random_rgn(rng, 160, 120);
  raster::CapturePair same;
  same.rgn = rgn;
  same.thermal = raster::ThermalImage(raster::Plane8(160, 120, 7), {-10, 40});
  const auto id = registration::register_pair(same, thermal_params(0, 0, 1.0));
  o.require(id.rgn_aligned == rgn, "identity not bit-equal");
  o.require(raster::count(id.valid_mask) == 160u * 120u, "identity footprint");

  // Integer translations at zoom 1: covered area is (W - |tx|)(H - |ty|).
  std::vector<std::array<int, 4>> cases{{400, 300, 50, 150}, {400, 300, -50, -150}};
  std::uniform_int_distribution<int> shift(-39, 39);
  for (int k = 0; k < 30; ++k)
    cases.push_back({80, 60, shift(rng), shift(rng) * 3 / 4});
  for (const auto &[w, h, tx, ty] : cases) {
    const std::size_t expected =
        static_cast<std::size_t>(w - std::abs(tx)) * static_cast<std::size_t>(h - std::abs(ty));
    const auto params = thermal_params(tx, ty, 1.0);
    raster::CapturePair pair;
    pair.rgn = raster::RgnImage(w, h, {1, 2, 3});
    pair.thermal = raster::ThermalImage(raster::Plane8(w, h, 0), {-10, 40});
    const auto reg = registration::register_pair(pair, params);
    o.require(registration::footprint_area(params, w, h, w, h) == expected,
              "footprint_area at (" + std::to_string(tx) + ", " + std::to_string(ty) + ")");
    o.require(raster::count(reg.valid_mask) == expected,
              "valid mask at (" + std::to_string(tx) + ", " + std::to_string(ty) + ")");
  }
  if (o.pass)
    o.detail = "max composition error " + fmt("%.2g px", worst) +
               "; (+50, +150) on 400x300 covers 52500 px";
  return o;
}

// ---------------------------------------------------------------- 6

Outcome segmentation_contract() {
  Outcome o;
  std::mt19937_64 rng(6);
  segmentation::SegmenterConfig cfg;
  std::size_t retained = 0;
  for (int trial = 0; trial < 20; ++trial) {
    // NDVI straddling the cutoff in smooth blobs plus salt noise.
    raster::RgnImage img(96, 72, {100, 100, 100});
    std::uniform_int_distribution<int> jitter(-6, 10);
    for (int y = 0; y < 72; ++y)
      for (int x = 0; x < 96; ++x) {
        const bool blob = ((x / 24) + (y / 18)) % 2 == 0;
        const int red = 100;
        const int nir = blob ? 110 + jitter(rng) : 100 + jitter(rng) / 2;
        img.set(x, y, {static_cast<std::uint8_t>(red), 120, static_cast<std::uint8_t>(nir)});
      }
    const auto reg = testing::identity_pair(img);
    const auto set = segmentation::propose_instances_threshold(reg, cfg);
    for (const auto &inst : set.instances)
      for (int y = 0; y < 72; ++y)
        for (int x = 0; x < 96; ++x) {
          if (!inst.mask(x, y))
            continue;
          ++retained;
          const auto [num, den] = oracle::ndvi_fraction(img.nir()(x, y), img.red()(x, y));
          // num/den >= 1/50 in exact arithmetic.
          o.require(den > 0 && 50 * num >= den, "retained pixel below cutoff");
        }
  }
  o.require(retained > 0, "nothing retained");

  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> dim(1, 80);
    std::uniform_real_distribution<double> density(0.05, 0.7);
    const auto m = testing::random_mask(rng, dim(rng), dim(rng), density(rng));
    raster::Plane<int> labels;
    const int got = segmentation::label_components(m, labels);
    o.require(got == oracle::count_components(m), "component count on plane " +
                                                      std::to_string(trial));
  }
  if (o.pass)
    o.detail = std::to_string(retained) + " retained pixels >= cutoff; 100/100 planes agree";
  return o;
}

// ---------------------------------------------------------------- 7

Outcome ap_oracle() {
  Outcome o;
  using seg_eval::ImageEval;
  std::size_t compared = 0;

  // Exhaustive: truths and predictions drawn from four overlapping rectangles
  // with two score levels.
  const std::vector<raster::Mask> family{
      testing::rect_mask(8, 8, 0, 0, 4, 4), testing::rect_mask(8, 8, 1, 1, 5, 5),
      testing::rect_mask(8, 8, 0, 0, 4, 3), testing::rect_mask(8, 8, 4, 4, 8, 8)};
  for (int tset = 0; tset < 16; ++tset)
    for (int pcode = 0; pcode < 81; ++pcode) {
      ImageEval img;
      for (int i = 0; i < 4; ++i)
        if (tset >> i & 1)
          img.truths.push_back(family[i]);
      int c = pcode;
      for (int i = 0; i < 4; ++i, c /= 3)
        if (c % 3)
          img.predictions.push_back({family[i], c % 3 == 1 ? 0.5 : 0.9});
      const std::vector<ImageEval> data{img};
      const auto ref = testing::to_oracle(data);
      for (double t : {0.5, 0.75}) {
        const auto ap = seg_eval::average_precision(data, t);
        const double expected = oracle::brute_force_ap(ref, t);
        o.require(expected < 0 ? !ap.has_value() : (ap && *ap == expected),
                  "exhaustive family mismatch");
        ++compared;
      }
    }

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto data = testing::random_ap_fixture(rng, 4);
    const auto ref = testing::to_oracle(data);
    for (double t : {0.5, 0.75}) {
      const auto ap = seg_eval::average_precision(data, t);
      const double expected = oracle::brute_force_ap(ref, t);
      o.require(expected < 0 ? !ap.has_value() : (ap && *ap == expected),
                "random fixture mismatch");
      ++compared;
    }
  }

  // Perfect detector.
  std::vector<ImageEval> perfect(3);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const auto m = testing::rect_mask(30, 30, 10 * k, 3 * i, 10 * k + 8, 3 * i + 12);
      perfect[i].truths.push_back(m);
      perfect[i].predictions.push_back({m, 0.3 + 0.2 * k});
    }
  const auto report = seg_eval::coco_map(perfect);
  o.require(report.ap_at.size() == 10, "threshold count");
  for (const auto &[t, ap] : report.ap_at)
    o.require(ap && *ap == 1.0, "perfect detector below 1 at " + fmt("%.2f", t));

  for (int trial = 0; trial < 20; ++trial) {
    const auto data = testing::random_ap_fixture(rng, 6);
    std::optional<double> prev;
    for (const auto &[t, ap] : seg_eval::coco_map(data).ap_at) {
      if (prev && ap)
        o.require(*ap <= *prev, "AP increased with threshold");
      if (ap)
        prev = ap;
    }
  }
  if (o.pass)
    o.detail = std::to_string(compared) + " exact oracle comparisons";
  return o;
}

// ---------------------------------------------------------------- 8

Outcome statistics() {
  Outcome o;
  stats::PairedSeries line;
  for (int i = 0; i < 25; ++i) {
    line.measured.push_back(0.01 * i * i + std::sin(i));
    line.reference.push_back(-3.0 + 7.0 * line.measured.back());
  }
  o.require(std::abs(stats::pearson(line).r - 1.0) <= 1e-12, "linear r");

  double worst_p = 0.0;
  for (const auto &c : oracle::kPValueTable)
    worst_p = std::max(worst_p, std::abs(stats::pearson_p_value(c.r, c.n) - c.p));
  o.require(worst_p <= 1e-6, "p-value error " + fmt("%.3g", worst_p));

  const auto ba = stats::bland_altman({{0.0, 2.0}, {1.0, 1.0}});
  o.require(std::abs(ba.upper_loa - 1.96 * std::sqrt(2.0)) <= 1e-9 &&
                std::abs(ba.lower_loa + 1.96 * std::sqrt(2.0)) <= 1e-9,
            "Bland-Altman limits");

  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  double worst_affine = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    stats::PairedSeries s, t;
    for (int i = 0; i < 30; ++i) {
      const double x = g(rng), y = 0.4 * x + g(rng);
      s.measured.push_back(x);
      s.reference.push_back(y);
      t.measured.push_back(2.5 * x + 1.0);
      t.reference.push_back(0.1 * y - 4.0);
    }
    worst_affine = std::max(worst_affine, std::abs(stats::pearson(s).r - stats::pearson(t).r));
  }
  o.require(worst_affine <= 1e-12, "affine invariance " + fmt("%.3g", worst_affine));
  if (o.pass)
    o.detail = "max p error " + fmt("%.2g", worst_p) + ", max affine drift " +
               fmt("%.2g", worst_affine);
  return o;
}

// ---------------------------------------------------------------- 9

Outcome kfold() {
  Outcome o;
  std::vector<std::string> items;
  for (int i = 0; i < 51; ++i)
    items.push_back("rgn_" + std::to_string(i));
  const auto folds = seg_eval::kfold_split(items, 3, 2022);
  o.require(folds.size() == 3, "fold count");
  std::multiset<std::string> seen;
  for (const auto &f : folds) {
    o.require(f.test.size() == 17, "fold size " + std::to_string(f.test.size()));
    o.require(f.train.size() == 34, "train size");
    const std::set<std::string> test(f.test.begin(), f.test.end());
    for (const auto &t : f.train)
      o.require(!test.contains(t), "train/test overlap");
    seen.insert(f.test.begin(), f.test.end());
  }
  o.require(seen == std::multiset<std::string>(items.begin(), items.end()),
            "test folds do not partition the items");
  const auto again = seg_eval::kfold_split(items, 3, 2022);
  for (std::size_t i = 0; i < folds.size(); ++i)
    o.require(folds[i].test == again[i].test, "not seed-deterministic");
  o.require(seg_eval::kfold_split(items, 3, 2023)[0].test != folds[0].test,
            "seed has no effect");
  if (o.pass)
    o.detail = "17/17/17, disjoint and covering";
  return o;
}

// ---------------------------------------------------------------- 10

Outcome robustness() {
  Outcome o;
  const auto dir = testing::temp_dir("acceptance_batch");
  for (int i = 0; i < 6; ++i) {
    auto spec = synthgen::random_scene(900 + i, 1 + i % 3, 1.0);
    spec.id = "cap" + std::to_string(i);
    synthgen::write_scene(dir / "in", spec, synthgen::generate(spec));
  }
  std::ofstream(dir / "in" / "cap3.rgn.png", std::ios::trunc) << "truncated";
  std::ofstream(dir / "identity.json")
      << R"({"registration": {"translate_x": 0, "translate_y": 0, "zoom": 1, "units": "thermal"}, "workers": 3})";

  auto run = [&](const std::string &out) {
    const std::string cmd = std::string(GREENSCAN_CLI) + " process " + (dir / "in").string() +
                            " --config " + (dir / "identity.json").string() + " --out " +
                            (dir / out).string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int code = run("a");
  o.require(code == 3, "exit code " + std::to_string(code));
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  const auto in = manifest["captures_in"].get<std::size_t>();
  const auto total = manifest["captures_detected"].get<std::size_t>() +
                     manifest["captures_empty"].get<std::size_t>() +
                     manifest["captures_failed"].get<std::size_t>();
  o.require(in == 6 && total == in, "manifest unbalanced");
  o.require(manifest["captures_failed"] == 1, "failed count");
  o.require(run("b") == 3, "rerun exit code");
  for (const char *f : {"results.csv", "results.json", "manifest.json"})
    o.require(slurp(dir / "a" / f) == slurp(dir / "b" / f), std::string(f) + " differs on rerun");
  if (o.pass)
    o.detail = "exit 3, 6 = " + std::to_string(manifest["captures_detected"].get<int>()) +
               " detected + " + std::to_string(manifest["captures_empty"].get<int>()) +
               " empty + 1 failed, rerun identical";
  return o;
}

struct Criterion {
  int id;
  const char *name;
  double budget_s;
  std::function<Outcome()> run;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "radiometry", 1.0, radiometry},
      {2, "ndvi", 5.0, ndvi_correctness},
      {3, "ndvi-correction", 0.0, correction_fidelity},
      {4, "end-to-end", 120.0, end_to_end},
      {5, "registration", 0.0, registration_checks},
      {6, "segmentation", 0.0, segmentation_contract},
      {7, "ap-oracle", 0.0, ap_oracle},
      {8, "statistics", 0.0, statistics},
      {9, "kfold", 0.0, kfold},
      {10, "robustness", 0.0, robustness},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception &e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s)
      out.require(false, "runtime " + fmt("%.2f s", secs) + " over budget");
    failures += !out.pass;
    std::printf("%s %2d %-16s %7.2f s  %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

#include "fixtures.hpp"

#include "greenscan/registration.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace greenscan;
using namespace greenscan::registration;
using raster::RgnImage;

namespace {

raster::CapturePair pair_of(RgnImage rgn, int tw, int th) {
  raster::CapturePair p;
  p.rgn = std::move(rgn);
  p.thermal = raster::ThermalImage(raster::Plane8(tw, th, 77), {-10, 40});
  return p;
}

RgnImage random_rgn(std::mt19937_64 &rng, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  RgnImage img(w, h);
  for (auto *p : {&img.red(), &img.green(), &img.nir()})
    for (auto &px : p->pixels())
      px = static_cast<std::uint8_t>(v(rng));
  return img;
}

RegistrationParams thermal_params(double tx, double ty, double zoom) {
  RegistrationParams p;
  p.translate_x = tx;
  p.translate_y = ty;
  p.zoom = zoom;
  p.units = TranslationUnits::thermal;
  return p;
}

} // namespace

TEST_CASE("identity registration leaves a thermal-resolution image untouched") {
  std::mt19937_64 rng(3);
  const RgnImage img = random_rgn(rng, 40, 30);
  const auto reg = register_pair(pair_of(img, 40, 30), thermal_params(0, 0, 1.0));
  CHECK(reg.rgn_aligned == img);
  CHECK(raster::count(reg.valid_mask) == 40u * 30u);
  CHECK(reg.thermal.values() == raster::Plane8(40, 30, 77));
}

TEST_CASE("reference rig params on a 4000x3000 RGN produce the thermal frame size") {
  const auto reg = register_pair(pair_of(RgnImage(4000, 3000, {50, 60, 70}), 160, 120),
                                 default_rig_params());
  CHECK(reg.rgn_aligned.width() == 160);
  CHECK(reg.rgn_aligned.height() == 120);
  CHECK(reg.valid_mask.width() == 160);
  CHECK(reg.valid_mask.height() == 120);
  // +50 px right, +150 px up in RGN pixels is (3.51, 10.53) thermal px.
  const Warp warp(default_rig_params(), 4000, 3000, 160, 120);
  CHECK(warp.shift().x == doctest::Approx(50.0 * 160 / (0.57 * 4000)));
  CHECK(warp.shift().y == doctest::Approx(150.0 * 120 / (0.57 * 3000)));
  const auto area = raster::count(reg.valid_mask);
  CHECK(area == footprint_area(default_rig_params(), 4000, 3000, 160, 120));
  // Within one row/column of (160 - 3.51) x (120 - 10.53).
  CHECK(std::abs(static_cast<double>(area) - (160 - 3.509) * (120 - 10.526)) <= 160 + 120);
}

TEST_CASE("translation +10 right invalidates exactly the leftmost 10 columns") {
  const auto reg = register_pair(pair_of(RgnImage(60, 40, {9, 8, 7}), 60, 40),
                                 thermal_params(10, 0, 1.0));
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 60; ++x) {
      CHECK(static_cast<bool>(reg.valid_mask(x, y)) == (x >= 10));
      if (reg.valid_mask(x, y))
        CHECK(raster::pixel_at(reg.rgn_aligned, x, y) == raster::RgnPixel{9, 8, 7});
    }
}

TEST_CASE("positive translate_y moves content upward") {
  RgnImage img(20, 20, {0, 0, 0});
  img.set(5, 12, {200, 0, 0});
  const auto reg = register_pair(pair_of(img, 20, 20), thermal_params(0, 3, 1.0));
  CHECK(reg.rgn_aligned.red()(5, 9) == 200);
  // Bottom 3 rows are uncovered.
  for (int x = 0; x < 20; ++x) {
    CHECK(reg.valid_mask(x, 16) == 1);
    CHECK(reg.valid_mask(x, 17) == 0);
  }
}

TEST_CASE("invert_registration examples") {
  const auto id = thermal_params(0, 0, 1.0);
  const auto p = invert_registration(id, 50, 50, 50, 50, 5, 5);
  CHECK(p.x == 5.0);
  CHECK(p.y == 5.0);

  const auto c = invert_registration(thermal_params(0, 0, 0.5), 200, 200, 100, 100, 50, 50);
  CHECK(c.x == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(c.y == doctest::Approx(100.0).epsilon(1e-12));

  const auto t = invert_registration(thermal_params(10, 0, 1.0), 50, 50, 50, 50, 15, 20);
  CHECK(t.x == 5.0);
  CHECK(t.y == 20.0);

  CHECK_THROWS_AS(invert_registration(thermal_params(10, 0, 1.0), 50, 50, 50, 50, 3, 20),
                  OutsideFootprintError);
  CHECK_THROWS_AS(invert_registration(id, 50, 50, 50, 50, 50, 0), OutsideFootprintError);
}

TEST_CASE("parameter validation") {
  const auto pair = pair_of(RgnImage(40, 30), 40, 30);
  CHECK_THROWS_AS(register_pair(pair, thermal_params(0, 0, 0.0)), ValidationError);
  CHECK_THROWS_AS(register_pair(pair, thermal_params(0, 0, 1.2)), ValidationError);
  CHECK_THROWS_AS(register_pair(pair, thermal_params(40, 0, 1.0)), ValidationError);
  CHECK_THROWS_AS(register_pair(pair, thermal_params(0, -30, 1.0)), ValidationError);
  CHECK_NOTHROW(register_pair(pair, thermal_params(39, -29, 1.0)));
}

TEST_CASE("forward(inverse(x, y)) recovers (x, y) for random params") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> zoom(0.2, 1.0), frac(-0.4, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    const int tw = 40 + trial, th = 30 + trial / 2;
    const auto params = thermal_params(frac(rng) * tw, frac(rng) * th, zoom(rng));
    const int rw = 4 * tw + trial, rh = 3 * th + 7;
    const Warp warp(params, rw, rh, tw, th);
    for (int y = 0; y < th; y += 3)
      for (int x = 0; x < tw; x += 3) {
        if (!warp.covers(x, y))
          continue;
        const auto s = invert_registration(params, rw, rh, tw, th, x, y);
        const auto back = warp.to_thermal(s.x, s.y);
        CHECK(std::abs(back.x - x) <= 0.5);
        CHECK(std::abs(back.y - y) <= 0.5);
      }
  }
}

TEST_CASE("valid footprint equals (W - |tx|) x (H - |ty|) for integer shifts") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> sx(-39, 39), sy(-29, 29);
  for (int trial = 0; trial < 40; ++trial) {
    const int tx = sx(rng), ty = sy(rng);
    const auto params = thermal_params(tx, ty, 0.8);
    const auto reg = register_pair(pair_of(RgnImage(120, 90), 40, 30), params);
    const std::size_t expected =
        static_cast<std::size_t>(40 - std::abs(tx)) * static_cast<std::size_t>(30 - std::abs(ty));
    CHECK(raster::count(reg.valid_mask) == expected);
    CHECK(footprint_area(params, 120, 90, 40, 30) == expected);
  }
}

TEST_CASE("nearest interpolation at identity is also exact") {
  std::mt19937_64 rng(4);
  const RgnImage img = random_rgn(rng, 16, 12);
  auto params = thermal_params(2, 1, 1.0);
  params.interpolation = Interpolation::nearest;
  const auto reg = register_pair(pair_of(img, 16, 12), params);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x)
      if (reg.valid_mask(x, y))
        CHECK(raster::pixel_at(reg.rgn_aligned, x, y) == raster::pixel_at(img, x - 2, y + 1));
}

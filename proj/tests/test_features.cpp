#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "biotac/features.hpp"
#include "biotac/rng.hpp"

using namespace biotac;

namespace {

Dataset random_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  for (int t = 0; t < n; ++t) {
    SensorFrame f;
    f.tick = t;
    f.position_mm = {rng.normal(), rng.normal(), rng.normal()};
    f.force_n = {rng.normal(), rng.normal(), rng.normal()};
    f.tdc = rng.uniform(2000, 2600);
    ds.frames.push_back(f);
  }
  return ds;
}

}  // namespace

TEST_CASE("input sizes per combo") {
  int expected[9] = {0, 12, 9, 6, 18, 66, 36, 18, 72};
  for (int combo = 1; combo <= 8; ++combo) {
    WindowSpec spec;
    spec.combo = combo;
    CHECK(input_size(spec) == expected[combo]);
    spec.include_temperature = true;
    CHECK(input_size(spec) == expected[combo] + 1);
  }
}

TEST_CASE("combo 3 is position and force at T") {
  Dataset ds = random_dataset(50, 1);
  WindowSpec spec;
  spec.combo = 3;
  auto v = build_window(ds, 20, spec);
  REQUIRE(v.has_value());
  REQUIRE(v->size() == 6);
  const SensorFrame& f = ds.frames[20];
  CHECK((*v)[0] == f.position_mm.x);
  CHECK((*v)[1] == f.position_mm.y);
  CHECK((*v)[2] == f.position_mm.z);
  CHECK((*v)[3] == f.force_n.x);
  CHECK((*v)[4] == f.force_n.y);
  CHECK((*v)[5] == f.force_n.z);
}

TEST_CASE("out-of-range boundaries") {
  Dataset ds = random_dataset(50, 2);
  WindowSpec spec;
  spec.combo = 1;  // needs T-10 and T+10
  CHECK_FALSE(build_window(ds, 5, spec).has_value());
  CHECK_FALSE(build_window(ds, 45, spec).has_value());
  CHECK(build_window(ds, 10, spec).has_value());
  CHECK(build_window(ds, 39, spec).has_value());
}

TEST_CASE("combo 5 equals manual index-by-index assembly") {
  Dataset ds = random_dataset(100, 3);
  WindowSpec spec;
  spec.combo = 5;
  auto v = build_window(ds, 50, spec);
  REQUIRE(v.has_value());
  REQUIRE(v->size() == 66);
  // Position at T, then forces at T-10 .. T+10.
  std::vector<double> manual;
  manual.push_back(ds.frames[50].position_mm.x);
  manual.push_back(ds.frames[50].position_mm.y);
  manual.push_back(ds.frames[50].position_mm.z);
  for (int o = -10; o <= 10; ++o) {
    manual.push_back(ds.frames[50 + o].force_n.x);
    manual.push_back(ds.frames[50 + o].force_n.y);
    manual.push_back(ds.frames[50 + o].force_n.z);
  }
  CHECK(*v == manual);
}

TEST_CASE("combos 7/8 add positions at T-10 and T+10") {
  Dataset ds = random_dataset(100, 4);
  WindowSpec spec;
  spec.combo = 7;
  auto v = build_window(ds, 50, spec);
  REQUIRE(v.has_value());
  REQUIRE(v->size() == 18);
  CHECK((*v)[0] == ds.frames[40].position_mm.x);
  CHECK((*v)[3] == ds.frames[50].position_mm.x);
  CHECK((*v)[6] == ds.frames[60].position_mm.x);
  CHECK((*v)[9] == ds.frames[40].force_n.x);
}

TEST_CASE("temperature appends last") {
  Dataset ds = random_dataset(100, 5);
  WindowSpec spec;
  spec.combo = 1;
  spec.include_temperature = true;
  auto v = build_window(ds, 50, spec);
  REQUIRE(v.has_value());
  REQUIRE(v->size() == 13);
  CHECK(v->back() == ds.frames[50].tdc);
}

TEST_CASE("windows never cross chunk boundaries") {
  Dataset ds = random_dataset(200, 6);
  WindowSpec spec;
  spec.combo = 1;
  // Tick 95 needs [85, 105], which straddles the 100-tick chunk edge.
  CHECK_FALSE(build_window(ds, 95, spec, 100).has_value());
  CHECK(build_window(ds, 89, spec, 100).has_value());
  CHECK(build_window(ds, 110, spec, 100).has_value());
}

TEST_CASE("every combo produces vectors of the declared size") {
  Dataset ds = random_dataset(120, 7);
  for (int combo = 1; combo <= 8; ++combo) {
    for (bool temp : {false, true}) {
      WindowSpec spec;
      spec.combo = combo;
      spec.include_temperature = temp;
      auto v = build_window(ds, 60, spec);
      REQUIRE(v.has_value());
      CHECK(static_cast<int>(v->size()) == input_size(spec));
    }
  }
}

TEST_CASE("scaler degenerate and two-point cases") {
  Scaler s;
  s.fit({{5.0}, {5.0}, {5.0}});
  CHECK(s.std[0] == 1.0);  // constant channel clamps sigma
  CHECK(s.apply({5.0})[0] == 0.0);

  Scaler t;
  t.fit({{0.0}, {2.0}});
  CHECK(t.mean[0] == doctest::Approx(1.0));
  CHECK(t.std[0] == doctest::Approx(1.0));  // population std of {0,2}
  CHECK(t.apply({0.0})[0] == doctest::Approx(-1.0));
  CHECK(t.apply({2.0})[0] == doctest::Approx(1.0));
}

TEST_CASE("scaler round trip on a random 1000x21 matrix") {
  Rng rng(8);
  std::vector<std::vector<double>> rows(1000, std::vector<double>(21));
  for (auto& r : rows)
    for (double& v : r) v = rng.normal(100.0, 37.0);
  Scaler s;
  s.fit(rows);
  double worst = 0.0;
  for (const auto& r : rows) {
    std::vector<double> back = s.invert(s.apply(r));
    for (std::size_t i = 0; i < r.size(); ++i)
      worst = std::max(worst, std::abs(back[i] - r[i]));
  }
  CHECK(worst < 1e-9);

  // Normalized training data is centered with unit population std.
  std::vector<double> mean(21, 0.0), var(21, 0.0);
  for (const auto& r : rows) {
    std::vector<double> n = s.apply(r);
    for (std::size_t i = 0; i < n.size(); ++i) mean[i] += n[i];
  }
  for (double& m : mean) m /= 1000.0;
  for (const auto& r : rows) {
    std::vector<double> n = s.apply(r);
    for (std::size_t i = 0; i < n.size(); ++i)
      var[i] += (n[i] - mean[i]) * (n[i] - mean[i]);
  }
  for (std::size_t i = 0; i < 21; ++i) {
    CHECK(std::abs(mean[i]) < 1e-9);
    CHECK(std::abs(std::sqrt(var[i] / 1000.0) - 1.0) < 1e-9);
  }
}

TEST_CASE("scaler pair JSON round trip") {
  Rng rng(9);
  std::vector<std::vector<double>> xs(50, std::vector<double>(12)),
      ys(50, std::vector<double>(21));
  for (auto& r : xs)
    for (double& v : r) v = rng.normal();
  for (auto& r : ys)
    for (double& v : r) v = rng.normal(2000, 100);
  ScalerPair p;
  p.inputs.fit(xs);
  p.outputs.fit(ys);
  ScalerPair back = scaler_pair_from_json(scaler_pair_to_json(p));
  CHECK(back.inputs.mean == p.inputs.mean);
  CHECK(back.inputs.std == p.inputs.std);
  CHECK(back.outputs.mean == p.outputs.mean);
  CHECK(back.outputs.std == p.outputs.std);
}

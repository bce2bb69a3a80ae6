#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "driftcast/physics.hpp"
#include "driftcast/rng.hpp"

using namespace driftcast;

TEST_CASE("drag opposes the relative velocity exactly") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    Vec2 v{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    if (std::sqrt(norm2(v)) < 1e-6) continue;
    Vec2 d = drag_force(v, kAirDensity, 1.2, 0.8);
    // cross product zero => parallel; dot negative => anti-parallel
    CHECK(std::abs(d[0] * v[1] - d[1] * v[0]) < 1e-12);
    CHECK(d[0] * v[0] + d[1] * v[1] < 0.0);
  }
}

TEST_CASE("lift is perpendicular to the relative velocity") {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    Vec2 v{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    Vec2 l = lift_force(v, kAirDensity, 0.6, 0.4);
    CHECK(std::abs(l[0] * v[0] + l[1] * v[1]) < 1e-12);
  }
}

TEST_CASE("force magnitudes scale quadratically with speed") {
  Vec2 v{0.6, -0.8};  // unit direction times 1
  Vec2 d1 = drag_force(v, 1000.0, 1.0, 1.0);
  Vec2 v2{1.2, -1.6};
  Vec2 d2 = drag_force(v2, 1000.0, 1.0, 1.0);
  CHECK(std::sqrt(norm2(d2)) ==
        doctest::Approx(4.0 * std::sqrt(norm2(d1))).epsilon(1e-9));

  Vec2 l1 = lift_force(v, 1000.0, 1.0, 1.0);
  Vec2 l2 = lift_force(v2, 1000.0, 1.0, 1.0);
  CHECK(std::sqrt(norm2(l2)) ==
        doctest::Approx(4.0 * std::sqrt(norm2(l1))).epsilon(1e-9));
}

TEST_CASE("hand-derived drag and lift vectors for v = (3, 4)") {
  // rho = 1.225, C_D = 1.2, A = 2.0, |v| = 5:
  //   D = -0.5 * 1.225 * 1.2 * 2.0 * 5 * (3,4) = (-22.05, -29.40)
  Vec2 v{3.0, 4.0};
  Vec2 d = drag_force(v, 1.225, 1.2, 2.0);
  CHECK(d[0] == doctest::Approx(-22.05).epsilon(1e-9));
  CHECK(d[1] == doctest::Approx(-29.40).epsilon(1e-9));

  // C_L = 1.0, A = 1.0: L = 0.5 * 1.225 * 1.0 * 5 * (-4, 3) = (-12.25, 9.1875)
  Vec2 l = lift_force(v, 1.225, 1.0, 1.0);
  CHECK(l[0] == doctest::Approx(-12.25).epsilon(1e-9));
  CHECK(l[1] == doctest::Approx(9.1875).epsilon(1e-9));
}

TEST_CASE("wind power law reference value and identity") {
  CHECK(wind_power_law(2.0, 2.0066, 10.0, 0.10) == doctest::Approx(2.3486).epsilon(5e-5));
  CHECK(wind_power_law(3.7, 5.0, 5.0, 0.10) == 3.7);  // z == z_ref is exact
  Vec2 v = wind_power_law(Vec2{2.0, 0.0}, 2.0066, 10.0, 0.10);
  CHECK(v[0] == doctest::Approx(2.3486).epsilon(5e-5));
  CHECK(v[1] == 0.0);
}

TEST_CASE("submersion rate") {
  CHECK(submersion_rate(1.0, 3.0) == doctest::Approx(0.25));
  CHECK(submersion_rate(2.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("compute_forces uses the fluid-minus-object convention") {
  EnvSample env;
  env.wind = {5.0, 0.0};
  env.current = {0.0, 0.0};
  ObjectSpec obj;
  obj.id = "probe";
  obj.mass = 10.0;
  obj.area_air = 1.0;
  obj.area_water = 1.0;
  obj.cd_air = 1.0;
  obj.cl_air = 0.0;
  obj.cd_water = 1.0;
  obj.cl_water = 0.0;
  // features evaluate D = -1/2 rho C_D A |v~| v~ at v~ = fluid - object, so
  // they must equal the free functions applied to that relative velocity
  Vec2 vel{1.0, 0.0};
  ForceState f = compute_forces(env, obj, vel);
  Vec2 rel_air{env.wind[0] - vel[0], env.wind[1] - vel[1]};
  Vec2 rel_water{env.current[0] - vel[0], env.current[1] - vel[1]};
  Vec2 da = drag_force(rel_air, kAirDensity, obj.cd_air, obj.area_air);
  Vec2 dw = drag_force(rel_water, kWaterDensity, obj.cd_water, obj.area_water);
  CHECK(f.drag_air[0] == da[0]);
  CHECK(f.drag_air[1] == da[1]);
  CHECK(f.drag_water[0] == dw[0]);
  CHECK(f.drag_water[1] == dw[1]);
  // anti-parallel to the relative velocity, as the formula demands
  CHECK(f.drag_air[0] * rel_air[0] < 0.0);
  CHECK(f.submersion == doctest::Approx(0.5));
}

TEST_CASE("feature row layout and contents") {
  EnvSample env;
  env.t = 42.0;
  env.wind = {2.0, -1.0};
  env.current = {0.1, 0.05};
  ObjectSpec obj;
  obj.id = "probe";
  obj.mass = 7.5;
  obj.area_air = 2.0;
  obj.area_water = 0.5;
  obj.cd_air = 1.1;
  obj.cl_air = 0.2;
  obj.cd_water = 0.9;
  obj.cl_water = 0.1;
  Vec2 vel{0.3, 0.0};
  auto row = feature_row(env, obj, vel);
  ForceState f = compute_forces(env, obj, vel);
  REQUIRE(row.size() == kNumericFeatureCount);
  CHECK(row[0] == env.wind[0]);
  CHECK(row[1] == env.wind[1]);
  CHECK(row[2] == env.current[0]);
  CHECK(row[3] == env.current[1]);
  CHECK(row[4] == f.drag_air[0]);
  CHECK(row[5] == f.drag_air[1]);
  CHECK(row[6] == f.drag_water[0]);
  CHECK(row[7] == f.drag_water[1]);
  CHECK(row[8] == f.lift_air[0]);
  CHECK(row[9] == f.lift_air[1]);
  CHECK(row[10] == f.lift_water[0]);
  CHECK(row[11] == f.lift_water[1]);
  CHECK(row[12] == env.t);
  CHECK(row[13] == obj.mass);
  CHECK(row[14] == doctest::Approx(submersion_rate(obj.area_water, obj.area_air)));
}

TEST_CASE("object validation rejects nonphysical specs") {
  ObjectSpec obj;
  obj.id = "bad";
  obj.mass = -1.0;
  CHECK_THROWS(obj.validate());
  obj.mass = 1.0;
  obj.area_air = 0.0;
  obj.area_water = 0.0;
  CHECK_THROWS(obj.validate());
}

TEST_CASE("default catalog is valid and distinct") {
  auto catalog = default_catalog();
  REQUIRE(catalog.size() == 5);
  for (const auto& o : catalog) {
    o.validate();
    CHECK(!o.description.empty());
  }
  for (std::size_t i = 0; i < catalog.size(); ++i)
    for (std::size_t j = i + 1; j < catalog.size(); ++j)
      CHECK(catalog[i].id != catalog[j].id);
}

TEST_CASE("catalog JSON round-trip") {
  auto catalog = default_catalog();
  auto path = (std::filesystem::temp_directory_path() / "driftcast_catalog_test.json").string();
  save_catalog(catalog, path);
  auto loaded = load_catalog(path);
  REQUIRE(loaded.size() == catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    CHECK(loaded[i].id == catalog[i].id);
    CHECK(loaded[i].mass == catalog[i].mass);
    CHECK(loaded[i].cd_air == catalog[i].cd_air);
    CHECK(loaded[i].description == catalog[i].description);
  }
  std::filesystem::remove(path);
}

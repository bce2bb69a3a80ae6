#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "driftcast/simulator.hpp"

using namespace driftcast;

namespace {

ObjectSpec test_object() {
  ObjectSpec obj;
  obj.id = "probe";
  obj.mass = 20.0;
  obj.area_air = 0.5;
  obj.area_water = 0.5;
  obj.cd_air = 1.0;
  obj.cl_air = 0.0;
  obj.cd_water = 1.0;
  obj.cl_water = 0.0;
  obj.description = "test probe";
  return obj;
}

}  // namespace

TEST_CASE("env field is a pure function of time") {
  EnvField field(default_wind_field(), 123);
  Vec2 a = field.at(37.5);
  Vec2 b = field.at(200.0);
  Vec2 a2 = field.at(37.5);  // querying out of order must not matter
  CHECK(a[0] == a2[0]);
  CHECK(a[1] == a2[1]);
  CHECK((a[0] != b[0] || a[1] != b[1]));
}

TEST_CASE("env field speed stays inside the configured band") {
  for (auto cfg : {default_wind_field(), default_current_field()}) {
    EnvField field(cfg, 7);
    for (int i = 0; i <= 3000; ++i) {
      double speed = std::sqrt(norm2(field.at(0.5 * i)));
      CHECK(speed >= cfg.min_speed - 1e-12);
      CHECK(speed <= cfg.max_speed + 1e-12);
    }
  }
}

TEST_CASE("different seeds give different fields, same seed identical") {
  EnvField a(default_wind_field(), 1);
  EnvField b(default_wind_field(), 2);
  EnvField c(default_wind_field(), 1);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    Vec2 va = a.at(10.0 * i), vb = b.at(10.0 * i), vc = c.at(10.0 * i);
    if (va[0] != vb[0] || va[1] != vb[1]) differs = true;
    CHECK(va[0] == vc[0]);
    CHECK(va[1] == vc[1]);
  }
  CHECK(differs);
}

TEST_CASE("uniform flow drives the object to the fluid velocity") {
  // With constant wind and current equal to the same vector, the equilibrium
  // velocity is exactly that vector; the trajectory must converge onto it.
  ScenarioConfig cfg;
  cfg.duration = 300.0;
  cfg.timestep = 1.0;
  cfg.seed = 5;
  cfg.wind.mean_speed = 1.0;
  cfg.wind.min_speed = 1.0;
  cfg.wind.max_speed = 1.0;
  cfg.wind.gust_amp = 0.0;
  cfg.wind.dir_wobble = 0.0;
  cfg.wind.noise_amp = 0.0;
  cfg.wind.rotation_period = 1e18;  // effectively frozen direction
  cfg.wind.theta0 = 0.0;
  cfg.current = cfg.wind;
  auto traj = simulate(cfg, test_object());
  REQUIRE(traj.steps.size() == 300);
  Vec2 v_end = traj.steps.back().velocity;
  CHECK(v_end[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(v_end[1] == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("drift displacement matches the analytic equilibrium at late times") {
  // Same uniform flow: after the transient the position grows linearly at the
  // fluid speed; compare the last 100 s of displacement.
  ScenarioConfig cfg;
  cfg.duration = 400.0;
  cfg.timestep = 1.0;
  cfg.seed = 5;
  cfg.wind.mean_speed = 2.0;
  cfg.wind.min_speed = 2.0;
  cfg.wind.max_speed = 2.0;
  cfg.wind.gust_amp = 0.0;
  cfg.wind.dir_wobble = 0.0;
  cfg.wind.noise_amp = 0.0;
  cfg.wind.rotation_period = 1e18;
  cfg.current = cfg.wind;
  auto traj = simulate(cfg, test_object());
  const auto& a = traj.steps[traj.steps.size() - 101];
  const auto& b = traj.steps.back();
  CHECK((b.position[0] - a.position[0]) == doctest::Approx(2.0 * 100.0).epsilon(1e-3));
}

TEST_CASE("simulation is deterministic") {
  ScenarioConfig cfg;
  cfg.duration = 200.0;
  cfg.seed = 99;
  auto t1 = simulate(cfg, test_object());
  auto t2 = simulate(cfg, test_object());
  REQUIRE(t1.steps.size() == t2.steps.size());
  for (std::size_t i = 0; i < t1.steps.size(); ++i) {
    CHECK(t1.steps[i].position[0] == t2.steps[i].position[0]);
    CHECK(t1.steps[i].position[1] == t2.steps[i].position[1]);
  }
}

TEST_CASE("record count equals duration over timestep") {
  ScenarioConfig cfg;
  cfg.duration = 1500.0;
  cfg.timestep = 1.0;
  cfg.seed = 1;
  auto traj = simulate(cfg, test_object());
  CHECK(traj.steps.size() == 1500);
}

TEST_CASE("campaign shares one environment across objects") {
  ScenarioConfig cfg;
  cfg.duration = 200.0;
  cfg.seed = 4;
  auto catalog = default_catalog();
  auto trajs = run_campaign(cfg, catalog);
  REQUIRE(trajs.size() == catalog.size());
  for (std::size_t i = 1; i < trajs.size(); ++i)
    for (std::size_t s = 0; s < trajs[0].steps.size(); ++s) {
      CHECK(trajs[i].steps[s].env.wind[0] == trajs[0].steps[s].env.wind[0]);
      CHECK(trajs[i].steps[s].env.current[1] == trajs[0].steps[s].env.current[1]);
    }
  // but the objects themselves drift apart
  double max_sep = 0.0;
  for (std::size_t i = 0; i < trajs.size(); ++i)
    for (std::size_t j = i + 1; j < trajs.size(); ++j) {
      const auto& pi = trajs[i].steps.back().position;
      const auto& pj = trajs[j].steps.back().position;
      max_sep = std::max(max_sep, std::abs(pi[0] - pj[0]) + std::abs(pi[1] - pj[1]));
    }
  CHECK(max_sep > 1.0);
}

TEST_CASE("series CSV round-trips at full precision") {
  ScenarioConfig cfg;
  cfg.duration = 60.0;
  cfg.seed = 21;
  auto traj = simulate(cfg, test_object());
  auto path = (std::filesystem::temp_directory_path() / "driftcast_series_test.csv").string();
  export_series(traj, path);
  auto series = import_series(path);
  REQUIRE(series.env.size() == traj.steps.size());
  for (std::size_t i = 0; i < series.env.size(); ++i) {
    CHECK(series.env[i].wind[0] == traj.steps[i].env.wind[0]);
    CHECK(series.env[i].current[1] == traj.steps[i].env.current[1]);
    CHECK(series.position[i][0] == traj.steps[i].position[0]);
    CHECK(series.position[i][1] == traj.steps[i].position[1]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("scenario JSON round-trips") {
  ScenarioConfig cfg;
  cfg.duration = 123.0;
  cfg.timestep = 0.5;
  cfg.seed = 77;
  cfg.wind.mean_speed = 3.3;
  cfg.initial_position = {10.0, -5.0};
  auto path = (std::filesystem::temp_directory_path() / "driftcast_scenario_test.json").string();
  scenario_to_json_file(cfg, path);
  auto loaded = scenario_from_json_file(path);
  CHECK(loaded.duration == cfg.duration);
  CHECK(loaded.timestep == cfg.timestep);
  CHECK(loaded.seed == cfg.seed);
  CHECK(loaded.wind.mean_speed == cfg.wind.mean_speed);
  CHECK(loaded.initial_position[0] == cfg.initial_position[0]);
  std::filesystem::remove(path);
}

TEST_CASE("invalid scenarios are rejected") {
  ScenarioConfig cfg;
  cfg.duration = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg.duration = 100.0;
  cfg.timestep = -1.0;
  CHECK_THROWS(cfg.validate());
}

#include "driftcast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "driftcast/csv.hpp"
#include "driftcast/rng.hpp"

namespace driftcast {

FieldConfig default_wind_field() { return FieldConfig{}; }

FieldConfig default_current_field() {
  FieldConfig f;
  f.mean_speed = 0.09;
  f.min_speed = 0.061;
  f.max_speed = 0.122;
  f.gust_amp = 0.032;
  f.gust_period = 700.0;
  f.rotation_period = 300.0;
  f.dir_wobble = 0.45;
  f.wobble_period = 530.0;
  f.noise_amp = 0.02;
  f.noise_period_min = 15.0;
  f.noise_period_max = 60.0;
  f.theta0 = 1.1;
  return f;
}

EnvField::EnvField(const FieldConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  Rng rng(seed);
  phase_gust_ = rng.uniform(0.0, 2.0 * std::numbers::pi);
  constexpr int kHarmonics = 4;
  for (int k = 1; k <= kHarmonics; ++k) {
    Harmonic h;
    h.amp = cfg.noise_amp / static_cast<double>(k);
    double period = rng.uniform(cfg.noise_period_min, cfg.noise_period_max);
    h.omega = 2.0 * std::numbers::pi / period;
    h.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    noise_.push_back(h);
  }
}

Vec2 EnvField::at(double t) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double speed = cfg_.mean_speed +
                 cfg_.gust_amp * std::sin(two_pi * t / cfg_.gust_period + phase_gust_);
  for (const auto& h : noise_) speed += h.amp * std::sin(h.omega * t + h.phase);
  speed = std::clamp(speed, cfg_.min_speed, cfg_.max_speed);
  double theta = cfg_.theta0 + two_pi * t / cfg_.rotation_period +
                 cfg_.dir_wobble * std::sin(two_pi * t / cfg_.wobble_period);
  return {speed * std::cos(theta), speed * std::sin(theta)};
}

void ScenarioConfig::validate() const {
  if (duration <= 0.0) throw std::invalid_argument("duration must be positive");
  if (timestep <= 0.0) throw std::invalid_argument("timestep must be positive");
  if (timestep > duration) throw std::invalid_argument("timestep exceeds duration");
  for (const FieldConfig* f : {&wind, &current}) {
    if (f->min_speed < 0.0 || f->max_speed < f->min_speed)
      throw std::invalid_argument("field speed band is invalid");
    if (f->rotation_period <= 0.0 || f->gust_period <= 0.0)
      throw std::invalid_argument("field periods must be positive");
  }
}

namespace {

void field_to_json(nlohmann::json& j, const FieldConfig& f) {
  j = {{"mean_speed", f.mean_speed},       {"min_speed", f.min_speed},
       {"max_speed", f.max_speed},         {"gust_amp", f.gust_amp},
       {"gust_period", f.gust_period},     {"rotation_period", f.rotation_period},
       {"dir_wobble", f.dir_wobble},       {"wobble_period", f.wobble_period},
       {"noise_amp", f.noise_amp},         {"noise_period_min", f.noise_period_min},
       {"noise_period_max", f.noise_period_max}, {"theta0", f.theta0}};
}

FieldConfig field_from_json(const nlohmann::json& j, FieldConfig base) {
  auto get = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  get("mean_speed", base.mean_speed);
  get("min_speed", base.min_speed);
  get("max_speed", base.max_speed);
  get("gust_amp", base.gust_amp);
  get("gust_period", base.gust_period);
  get("rotation_period", base.rotation_period);
  get("dir_wobble", base.dir_wobble);
  get("wobble_period", base.wobble_period);
  get("noise_amp", base.noise_amp);
  get("noise_period_min", base.noise_period_min);
  get("noise_period_max", base.noise_period_max);
  get("theta0", base.theta0);
  return base;
}

}  // namespace

ScenarioConfig scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario config: " + path);
  nlohmann::json j;
  in >> j;
  ScenarioConfig cfg;
  if (j.contains("duration")) cfg.duration = j.at("duration").get<double>();
  if (j.contains("timestep")) cfg.timestep = j.at("timestep").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("object_id")) cfg.object_id = j.at("object_id").get<std::string>();
  if (j.contains("wind")) cfg.wind = field_from_json(j.at("wind"), default_wind_field());
  if (j.contains("current"))
    cfg.current = field_from_json(j.at("current"), default_current_field());
  if (j.contains("initial_position")) {
    cfg.initial_position = {j.at("initial_position").at(0).get<double>(),
                            j.at("initial_position").at(1).get<double>()};
  }
  if (j.contains("initial_velocity")) {
    cfg.initial_velocity = {j.at("initial_velocity").at(0).get<double>(),
                            j.at("initial_velocity").at(1).get<double>()};
  }
  cfg.validate();
  return cfg;
}

void scenario_to_json_file(const ScenarioConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["duration"] = cfg.duration;
  j["timestep"] = cfg.timestep;
  j["seed"] = cfg.seed;
  j["object_id"] = cfg.object_id;
  j["initial_position"] = {cfg.initial_position[0], cfg.initial_position[1]};
  j["initial_velocity"] = {cfg.initial_velocity[0], cfg.initial_velocity[1]};
  field_to_json(j["wind"], cfg.wind);
  field_to_json(j["current"], cfg.current);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario config: " + path);
  out << j.dump(2) << "\n";
}

namespace {

Vec2 total_dynamic_force(const ObjectSpec& obj, const Vec2& v, const Vec2& wind,
                         const Vec2& current) {
  // Relative velocity measured from the object so drag opposes the object's
  // motion through each fluid; the feature convention flips the sign.
  Vec2 rel_a{v[0] - wind[0], v[1] - wind[1]};
  Vec2 rel_w{v[0] - current[0], v[1] - current[1]};
  Vec2 da = drag_force(rel_a, kAirDensity, obj.cd_air, obj.area_air);
  Vec2 dw = drag_force(rel_w, kWaterDensity, obj.cd_water, obj.area_water);
  Vec2 la = lift_force(rel_a, kAirDensity, obj.cl_air, obj.area_air);
  Vec2 lw = lift_force(rel_w, kWaterDensity, obj.cl_water, obj.area_water);
  return {da[0] + dw[0] + la[0] + lw[0], da[1] + dw[1] + la[1] + lw[1]};
}

// Linearized drag rate 1/tau, used to bound the substep for stability.
double drag_rate(const ObjectSpec& obj, const Vec2& v, const Vec2& wind,
                 const Vec2& current) {
  auto mag = [](const Vec2& u) { return std::hypot(u[0], u[1]); };
  double sa = mag({v[0] - wind[0], v[1] - wind[1]});
  double sw = mag({v[0] - current[0], v[1] - current[1]});
  double k = kAirDensity * (obj.cd_air + obj.cl_air) * obj.area_air * sa +
             kWaterDensity * (obj.cd_water + obj.cl_water) * obj.area_water * sw;
  return k / obj.mass;
}

}  // namespace

Trajectory simulate(const ScenarioConfig& config, const ObjectSpec& object) {
  config.validate();
  object.validate();
  // Seed offsets keep wind and current decorrelated under the same campaign seed.
  EnvField wind(config.wind, config.seed * 2654435761ull + 17);
  EnvField current(config.current, config.seed * 2654435761ull + 101);

  Trajectory traj;
  traj.object_id = object.id;
  const auto n_steps = static_cast<std::size_t>(std::llround(config.duration / config.timestep));
  traj.steps.reserve(n_steps);

  Vec2 pos = config.initial_position;
  Vec2 vel = config.initial_velocity;
  for (std::size_t i = 0; i < n_steps; ++i) {
    double t = static_cast<double>(i) * config.timestep;
    EnvSample env{t, wind.at(t), current.at(t)};

    TrajectoryStep step;
    step.t = t;
    step.position = pos;
    step.velocity = vel;
    step.env = env;
    step.forces = compute_forces(env, object, vel);
    traj.steps.push_back(step);

    // Advance to the next record with adaptive substeps; the environment is
    // held over the record interval (1 Hz zero-order hold).
    double remaining = config.timestep;
    while (remaining > 0.0) {
      double rate = drag_rate(object, vel, env.wind, env.current);
      double dt = remaining;
      if (rate > 0.0) dt = std::min(dt, 0.2 / rate);
      Vec2 f = total_dynamic_force(object, vel, env.wind, env.current);
      vel[0] += f[0] / object.mass * dt;
      vel[1] += f[1] / object.mass * dt;
      pos[0] += vel[0] * dt;
      pos[1] += vel[1] * dt;
      remaining -= dt;
      if (!std::isfinite(vel[0]) || !std::isfinite(vel[1]) ||
          !std::isfinite(pos[0]) || !std::isfinite(pos[1])) {
        throw std::runtime_error("simulation diverged at step " + std::to_string(i) +
                                 " (object " + object.id + ")");
      }
    }
  }
  return traj;
}

const char* kSeriesCsvHeader = "t,v_a_x,v_a_y,v_w_x,v_w_y,d_x,d_y";

DriftSeries to_series(const Trajectory& traj) {
  DriftSeries s;
  s.object_id = traj.object_id;
  s.env.reserve(traj.steps.size());
  s.position.reserve(traj.steps.size());
  for (const auto& st : traj.steps) {
    s.env.push_back(st.env);
    s.position.push_back(st.position);
  }
  return s;
}

void export_series(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write series: " + path);
  out << kSeriesCsvHeader << "\n";
  for (const auto& st : traj.steps) {
    out << format_g17(st.t) << ',' << format_g17(st.env.wind[0]) << ','
        << format_g17(st.env.wind[1]) << ',' << format_g17(st.env.current[0]) << ','
        << format_g17(st.env.current[1]) << ',' << format_g17(st.position[0]) << ','
        << format_g17(st.position[1]) << "\n";
  }
}

DriftSeries import_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open series: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty series file: " + path);
  if (line != kSeriesCsvHeader)
    throw std::runtime_error("unexpected series header in " + path + ": " + line);
  DriftSeries s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 7)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 7 columns, got " + std::to_string(cells.size()));
    EnvSample env;
    env.t = parse_double(cells[0]);
    env.wind = {parse_double(cells[1]), parse_double(cells[2])};
    env.current = {parse_double(cells[3]), parse_double(cells[4])};
    s.env.push_back(env);
    s.position.push_back({parse_double(cells[5]), parse_double(cells[6])});
  }
  return s;
}

std::vector<Trajectory> run_campaign(const ScenarioConfig& base,
                                     const std::vector<ObjectSpec>& objects) {
  std::vector<Trajectory> out;
  out.reserve(objects.size());
  for (const auto& obj : objects) {
    ScenarioConfig cfg = base;  // same seed: every object drifts in one realization
    cfg.object_id = obj.id;
    out.push_back(simulate(cfg, obj));
  }
  return out;
}

}  // namespace driftcast

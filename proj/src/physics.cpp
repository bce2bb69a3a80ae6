#include "driftcast/physics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace driftcast {

void ObjectSpec::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument(id + ": mass must be > 0");
  if (!(area_air > 0.0))
    throw std::invalid_argument(id + ": wind-exposed area must be > 0");
  if (area_water < 0.0)
    throw std::invalid_argument(id + ": submerged area must be >= 0");
  if (cd_air < 0.0 || cl_air < 0.0 || cd_water < 0.0 || cl_water < 0.0)
    throw std::invalid_argument(id + ": coefficients must be >= 0");
}

double wind_power_law(double v_ref, double z_ref, double z, double beta) {
  if (!(z_ref > 0.0) || !(z > 0.0))
    throw std::invalid_argument("wind_power_law: heights must be positive");
  return v_ref * std::pow(z / z_ref, beta);
}

Vec2 wind_power_law(const Vec2& v_ref, double z_ref, double z, double beta) {
  if (!(z_ref > 0.0) || !(z > 0.0))
    throw std::invalid_argument("wind_power_law: heights must be positive");
  const double factor = std::pow(z / z_ref, beta);
  return {v_ref[0] * factor, v_ref[1] * factor};
}

Vec2 drag_force(const Vec2& rel_v, double rho, double cd, double area) {
  const double speed = std::sqrt(norm2(rel_v));
  const double pre = -0.5 * rho * cd * area * speed;
  return {pre * rel_v[0], pre * rel_v[1]};
}

Vec2 lift_force(const Vec2& rel_v, double rho, double cl, double area) {
  const double speed = std::sqrt(norm2(rel_v));
  const double pre = 0.5 * rho * cl * area * speed;
  return {-pre * rel_v[1], pre * rel_v[0]};
}

double submersion_rate(double area_water, double area_air) {
  if (area_water + area_air <= 0.0)
    throw std::invalid_argument("submersion_rate: total area must be > 0");
  return area_water / (area_water + area_air);
}

ForceState compute_forces(const EnvSample& env, const ObjectSpec& object,
                          const Vec2& object_velocity) {
  const Vec2 rel_air{env.wind[0] - object_velocity[0],
                     env.wind[1] - object_velocity[1]};
  const Vec2 rel_water{env.current[0] - object_velocity[0],
                       env.current[1] - object_velocity[1]};
  ForceState f;
  f.drag_air = drag_force(rel_air, kAirDensity, object.cd_air, object.area_air);
  f.drag_water =
      drag_force(rel_water, kWaterDensity, object.cd_water, object.area_water);
  f.lift_air = lift_force(rel_air, kAirDensity, object.cl_air, object.area_air);
  f.lift_water =
      lift_force(rel_water, kWaterDensity, object.cl_water, object.area_water);
  f.submersion = submersion_rate(object.area_water, object.area_air);
  return f;
}

std::array<double, kNumericFeatureCount> feature_row(
    const EnvSample& env, const ObjectSpec& object, const Vec2& object_velocity) {
  const ForceState f = compute_forces(env, object, object_velocity);
  return {env.wind[0],       env.wind[1],       env.current[0],
          env.current[1],    f.drag_air[0],     f.drag_air[1],
          f.drag_water[0],   f.drag_water[1],   f.lift_air[0],
          f.lift_air[1],     f.lift_water[0],   f.lift_water[1],
          env.t,             object.mass,       f.submersion};
}

std::vector<ObjectSpec> default_catalog() {
  // Three inflatables (10% submerged) and two 3-D printed boats (25%).
  // Coefficients are configuration defaults, refinable via the geometry
  // regressor or by editing the catalog file.
  std::vector<ObjectSpec> v;
  auto mk = [](std::string id, double mass, double area_air, double sub_frac,
               double cd_air, double cl_air, double cd_water, double cl_water,
               std::string desc) {
    ObjectSpec o;
    o.id = std::move(id);
    o.mass = mass;
    o.area_air = area_air;
    o.area_water = sub_frac * area_air;
    o.cd_air = cd_air;
    o.cl_air = cl_air;
    o.cd_water = cd_water;
    o.cl_water = cl_water;
    o.description = std::move(desc);
    return o;
  };
  // Submersion fractions and air/water coefficient ratios are deliberately
  // distinct per object so the equilibrium leeway differs between objects.
  v.push_back(mk("deformed-inflatable", 1.000, 4.067, 0.06, 1.40, 0.55, 1.10, 0.10,
                 "Deformed inflatable raft with sagging tubes, an uneven bow "
                 "and a soft vinyl floor. Light and easily pushed by wind."));
  v.push_back(mk("orange-inflatable", 1.900, 2.759, 0.10, 1.20, 0.40, 1.30, 0.20,
                 "Inflatable orange raft with rounded front and flat rear. "
                 "Constructed of lightweight PVC with no canopy."));
  v.push_back(mk("banana", 5.634, 5.314, 0.14, 1.50, 0.70, 1.20, 0.05,
                 "Long yellow banana-shaped inflatable with upswept ends and "
                 "ridged seating tubes along its spine."));
  v.push_back(mk("orange-3dp", 4.022, 0.834, 0.22, 0.90, 0.30, 1.15, 0.25,
                 "Mainly orange 3-D printed boat hull with a rigid pointed "
                 "bow, hard chines and a flat transom."));
  v.push_back(mk("redblack-3dp", 5.000, 0.932, 0.30, 1.00, 0.35, 1.40, 0.15,
                 "Mainly red and black 3-D printed boat with a rigid layered "
                 "hull, blunt bow and shallow keel."));
  return v;
}

std::vector<ObjectSpec> load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog file: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<ObjectSpec> out;
  for (const auto& e : j) {
    ObjectSpec o;
    o.id = e.at("id").get<std::string>();
    o.mass = e.at("mass").get<double>();
    o.area_air = e.at("area_air").get<double>();
    o.area_water = e.at("area_water").get<double>();
    o.cd_air = e.at("cd_air").get<double>();
    o.cl_air = e.at("cl_air").get<double>();
    o.cd_water = e.at("cd_water").get<double>();
    o.cl_water = e.at("cl_water").get<double>();
    o.description = e.value("description", std::string{});
    o.validate();
    out.push_back(std::move(o));
  }
  return out;
}

void save_catalog(const std::vector<ObjectSpec>& objects,
                  const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& o : objects) {
    j.push_back({{"id", o.id},
                 {"mass", o.mass},
                 {"area_air", o.area_air},
                 {"area_water", o.area_water},
                 {"cd_air", o.cd_air},
                 {"cl_air", o.cl_air},
                 {"cd_water", o.cd_water},
                 {"cl_water", o.cl_water},
                 {"description", o.description}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalog file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace driftcast

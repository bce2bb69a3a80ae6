#pragma once

// Wind extrapolation, drag/lift force components and submersion rate: the
// calculated features that sit alongside the measured environmental series.

#include <array>
#include <string>
#include <vector>

namespace driftcast {

using Vec2 = std::array<double, 2>;

inline double norm2(const Vec2& v) { return v[0] * v[0] + v[1] * v[1]; }

constexpr double kAirDensity = 1.225;     // kg/m^3
constexpr double kWaterDensity = 1025.0;  // kg/m^3
constexpr double kDefaultWindShear = 0.10;  // open water, near-neutral

struct EnvSample {
  double t = 0.0;  // seconds
  Vec2 wind{0.0, 0.0};     // at 10 m, (east, north) m/s
  Vec2 current{0.0, 0.0};  // (east, north) m/s
};

struct ObjectSpec {
  std::string id;
  double mass = 1.0;        // kg
  double area_air = 1.0;    // m^2, wind-exposed
  double area_water = 0.1;  // m^2, submerged
  double cd_air = 1.0;
  double cl_air = 0.0;
  double cd_water = 1.0;
  double cl_water = 0.0;
  std::string description;

  void validate() const;
};

struct ForceState {
  Vec2 drag_air{0.0, 0.0};
  Vec2 drag_water{0.0, 0.0};
  Vec2 lift_air{0.0, 0.0};
  Vec2 lift_water{0.0, 0.0};
  double submersion = 0.0;
};

// Power-law vertical wind profile: v(z) = v_ref * (z / z_ref)^beta.
double wind_power_law(double v_ref, double z_ref, double z,
                      double beta = kDefaultWindShear);
Vec2 wind_power_law(const Vec2& v_ref, double z_ref, double z,
                    double beta = kDefaultWindShear);

// D = -1/2 * rho * C_D * A * |v| * v for relative velocity v.
Vec2 drag_force(const Vec2& rel_v, double rho, double cd, double area);

// L = 1/2 * rho * C_L * A * |v| * (-v_y, v_x): perpendicular to rel_v.
Vec2 lift_force(const Vec2& rel_v, double rho, double cl, double area);

// gamma = A_w / (A_w + A_a)
double submersion_rate(double area_water, double area_air);

// Force features with the relative-velocity convention v_fluid - v_object.
ForceState compute_forces(const EnvSample& env, const ObjectSpec& object,
                          const Vec2& object_velocity);

constexpr std::size_t kNumericFeatureCount = 15;

// Ordered feature vector:
// [v_a(2), v_w(2), D_a(2), D_w(2), L_a(2), L_w(2), T(1), m_o(1), gamma(1)]
std::array<double, kNumericFeatureCount> feature_row(const EnvSample& env,
                                                     const ObjectSpec& object,
                                                     const Vec2& object_velocity);

// --- object catalog (JSON file interface) ---

std::vector<ObjectSpec> default_catalog();
std::vector<ObjectSpec> load_catalog(const std::string& path);
void save_catalog(const std::vector<ObjectSpec>& objects,
                  const std::string& path);

}  // namespace driftcast

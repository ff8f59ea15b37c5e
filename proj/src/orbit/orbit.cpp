#include "eosim/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eosim::orbit {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double mean_motion(const OrbitElements& e) {
  const double a = e.radius_km();
  return std::sqrt(kMuKm3PerS2 / (a * a * a));
}

// Earth-fixed position of a ground point (spherical Earth).
Vec3 ground_position_fixed(const GeoPoint& g) {
  const double r = kEarthRadiusKm + g.altitude_m * 1e-3;
  const double lat = g.latitude_deg * kDegToRad;
  const double lon = g.longitude_deg * kDegToRad;
  return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

}  // namespace

void OrbitElements::validate() const {
  if (!(altitude_km > 0.0)) throw std::invalid_argument("orbit altitude must be positive");
  if (!(inclination_deg >= 0.0 && inclination_deg < 180.0))
    throw std::invalid_argument("orbit inclination must lie in [0, 180)");
}

double orbital_period_s(const OrbitElements& elements) { return 2.0 * std::numbers::pi / mean_motion(elements); }

Vec3 inertial_position(const OrbitElements& e, double t) {
  const double a = e.radius_km();
  const double u = e.initial_phase_deg * kDegToRad + mean_motion(e) * t;
  const double raan = e.raan_offset_deg * kDegToRad;
  const double inc = e.inclination_deg * kDegToRad;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  return {a * (co * cu - so * su * ci), a * (so * cu + co * su * ci), a * (su * si)};
}

double wrap_longitude_deg(double lon) {
  double w = std::fmod(lon + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

PropagatedState propagate_position(const OrbitElements& e, double t) {
  PropagatedState s;
  s.position_km = inertial_position(e, t);
  const Vec3 fixed = rotate_z(s.position_km, -kEarthRotationRadPerS * t);
  const double r = norm(fixed);
  s.subsatellite.latitude_deg = std::asin(std::clamp(fixed[2] / r, -1.0, 1.0)) * kRadToDeg;
  s.subsatellite.longitude_deg = wrap_longitude_deg(std::atan2(fixed[1], fixed[0]) * kRadToDeg);
  s.subsatellite.altitude_m = (r - kEarthRadiusKm) * 1e3;
  return s;
}

Vec3 ground_position_inertial(const GeoPoint& ground, double t) {
  return rotate_z(ground_position_fixed(ground), kEarthRotationRadPerS * t);
}

double elevation_angle(const Vec3& sat_position_km, const GeoPoint& ground, double t) {
  const Vec3 g = ground_position_inertial(ground, t);
  const Vec3 los = sat_position_km - g;
  const double s = dot(los, g) / (norm(los) * norm(g));
  return std::asin(std::clamp(s, -1.0, 1.0)) * kRadToDeg;
}

EclipseState eclipse_state(const Vec3& position_km, double /*t*/, const Vec3& sun_direction) {
  EclipseState e;
  e.sun_unit_vector = normalized(sun_direction);
  const double along = dot(position_km, e.sun_unit_vector);
  if (along > 0.0) return e;
  const Vec3 lateral = position_km - along * e.sun_unit_vector;
  e.in_shadow = norm(lateral) < kEarthRadiusKm;
  return e;
}

std::vector<AccessWindow> compute_access_windows(const OrbitElements& elements, const GeoPoint& target,
                                                 double horizon_s, double min_elevation_deg,
                                                 std::size_t target_id, const AccessSearch& search) {
  if (!(horizon_s > 0.0)) throw std::invalid_argument("access horizon must be positive");
  if (!(min_elevation_deg >= 0.0 && min_elevation_deg < 90.0))
    throw std::invalid_argument("minimum elevation must lie in [0, 90)");

  auto margin = [&](double t) {
    return elevation_angle(inertial_position(elements, t), target, t) - min_elevation_deg;
  };
  // Returns the visible endpoint of a bracket whose ends straddle the threshold.
  auto refine = [&](double invisible_t, double visible_t) {
    while (std::abs(visible_t - invisible_t) > search.refine_tolerance_s) {
      const double mid = 0.5 * (invisible_t + visible_t);
      if (margin(mid) >= 0.0)
        visible_t = mid;
      else
        invisible_t = mid;
    }
    return visible_t;
  };

  std::vector<AccessWindow> windows;
  double prev_t = 0.0;
  double prev_m = margin(0.0);
  bool open = prev_m >= 0.0;
  AccessWindow current{target_id, 0.0, 0.0, prev_m + min_elevation_deg};

  const auto n_steps = static_cast<std::size_t>(std::ceil(horizon_s / search.coarse_step_s));
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double t = std::min(horizon_s, static_cast<double>(i) * search.coarse_step_s);
    const double m = margin(t);
    if (!open && m >= 0.0) {
      current = AccessWindow{target_id, refine(prev_t, t), 0.0, m + min_elevation_deg};
      open = true;
    } else if (open && m < 0.0) {
      current.end_s = refine(t, prev_t);
      if (current.end_s > current.start_s) windows.push_back(current);
      open = false;
    }
    if (open) current.max_elevation_deg = std::max(current.max_elevation_deg, m + min_elevation_deg);
    prev_t = t;
    prev_m = m;
  }
  if (open) {
    current.end_s = horizon_s;
    if (current.end_s > current.start_s) windows.push_back(current);
  }
  return windows;
}

}  // namespace eosim::orbit

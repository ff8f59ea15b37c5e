#pragma once

// Circular two-body orbit kinematics over a spherical rotating Earth.
//
// Frames: the inertial frame is Earth-centred with +z along the spin axis.
// The Earth-fixed frame coincides with it at t = 0 and rotates at the sidereal
// rate afterwards. Lengths are km, angles are degrees at the API boundary.

#include <cstddef>
#include <vector>

#include "eosim/vec3.hpp"

namespace eosim::orbit {

inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kMuKm3PerS2 = 398600.4418;
inline constexpr double kEarthRotationRadPerS = 7.2921150e-5;

struct OrbitElements {
  double altitude_km = 500.0;
  double inclination_deg = 40.0;
  double raan_offset_deg = -75.0;
  double initial_phase_deg = 0.0;

  double radius_km() const { return kEarthRadiusKm + altitude_km; }
  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

struct GeoPoint {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
};

struct AccessWindow {
  std::size_t target_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double max_elevation_deg = 0.0;
};

struct EclipseState {
  bool in_shadow = false;
  Vec3 sun_unit_vector{1.0, 0.0, 0.0};
};

struct PropagatedState {
  Vec3 position_km;
  GeoPoint subsatellite;
};

double orbital_period_s(const OrbitElements& elements);

// Inertial position only; cheaper than propagate_position when the ground
// point is not needed.
Vec3 inertial_position(const OrbitElements& elements, double t);

PropagatedState propagate_position(const OrbitElements& elements, double t);

// Longitude wrapped into [-180, 180).
double wrap_longitude_deg(double lon);

// Ground point position in the inertial frame at time t.
Vec3 ground_position_inertial(const GeoPoint& ground, double t);

// Elevation of the satellite above the local horizon of `ground`, degrees.
double elevation_angle(const Vec3& sat_position_km, const GeoPoint& ground, double t);

// Cylindrical Earth shadow with the sun along `sun_direction` (need not be unit).
EclipseState eclipse_state(const Vec3& position_km, double t, const Vec3& sun_direction = {1.0, 0.0, 0.0});

struct AccessSearch {
  double coarse_step_s = 10.0;
  double refine_tolerance_s = 0.1;
};

// Visibility windows of `target` over [0, horizon_s]. Windows are sorted,
// disjoint, and the reported bounds lie on the visible side of each crossing.
std::vector<AccessWindow> compute_access_windows(const OrbitElements& elements, const GeoPoint& target,
                                                 double horizon_s, double min_elevation_deg,
                                                 std::size_t target_id = 0, const AccessSearch& search = {});

}  // namespace eosim::orbit

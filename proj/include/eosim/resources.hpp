#pragma once

// Per-satellite battery, storage and reaction-wheel dynamics.

#include <array>
#include <string>

#include "eosim/rng.hpp"

namespace eosim::resources {

enum class Payload { kOptical, kSar };

std::string to_string(Payload p);
Payload payload_from_string(const std::string& s);

enum class ActionClass { kImage, kDownlink, kCharge, kDesaturate };

inline constexpr double kSolarConstantWPerM2 = 1361.0;

// Capability profile of one satellite. Power draws are negative (sink convention).
struct SatelliteSpec {
  Payload payload = Payload::kOptical;
  double battery_capacity_Wh = 400.0;
  double storage_capacity_GB = 500.0;
  double instrument_baud_kbps = 500.0;
  double transmitter_baud_Mbps = 100.0;
  double solar_panel_area_m2 = 1.0;
  double solar_efficiency = 0.20;
  double base_power_W = -10.0;
  double instrument_power_W = -30.0;
  double thruster_power_W = -80.0;
  double rw_max_rpm = 6000.0;
  double min_battery_fraction = 0.4;

  // Wheel model parameters.
  double imaging_duration_s = 30.0;
  double slew_momentum_rpm = 150.0;  // per imaging/downlink action
  double desat_unload_rpm = 1500.0;  // per desaturate action
  double wheel_inertia_kgm2 = 0.159;

  void validate() const;
  // Data produced by one capture, GB.
  double capture_size_GB() const { return instrument_baud_kbps * 1e3 * imaging_duration_s / 8.0 / 1e9; }
};

struct ResourceState {
  double battery_Wh = 0.0;
  double storage_used_GB = 0.0;
  std::array<double, 3> rw_speeds_rpm{0.0, 0.0, 0.0};
  bool failed = false;

  double battery_fraction(const SatelliteSpec& spec) const { return battery_Wh / spec.battery_capacity_Wh; }
};

struct PowerLedger {
  double generated_Wh = 0.0;
  double consumed_Wh = 0.0;
  double base_Wh = 0.0;
  double instrument_Wh = 0.0;
  double thruster_Wh = 0.0;
};

struct PowerStep {
  ResourceState state;
  PowerLedger ledger;
};

// Sun incidence used by non-charging actions.
inline constexpr double kIncidentCosNominal = 0.3;

PowerStep step_power(const SatelliteSpec& spec, const ResourceState& state, ActionClass action, bool in_shadow,
                     double sun_incidence_cos, double dt);

struct StorageStep {
  ResourceState state;
  double downlinked_GB = 0.0;
  double captured_GB = 0.0;
  bool capture_infeasible = false;
};

// For kImage one capture is attempted; for kDownlink, `dt` is the time the
// ground link is available.
StorageStep step_storage(const SatelliteSpec& spec, const ResourceState& state, ActionClass action,
                         bool downlink_window_open, double dt);

struct WheelDisturbance {
  double torque_scale_Nm = 0.0;  // std-dev of per-axis disturbance torque
};

// `slew_torque_proxy` is in rpm/s; a slewing action adds |proxy| * dt to one
// randomly chosen axis. Speeds are never clamped here.
ResourceState step_wheels(const SatelliteSpec& spec, const ResourceState& state, ActionClass action,
                          double slew_torque_proxy, double dt, const WheelDisturbance& disturbance, Rng& rng);

// Latches `failed` into the returned flag: true once the state has failed or
// battery fraction < m_b or any |wheel speed| >= rw_max_rpm.
bool check_failure(const SatelliteSpec& spec, const ResourceState& state);

}  // namespace eosim::resources

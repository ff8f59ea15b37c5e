#include "eosim/resources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eosim::resources {

std::string to_string(Payload p) { return p == Payload::kOptical ? "OPT" : "SAR"; }

Payload payload_from_string(const std::string& s) {
  if (s == "OPT" || s == "opt" || s == "optical") return Payload::kOptical;
  if (s == "SAR" || s == "sar") return Payload::kSar;
  throw std::invalid_argument("unknown payload '" + s + "'");
}

void SatelliteSpec::validate() const {
  if (!(battery_capacity_Wh > 0 && storage_capacity_GB > 0 && instrument_baud_kbps > 0 &&
        transmitter_baud_Mbps > 0 && solar_panel_area_m2 > 0 && rw_max_rpm > 0))
    throw std::invalid_argument("satellite capacities must be positive");
  if (!(solar_efficiency > 0 && solar_efficiency <= 1))
    throw std::invalid_argument("solar efficiency must lie in (0, 1]");
  if (!(min_battery_fraction >= 0 && min_battery_fraction < 1))
    throw std::invalid_argument("minimum battery fraction must lie in [0, 1)");
  if (base_power_W > 0 || instrument_power_W > 0 || thruster_power_W > 0)
    throw std::invalid_argument("power draws must be <= 0");
  if (!(imaging_duration_s > 0 && wheel_inertia_kgm2 > 0 && desat_unload_rpm >= 0 && slew_momentum_rpm >= 0))
    throw std::invalid_argument("wheel/imaging parameters out of range");
}

PowerStep step_power(const SatelliteSpec& spec, const ResourceState& state, ActionClass action, bool in_shadow,
                     double sun_incidence_cos, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_power: dt must be positive");
  if (state.failed) throw std::logic_error("step_power: satellite has failed");
  if (!(sun_incidence_cos >= 0.0 && sun_incidence_cos <= 1.0))
    throw std::invalid_argument("step_power: sun incidence cosine must lie in [0, 1]");

  const double hours = dt / 3600.0;
  PowerStep out{state, {}};
  PowerLedger& l = out.ledger;

  double incidence = sun_incidence_cos;
  if (action == ActionClass::kCharge) incidence = 1.0;
  if (in_shadow) incidence = 0.0;
  l.generated_Wh = kSolarConstantWPerM2 * spec.solar_panel_area_m2 * spec.solar_efficiency * incidence * hours;

  l.base_Wh = std::abs(spec.base_power_W) * hours;
  if (action == ActionClass::kImage || action == ActionClass::kDownlink)
    l.instrument_Wh = std::abs(spec.instrument_power_W) * hours;
  if (action == ActionClass::kDesaturate) l.thruster_Wh = std::abs(spec.thruster_power_W) * hours;
  l.consumed_Wh = l.base_Wh + l.instrument_Wh + l.thruster_Wh;

  out.state.battery_Wh =
      std::clamp(state.battery_Wh + l.generated_Wh - l.consumed_Wh, 0.0, spec.battery_capacity_Wh);
  return out;
}

StorageStep step_storage(const SatelliteSpec& spec, const ResourceState& state, ActionClass action,
                         bool downlink_window_open, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_storage: dt must be positive");
  StorageStep out{state, 0.0, 0.0, false};
  if (action == ActionClass::kImage) {
    const double size = spec.capture_size_GB();
    if (state.storage_used_GB + size > spec.storage_capacity_GB) {
      out.capture_infeasible = true;
    } else {
      out.state.storage_used_GB = state.storage_used_GB + size;
      out.captured_GB = size;
    }
  } else if (action == ActionClass::kDownlink && downlink_window_open) {
    const double capacity = spec.transmitter_baud_Mbps * 1e6 * dt / 8.0 / 1e9;
    const double removed = std::min(capacity, state.storage_used_GB);
    out.state.storage_used_GB = std::max(0.0, state.storage_used_GB - removed);
    out.downlinked_GB = removed;
  }
  return out;
}

ResourceState step_wheels(const SatelliteSpec& spec, const ResourceState& state, ActionClass action,
                          double slew_torque_proxy, double dt, const WheelDisturbance& disturbance, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_wheels: dt must be positive");
  ResourceState out = state;
  auto& w = out.rw_speeds_rpm;
  if (action == ActionClass::kImage || action == ActionClass::kDownlink) {
    const auto axis = rng.uniform_int(3);
    w[axis] += std::abs(slew_torque_proxy) * dt;
  }
  if (disturbance.torque_scale_Nm > 0.0) {
    const double rad_s_to_rpm = 60.0 / (2.0 * std::numbers::pi);
    for (auto& v : w) v += rng.normal(0.0, disturbance.torque_scale_Nm) * dt / spec.wheel_inertia_kgm2 * rad_s_to_rpm;
  }
  if (action == ActionClass::kDesaturate) {
    for (auto& v : w) {
      const double unload = std::min(std::abs(v), spec.desat_unload_rpm);
      v -= std::copysign(unload, v);
    }
  }
  return out;
}

bool check_failure(const SatelliteSpec& spec, const ResourceState& state) {
  if (state.failed) return true;
  if (state.battery_fraction(spec) < spec.min_battery_fraction) return true;
  return std::any_of(state.rw_speeds_rpm.begin(), state.rw_speeds_rpm.end(),
                     [&](double v) { return std::abs(v) >= spec.rw_max_rpm; });
}

}  // namespace eosim::resources

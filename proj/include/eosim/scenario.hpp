#pragma once

// Scenario presets (initial resource conditions, degradation) and the
// satellite cluster layouts used by the experiments.

#include <string>
#include <vector>

#include "json.hpp"

#include "eosim/orbit.hpp"
#include "eosim/resources.hpp"

namespace eosim::mission {

// Closed interval; a fixed value has min == max.
struct Range {
  double min = 0.0;
  double max = 0.0;

  static Range fixed(double v) { return {v, v}; }
  bool is_fixed() const { return min == max; }
  double sample(Rng& rng) const { return is_fixed() ? min : rng.uniform(min, max); }
};

struct ScenarioConfig {
  std::string name = "easy";
  Range initial_battery = Range::fixed(1.0);  // fraction of capacity
  Range initial_storage = Range::fixed(0.0);  // fraction of capacity in use
  double disturbance_scale = 0.0;             // disturbance torque std-dev, N*m
  Range initial_rw_rpm = Range::fixed(0.0);   // per axis
  double transmitter_derate = 1.0;            // multiplier on transmitter baud
  double episode_orbits = 1.0;
  double decision_interval_s = 60.0;
  Vec3 sun_direction{1.0, 0.0, 0.0};
  bool terminate_on_failure = false;

  void validate() const;
};

// One of: easy, easy-random-res, hard, hard-random-res.
ScenarioConfig scenario_preset(const std::string& name);
std::vector<std::string> scenario_preset_names();

// JSON keys mirror the struct. Ranges accept a number or {"min":..,"max":..}.
// Missing keys fall back to the preset named by "name" (default easy).
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& s);
ScenarioConfig load_scenario_file(const std::string& path);

struct SatelliteConfig {
  std::string name;
  resources::SatelliteSpec spec;
  orbit::OrbitElements orbit;
};

enum class ClusterKind { kSingle, kHomogeneous3Opt, kHeterogeneous2Opt1Sar };

std::string to_string(ClusterKind k);
ClusterKind cluster_from_string(const std::string& s);

std::vector<SatelliteConfig> make_cluster(ClusterKind kind);

}  // namespace eosim::mission

#include "eosim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace eosim::mission {

namespace {

void check_range(const Range& r, double lo, double hi, const char* what) {
  if (!(r.min <= r.max)) throw std::invalid_argument(std::string(what) + ": min exceeds max");
  if (r.min < lo || r.max > hi)
    throw std::invalid_argument(std::string(what) + ": outside [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
}

Range range_from_json(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return Range::fixed(j.get<double>());
  if (j.is_object() && j.contains("min") && j.contains("max"))
    return {j.at("min").get<double>(), j.at("max").get<double>()};
  throw std::invalid_argument(std::string("scenario: '") + what + "' must be a number or {min, max}");
}

nlohmann::json range_to_json(const Range& r) {
  if (r.is_fixed()) return r.min;
  return {{"min", r.min}, {"max", r.max}};
}

const std::vector<std::string> kAllowedKeys = {
    "name", "initial_battery", "initial_storage", "disturbance_scale", "initial_rw_rpm", "transmitter_derate",
    "episode_orbits", "decision_interval_s", "sun_direction", "terminate_on_failure"};

}  // namespace

void ScenarioConfig::validate() const {
  check_range(initial_battery, 0.0, 1.0, "initial_battery");
  check_range(initial_storage, 0.0, 1.0, "initial_storage");
  check_range(initial_rw_rpm, -1e6, 1e6, "initial_rw_rpm");
  if (!(disturbance_scale >= 0.0)) throw std::invalid_argument("disturbance_scale must be >= 0");
  if (!(transmitter_derate > 0.0 && transmitter_derate <= 1.0))
    throw std::invalid_argument("transmitter_derate must lie in (0, 1]");
  if (!(episode_orbits > 0.0)) throw std::invalid_argument("episode_orbits must be positive");
  if (!(decision_interval_s > 0.0)) throw std::invalid_argument("decision_interval_s must be positive");
  if (!(norm(sun_direction) > 0.0)) throw std::invalid_argument("sun_direction must be non-zero");
}

ScenarioConfig scenario_preset(const std::string& name) {
  ScenarioConfig s;
  s.name = name;
  const auto randomize = [](ScenarioConfig& c) {
    c.initial_battery = {0.80, 0.95};
    c.initial_storage = {0.60, 0.80};
    c.disturbance_scale = 1e-4;
    c.initial_rw_rpm = {-3000.0, 3000.0};
  };
  if (name == "easy") return s;
  if (name == "easy-random-res") {
    randomize(s);
    return s;
  }
  if (name == "hard" || name == "hard-random-res") {
    s.transmitter_derate = 0.7;
    s.initial_battery = Range::fixed(0.85);
    s.initial_storage = Range::fixed(0.60);
    if (name == "hard-random-res") randomize(s);
    return s;
  }
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_preset_names() { return {"easy", "easy-random-res", "hard", "hard-random-res"}; }

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kAllowedKeys.begin(), kAllowedKeys.end(), key) == kAllowedKeys.end())
      throw std::invalid_argument("scenario: unknown key '" + key + "'");
  }
  const std::string name = j.value("name", std::string("easy"));
  ScenarioConfig s;
  try {
    s = scenario_preset(name);
  } catch (const std::invalid_argument&) {
    s.name = name;  // custom scenario built on the easy defaults
  }
  try {
    if (j.contains("initial_battery")) s.initial_battery = range_from_json(j.at("initial_battery"), "initial_battery");
    if (j.contains("initial_storage")) s.initial_storage = range_from_json(j.at("initial_storage"), "initial_storage");
    if (j.contains("initial_rw_rpm")) s.initial_rw_rpm = range_from_json(j.at("initial_rw_rpm"), "initial_rw_rpm");
    if (j.contains("disturbance_scale")) s.disturbance_scale = j.at("disturbance_scale").get<double>();
    if (j.contains("transmitter_derate")) s.transmitter_derate = j.at("transmitter_derate").get<double>();
    if (j.contains("episode_orbits")) s.episode_orbits = j.at("episode_orbits").get<double>();
    if (j.contains("decision_interval_s")) s.decision_interval_s = j.at("decision_interval_s").get<double>();
    if (j.contains("sun_direction")) s.sun_direction = j.at("sun_direction").get<std::array<double, 3>>();
    if (j.contains("terminate_on_failure")) s.terminate_on_failure = j.at("terminate_on_failure").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json scenario_to_json(const ScenarioConfig& s) {
  return {{"name", s.name},
          {"initial_battery", range_to_json(s.initial_battery)},
          {"initial_storage", range_to_json(s.initial_storage)},
          {"disturbance_scale", s.disturbance_scale},
          {"initial_rw_rpm", range_to_json(s.initial_rw_rpm)},
          {"transmitter_derate", s.transmitter_derate},
          {"episode_orbits", s.episode_orbits},
          {"decision_interval_s", s.decision_interval_s},
          {"sun_direction", s.sun_direction},
          {"terminate_on_failure", s.terminate_on_failure}};
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("scenario file '" + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

std::string to_string(ClusterKind k) {
  switch (k) {
    case ClusterKind::kSingle:
      return "single";
    case ClusterKind::kHomogeneous3Opt:
      return "homogeneous-3opt";
    case ClusterKind::kHeterogeneous2Opt1Sar:
      return "heterogeneous-2opt-1sar";
  }
  return "?";
}

ClusterKind cluster_from_string(const std::string& s) {
  if (s == "single") return ClusterKind::kSingle;
  if (s == "homogeneous-3opt") return ClusterKind::kHomogeneous3Opt;
  if (s == "heterogeneous-2opt-1sar") return ClusterKind::kHeterogeneous2Opt1Sar;
  throw std::invalid_argument("unknown cluster '" + s + "'");
}

std::vector<SatelliteConfig> make_cluster(ClusterKind kind) {
  using resources::Payload;
  const auto sat = [](std::string name, Payload p, double inc, double raan, double phase) {
    SatelliteConfig c;
    c.name = std::move(name);
    c.spec.payload = p;
    c.orbit.inclination_deg = inc;
    c.orbit.raan_offset_deg = raan;
    c.orbit.initial_phase_deg = phase;
    return c;
  };
  switch (kind) {
    case ClusterKind::kSingle:
      return {sat("OPT", Payload::kOptical, 40.0, -75.0, 0.0)};
    case ClusterKind::kHomogeneous3Opt:
      return {sat("OPT-1", Payload::kOptical, 41.0, -74.0, 0.0), sat("OPT-2", Payload::kOptical, 41.0, -74.0, -2.0),
              sat("OPT-3", Payload::kOptical, 40.0, -75.0, 0.0)};
    case ClusterKind::kHeterogeneous2Opt1Sar:
      return {sat("OPT-1", Payload::kOptical, 41.0, -74.0, 0.0), sat("OPT-2", Payload::kOptical, 41.0, -74.0, -2.0),
              sat("SAR", Payload::kSar, 40.0, -75.0, 0.0)};
  }
  throw std::invalid_argument("unknown cluster kind");
}

}  // namespace eosim::mission

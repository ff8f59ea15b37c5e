#pragma once

// The cooperative Dec-POMDP: a cluster of satellites sharing one global
// reward, each acting on its own local observation.
//
// Action space per agent (size K + 3):
//   0..K-1  capture the AoI in window slot k of the agent's last observation
//   K       downlink
//   K+1     charge (sun pointing)
//   K+2     desaturate reaction wheels

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eosim/reward.hpp"
#include "eosim/rng.hpp"
#include "eosim/scenario.hpp"
#include "eosim/world.hpp"

namespace eosim::mission {

inline constexpr std::size_t kDefaultWindowSlots = 8;
inline constexpr double kImagingMinElevationDeg = 60.0;

struct EnvOptions {
  std::size_t window_slots = kDefaultWindowSlots;
  double imaging_min_elevation_deg = kImagingMinElevationDeg;
  double lookahead_s = 1200.0;      // observation horizon for upcoming windows
  double power_substep_s = 10.0;    // resource integration step inside a decision
  double nominal_incidence_cos = resources::kIncidentCosNominal;
  RewardParams reward;
};

// Static, shareable part of an environment: targets, stations, the cluster and
// every access window over the episode horizon.
class MissionWorld {
 public:
  MissionWorld(std::vector<AreaOfInterest> aois, std::vector<GroundStation> stations,
               std::vector<SatelliteConfig> cluster, double horizon_s, const EnvOptions& options = {});

  const std::vector<AreaOfInterest>& aois() const { return aois_; }
  const std::vector<GroundStation>& stations() const { return stations_; }
  const std::vector<SatelliteConfig>& cluster() const { return cluster_; }
  double horizon_s() const { return horizon_s_; }
  const EnvOptions& options() const { return options_; }

  // Windows sorted by start time; AoI windows carry AoI ids, station windows station ids.
  const std::vector<orbit::AccessWindow>& aoi_windows(std::size_t agent) const { return aoi_windows_.at(agent); }
  const std::vector<orbit::AccessWindow>& station_windows(std::size_t agent) const {
    return station_windows_.at(agent);
  }
  double max_aoi_window_s(std::size_t agent) const { return max_aoi_window_.at(agent); }

 private:
  std::vector<AreaOfInterest> aois_;
  std::vector<GroundStation> stations_;
  std::vector<SatelliteConfig> cluster_;
  double horizon_s_;
  EnvOptions options_;
  std::vector<std::vector<orbit::AccessWindow>> aoi_windows_;
  std::vector<std::vector<orbit::AccessWindow>> station_windows_;
  std::vector<double> max_aoi_window_;
};

// Horizon needed for a scenario: the episode plus the observation lookahead.
double world_horizon_s(const ScenarioConfig& scenario, const std::vector<SatelliteConfig>& cluster,
                       const EnvOptions& options = {});
std::size_t episode_steps(const ScenarioConfig& scenario, const std::vector<SatelliteConfig>& cluster);

// Loads the bundled AoI/station files from `data_dir` and builds a world for `cluster`.
std::shared_ptr<const MissionWorld> load_world(const std::string& data_dir, std::vector<SatelliteConfig> cluster,
                                               const ScenarioConfig& scenario, const EnvOptions& options = {});

using Observation = std::vector<double>;

enum class ActionKind { kCapture, kDownlink, kCharge, kDesaturate };

// Per-agent entry of the step log.
struct AgentStepLog {
  int action = 0;
  ActionKind kind = ActionKind::kCharge;
  bool active = true;  // false once the agent has failed before this step
  std::optional<std::size_t> target;  // AoI addressed by a capture action
  bool window_open = false;
  bool credited = false;               // x_{j,k,t} = 1
  double priority = 0.0;
  double cloud_cover = 0.0;
  double battery_fraction_prev = 0.0;
  double battery_fraction = 0.0;
  double storage_used_GB = 0.0;
  std::array<double, 3> rw_speeds_rpm{};
  double captured_GB = 0.0;
  double downlinked_GB = 0.0;
  double generated_Wh = 0.0;
  double consumed_Wh = 0.0;
  bool in_shadow = false;
  bool failure_event = false;
  RewardComponents reward;
};

struct StepLog {
  std::size_t index = 0;
  double time_s = 0.0;  // start of the decision interval
  std::vector<AgentStepLog> agents;
  double reward = 0.0;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  std::vector<resources::Payload> payloads;
  std::vector<double> battery_capacity_Wh;
  std::vector<double> initial_battery_fraction;
  std::vector<double> initial_storage_GB;
  std::size_t horizon_steps = 0;
  RewardParams reward_params;
  std::vector<StepLog> steps;
  bool complete = false;
};

struct StepInfo {
  std::size_t captures = 0;
  double downlinked_GB = 0.0;
  std::size_t failures = 0;
};

struct StepResult {
  std::vector<Observation> observations;
  double reward = 0.0;
  std::vector<RewardComponents> components;
  bool done = false;
  StepInfo info;
};

// Thrown for invalid actions or stepping a finished episode.
class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissionEnv {
 public:
  MissionEnv(std::shared_ptr<const MissionWorld> world, ScenarioConfig scenario);

  std::vector<Observation> reset(std::uint64_t seed);
  StepResult step(std::span<const int> joint_action);

  Observation build_observation(std::size_t agent) const;
  // Concatenated observations plus true resource states of every agent.
  std::vector<double> global_state() const;

  std::size_t num_agents() const { return world_->cluster().size(); }
  std::size_t observation_size(std::size_t agent) const;
  std::size_t action_size(std::size_t agent) const;
  std::size_t global_state_size() const;
  std::size_t horizon_steps() const { return horizon_steps_; }
  std::size_t step_index() const { return step_index_; }
  bool done() const { return done_; }
  double time_s() const { return static_cast<double>(step_index_) * scenario_.decision_interval_s; }

  const resources::ResourceState& resource_state(std::size_t agent) const { return states_.at(agent); }
  const resources::SatelliteSpec& effective_spec(std::size_t agent) const { return specs_.at(agent); }
  const ScenarioConfig& scenario() const { return scenario_; }
  const MissionWorld& world() const { return *world_; }
  const EpisodeLog& log() const { return log_; }
  // Who captured each AoI this episode.
  const std::vector<std::optional<std::size_t>>& captured_by() const { return captured_by_; }

 private:
  struct Slot {
    std::size_t aoi = 0;
    double start_s = 0.0;
    double end_s = 0.0;
  };

  std::vector<Slot> upcoming_slots(std::size_t agent) const;
  bool in_shadow(std::size_t agent, double t) const;

  std::shared_ptr<const MissionWorld> world_;
  ScenarioConfig scenario_;
  std::size_t horizon_steps_ = 0;

  std::vector<resources::SatelliteSpec> specs_;
  std::vector<resources::ResourceState> states_;
  std::vector<Rng> wheel_rngs_;
  std::vector<std::vector<Slot>> slot_tables_;
  std::vector<std::vector<bool>> self_captured_;
  std::vector<std::optional<std::size_t>> captured_by_;
  std::size_t step_index_ = 0;
  bool done_ = true;
  bool has_reset_ = false;
  EpisodeLog log_;
};

}  // namespace eosim::mission

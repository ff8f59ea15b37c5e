#include "eosim/environment.hpp"

#include <algorithm>
#include <cmath>

namespace eosim::mission {

using resources::ActionClass;
using resources::ResourceState;

namespace {

constexpr double kSlotDurationScaleS = 120.0;
constexpr double kStationDurationScaleS = 900.0;
constexpr std::size_t kScalarFeatures = 7;
constexpr std::size_t kSlotFeatures = 4;
constexpr std::size_t kStationFeatures = 2;
constexpr std::size_t kPayloadFeatures = 2;
constexpr std::size_t kTrueStateFeatures = 5;

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

ActionKind kind_of(int action, std::size_t slots) {
  const auto a = static_cast<std::size_t>(action);
  if (a < slots) return ActionKind::kCapture;
  if (a == slots) return ActionKind::kDownlink;
  if (a == slots + 1) return ActionKind::kCharge;
  return ActionKind::kDesaturate;
}

ActionClass class_of(ActionKind k) {
  switch (k) {
    case ActionKind::kCapture:
      return ActionClass::kImage;
    case ActionKind::kDownlink:
      return ActionClass::kDownlink;
    case ActionKind::kCharge:
      return ActionClass::kCharge;
    case ActionKind::kDesaturate:
      return ActionClass::kDesaturate;
  }
  return ActionClass::kCharge;
}

// Length of the union of [start, end) windows intersected with [t0, t1).
double covered_seconds(const std::vector<orbit::AccessWindow>& windows, double t0, double t1) {
  std::vector<std::pair<double, double>> parts;
  for (const auto& w : windows) {
    if (w.start_s >= t1) break;
    const double a = std::max(w.start_s, t0), b = std::min(w.end_s, t1);
    if (b > a) parts.emplace_back(a, b);
  }
  std::sort(parts.begin(), parts.end());
  double total = 0.0, cur_a = 0.0, cur_b = -1.0;
  for (const auto& [a, b] : parts) {
    if (a > cur_b) {
      if (cur_b > cur_a) total += cur_b - cur_a;
      cur_a = a;
      cur_b = b;
    } else {
      cur_b = std::max(cur_b, b);
    }
  }
  if (cur_b > cur_a) total += cur_b - cur_a;
  return total;
}

}  // namespace

MissionWorld::MissionWorld(std::vector<AreaOfInterest> aois, std::vector<GroundStation> stations,
                           std::vector<SatelliteConfig> cluster, double horizon_s, const EnvOptions& options)
    : aois_(std::move(aois)),
      stations_(std::move(stations)),
      cluster_(std::move(cluster)),
      horizon_s_(horizon_s),
      options_(options) {
  if (cluster_.empty()) throw std::invalid_argument("cluster must contain at least one satellite");
  if (aois_.empty()) throw std::invalid_argument("world needs at least one AoI");
  if (options_.window_slots == 0) throw std::invalid_argument("window_slots must be positive");
  for (std::size_t i = 0; i < aois_.size(); ++i) aois_[i].id = i;
  for (std::size_t i = 0; i < stations_.size(); ++i) stations_[i].id = i;

  for (const auto& sat : cluster_) {
    sat.orbit.validate();
    sat.spec.validate();
    std::vector<orbit::AccessWindow> aw, sw;
    const double a = sat.orbit.radius_km();
    for (const auto& aoi : aois_) {
      // Skip targets that can never come within the imaging cone of this orbit.
      const double max_lat = sat.orbit.inclination_deg <= 90.0 ? sat.orbit.inclination_deg
                                                              : 180.0 - sat.orbit.inclination_deg;
      const double cone_deg =
          90.0 - options_.imaging_min_elevation_deg -
          std::asin(orbit::kEarthRadiusKm * std::cos(options_.imaging_min_elevation_deg * std::numbers::pi / 180.0) / a) *
              180.0 / std::numbers::pi;
      if (std::abs(aoi.location.latitude_deg) > max_lat + cone_deg + 1.0) continue;
      auto w = orbit::compute_access_windows(sat.orbit, aoi.location, horizon_s_,
                                             options_.imaging_min_elevation_deg, aoi.id);
      aw.insert(aw.end(), w.begin(), w.end());
    }
    for (const auto& gs : stations_) {
      auto w = orbit::compute_access_windows(sat.orbit, gs.location, horizon_s_, gs.min_elevation_deg, gs.id);
      sw.insert(sw.end(), w.begin(), w.end());
    }
    const auto by_start = [](const orbit::AccessWindow& x, const orbit::AccessWindow& y) {
      return x.start_s != y.start_s ? x.start_s < y.start_s : x.target_id < y.target_id;
    };
    std::sort(aw.begin(), aw.end(), by_start);
    std::sort(sw.begin(), sw.end(), by_start);
    double longest = 0.0;
    for (const auto& w : aw) longest = std::max(longest, w.end_s - w.start_s);
    aoi_windows_.push_back(std::move(aw));
    station_windows_.push_back(std::move(sw));
    max_aoi_window_.push_back(longest);
  }
}

std::size_t episode_steps(const ScenarioConfig& scenario, const std::vector<SatelliteConfig>& cluster) {
  double period = 0.0;
  for (const auto& s : cluster) period = std::max(period, orbit::orbital_period_s(s.orbit));
  return static_cast<std::size_t>(std::ceil(scenario.episode_orbits * period / scenario.decision_interval_s));
}

double world_horizon_s(const ScenarioConfig& scenario, const std::vector<SatelliteConfig>& cluster,
                       const EnvOptions& options) {
  return static_cast<double>(episode_steps(scenario, cluster)) * scenario.decision_interval_s + options.lookahead_s;
}

std::shared_ptr<const MissionWorld> load_world(const std::string& data_dir, std::vector<SatelliteConfig> cluster,
                                               const ScenarioConfig& scenario, const EnvOptions& options) {
  auto aois = load_aoi_csv(data_dir + "/aoi_regions.csv");
  auto stations = load_ground_stations(data_dir + "/ground_stations.csv");
  const double horizon = world_horizon_s(scenario, cluster, options);
  return std::make_shared<const MissionWorld>(std::move(aois), std::move(stations), std::move(cluster), horizon,
                                              options);
}

MissionEnv::MissionEnv(std::shared_ptr<const MissionWorld> world, ScenarioConfig scenario)
    : world_(std::move(world)), scenario_(std::move(scenario)) {
  if (!world_) throw std::invalid_argument("MissionEnv needs a world");
  scenario_.validate();
  horizon_steps_ = episode_steps(scenario_, world_->cluster());
  const double needed = static_cast<double>(horizon_steps_) * scenario_.decision_interval_s;
  if (world_->horizon_s() < needed)
    throw std::invalid_argument("world horizon is shorter than the scenario episode");
}

std::size_t MissionEnv::observation_size(std::size_t agent) const {
  (void)world_->cluster().at(agent);
  return kScalarFeatures + kSlotFeatures * world_->options().window_slots + kStationFeatures + kPayloadFeatures;
}

std::size_t MissionEnv::action_size(std::size_t agent) const {
  (void)world_->cluster().at(agent);
  return world_->options().window_slots + 3;
}

std::size_t MissionEnv::global_state_size() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < num_agents(); ++i) n += observation_size(i) + kTrueStateFeatures;
  return n;
}

std::vector<Observation> MissionEnv::reset(std::uint64_t seed) {
  const auto& cluster = world_->cluster();
  const std::size_t n = cluster.size();
  Rng init(derive_seed(seed, {0}));

  specs_.clear();
  states_.clear();
  wheel_rngs_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    auto spec = cluster[i].spec;
    spec.transmitter_baud_Mbps *= scenario_.transmitter_derate;
    ResourceState s;
    s.battery_Wh = scenario_.initial_battery.sample(init) * spec.battery_capacity_Wh;
    s.storage_used_GB = scenario_.initial_storage.sample(init) * spec.storage_capacity_GB;
    for (auto& w : s.rw_speeds_rpm) w = scenario_.initial_rw_rpm.sample(init);
    s.failed = resources::check_failure(spec, s);
    specs_.push_back(spec);
    states_.push_back(s);
    wheel_rngs_.emplace_back(derive_seed(seed, {1, i}));
  }
  self_captured_.assign(n, std::vector<bool>(world_->aois().size(), false));
  captured_by_.assign(world_->aois().size(), std::nullopt);
  step_index_ = 0;
  done_ = false;
  has_reset_ = true;

  log_ = EpisodeLog{};
  log_.seed = seed;
  log_.horizon_steps = horizon_steps_;
  log_.reward_params = world_->options().reward;
  for (std::size_t i = 0; i < n; ++i) {
    log_.payloads.push_back(specs_[i].payload);
    log_.battery_capacity_Wh.push_back(specs_[i].battery_capacity_Wh);
    log_.initial_battery_fraction.push_back(states_[i].battery_fraction(specs_[i]));
    log_.initial_storage_GB.push_back(states_[i].storage_used_GB);
  }

  slot_tables_.assign(n, {});
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < n; ++i) {
    slot_tables_[i] = upcoming_slots(i);
    obs.push_back(build_observation(i));
  }
  return obs;
}

bool MissionEnv::in_shadow(std::size_t agent, double t) const {
  const auto& orbit = world_->cluster()[agent].orbit;
  return orbit::eclipse_state(orbit::inertial_position(orbit, t), t, scenario_.sun_direction).in_shadow;
}

std::vector<MissionEnv::Slot> MissionEnv::upcoming_slots(std::size_t agent) const {
  const double t = time_s();
  const double lookahead_end = t + world_->options().lookahead_s;
  const auto& windows = world_->aoi_windows(agent);
  const double earliest = t - world_->max_aoi_window_s(agent);
  auto it = std::lower_bound(windows.begin(), windows.end(), earliest,
                             [](const orbit::AccessWindow& w, double v) { return w.start_s < v; });
  std::vector<Slot> slots;
  for (; it != windows.end() && slots.size() < world_->options().window_slots; ++it) {
    if (it->start_s > lookahead_end) break;
    if (it->end_s <= t) continue;
    if (self_captured_[agent][it->target_id]) continue;
    slots.push_back({it->target_id, it->start_s, it->end_s});
  }
  return slots;
}

Observation MissionEnv::build_observation(std::size_t agent) const {
  if (!has_reset_) throw EnvError("build_observation before reset");
  const auto& spec = specs_.at(agent);
  const auto& s = states_.at(agent);
  const double t = time_s();
  const double lookahead = world_->options().lookahead_s;
  const double episode_s = static_cast<double>(horizon_steps_) * scenario_.decision_interval_s;

  Observation o;
  o.reserve(observation_size(agent));
  o.push_back(clamp1(s.battery_fraction(spec)));
  o.push_back(clamp1(1.0 - s.storage_used_GB / spec.storage_capacity_GB));
  for (double w : s.rw_speeds_rpm) o.push_back(clamp1(w / spec.rw_max_rpm));
  o.push_back(in_shadow(agent, t) ? 1.0 : 0.0);
  o.push_back(clamp1(t / episode_s));

  const auto& slots = slot_tables_.at(agent);
  const auto& aois = world_->aois();
  for (std::size_t k = 0; k < world_->options().window_slots; ++k) {
    if (k < slots.size()) {
      const auto& sl = slots[k];
      o.push_back(std::clamp((sl.start_s - t) / lookahead, 0.0, 1.0));
      o.push_back(std::clamp((sl.end_s - std::max(sl.start_s, t)) / kSlotDurationScaleS, 0.0, 1.0));
      o.push_back(aois[sl.aoi].priority);
      o.push_back(aois[sl.aoi].cloud_cover);
    } else {
      o.insert(o.end(), kSlotFeatures, -1.0);
    }
  }

  const auto& sw = world_->station_windows(agent);
  const orbit::AccessWindow* next_station = nullptr;
  for (const auto& w : sw) {
    if (w.start_s > t + lookahead) break;
    if (w.end_s > t) {
      next_station = &w;
      break;
    }
  }
  if (next_station) {
    o.push_back(std::clamp((next_station->start_s - t) / lookahead, 0.0, 1.0));
    o.push_back(std::clamp((next_station->end_s - std::max(next_station->start_s, t)) / kStationDurationScaleS, 0.0,
                           1.0));
  } else {
    o.insert(o.end(), kStationFeatures, -1.0);
  }

  o.push_back(spec.payload == resources::Payload::kOptical ? 1.0 : 0.0);
  o.push_back(spec.payload == resources::Payload::kSar ? 1.0 : 0.0);
  return o;
}

std::vector<double> MissionEnv::global_state() const {
  std::vector<double> g;
  g.reserve(global_state_size());
  for (std::size_t i = 0; i < num_agents(); ++i) {
    const auto o = build_observation(i);
    g.insert(g.end(), o.begin(), o.end());
  }
  for (std::size_t i = 0; i < num_agents(); ++i) {
    const auto& spec = specs_[i];
    const auto& s = states_[i];
    g.push_back(s.battery_fraction(spec));
    g.push_back(s.storage_used_GB / spec.storage_capacity_GB);
    for (double w : s.rw_speeds_rpm) g.push_back(w / spec.rw_max_rpm);
  }
  return g;
}

StepResult MissionEnv::step(std::span<const int> joint_action) {
  if (!has_reset_) throw EnvError("step before reset");
  if (done_) throw EnvError("step after episode end");
  const std::size_t n = num_agents();
  if (joint_action.size() != n)
    throw EnvError("expected " + std::to_string(n) + " actions, got " + std::to_string(joint_action.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (joint_action[i] < 0 || static_cast<std::size_t>(joint_action[i]) >= action_size(i))
      throw EnvError("agent " + std::to_string(i) + ": action " + std::to_string(joint_action[i]) +
                     " out of range [0, " + std::to_string(action_size(i)) + ")");
  }

  const std::size_t slots = world_->options().window_slots;
  const double dt = scenario_.decision_interval_s;
  const double t0 = time_s();
  const double t1 = t0 + dt;
  const auto& aois = world_->aois();

  StepLog step_log;
  step_log.index = step_index_;
  step_log.time_s = t0;
  step_log.agents.resize(n);

  // Capture resolution in agent index order: the lowest index wins a conflict.
  std::vector<bool> taken_this_step(aois.size(), false);
  for (std::size_t i = 0; i < n; ++i) {
    auto& al = step_log.agents[i];
    al.action = joint_action[i];
    al.kind = kind_of(joint_action[i], slots);
    al.active = !states_[i].failed;
    al.battery_fraction_prev = states_[i].battery_fraction(specs_[i]);
    if (!al.active || al.kind != ActionKind::kCapture) continue;
    const auto k = static_cast<std::size_t>(joint_action[i]);
    if (k >= slot_tables_[i].size()) continue;
    const auto& sl = slot_tables_[i][k];
    al.target = sl.aoi;
    al.window_open = sl.start_s < t1 && sl.end_s > t0;
    const bool free = !captured_by_[sl.aoi].has_value() && !taken_this_step[sl.aoi];
    const bool has_room = states_[i].storage_used_GB + specs_[i].capture_size_GB() <= specs_[i].storage_capacity_GB;
    if (al.window_open && free && has_room) {
      al.credited = true;
      taken_this_step[sl.aoi] = true;
      al.priority = aois[sl.aoi].priority;
      al.cloud_cover = aois[sl.aoi].cloud_cover;
    }
  }

  StepResult result;
  result.components.resize(n);
  const double substep = std::min(world_->options().power_substep_s, dt);
  const auto n_sub = static_cast<std::size_t>(std::ceil(dt / substep - 1e-9));

  for (std::size_t i = 0; i < n; ++i) {
    auto& al = step_log.agents[i];
    auto& s = states_[i];
    const auto& spec = specs_[i];
    if (al.active) {
      const ActionClass ac = class_of(al.kind);

      // Power, integrated over sub-steps so eclipse entry/exit inside a
      // decision interval is resolved.
      for (std::size_t k = 0; k < n_sub; ++k) {
        const double a = t0 + static_cast<double>(k) * substep;
        const double h = std::min(substep, t1 - a);
        if (h <= 0.0) break;
        const bool shadow = in_shadow(i, a + 0.5 * h);
        if (k == 0) al.in_shadow = shadow;
        const auto p = resources::step_power(spec, s, ac, shadow, world_->options().nominal_incidence_cos, h);
        s = p.state;
        al.generated_Wh += p.ledger.generated_Wh;
        al.consumed_Wh += p.ledger.consumed_Wh;
      }

      if (al.credited) {
        const auto st = resources::step_storage(spec, s, ActionClass::kImage, false, dt);
        s = st.state;
        al.captured_GB = st.captured_GB;
        captured_by_[*al.target] = i;
        self_captured_[i][*al.target] = true;
      } else if (al.kind == ActionKind::kDownlink) {
        const double link_s = covered_seconds(world_->station_windows(i), t0, t1);
        if (link_s > 0.0) {
          const auto st = resources::step_storage(spec, s, ActionClass::kDownlink, true, link_s);
          s = st.state;
          al.downlinked_GB = st.downlinked_GB;
        }
      }

      const double proxy = spec.slew_momentum_rpm / dt;
      s = resources::step_wheels(spec, s, ac, proxy, dt, {scenario_.disturbance_scale}, wheel_rngs_[i]);

      if (resources::check_failure(spec, s)) {
        s.failed = true;
        al.failure_event = true;
      }

      TransitionRecord tr;
      tr.payload = spec.payload;
      tr.battery_fraction_prev = al.battery_fraction_prev;
      tr.battery_fraction = s.battery_fraction(spec);
      tr.captured = al.credited;
      tr.priority = al.priority;
      tr.cloud_cover = al.cloud_cover;
      tr.downlinked_GB = al.downlinked_GB;
      tr.failure = al.failure_event;
      al.reward = reward_step(tr, world_->options().reward);
    }
    al.battery_fraction = s.battery_fraction(spec);
    al.storage_used_GB = s.storage_used_GB;
    al.rw_speeds_rpm = s.rw_speeds_rpm;

    result.components[i] = al.reward;
    result.reward += al.reward.total;
    if (al.credited) ++result.info.captures;
    result.info.downlinked_GB += al.downlinked_GB;
    if (al.failure_event) ++result.info.failures;
  }
  step_log.reward = result.reward;

  ++step_index_;
  const bool any_failure = result.info.failures > 0;
  done_ = step_index_ >= horizon_steps_ || (scenario_.terminate_on_failure && any_failure);
  result.done = done_;

  for (std::size_t i = 0; i < n; ++i) slot_tables_[i] = upcoming_slots(i);
  for (std::size_t i = 0; i < n; ++i) result.observations.push_back(build_observation(i));

  log_.steps.push_back(std::move(step_log));
  log_.complete = done_;
  return result;
}

}  // namespace eosim::mission

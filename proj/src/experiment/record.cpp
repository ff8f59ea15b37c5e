#include "eosim/experiment/record.hpp"

#include "eosim/experiment/binary_io.hpp"

namespace eosim::experiment {

namespace {

constexpr char kMagic[] = "EOSIMREC";

void put_components(ByteWriter& w, const mission::RewardComponents& c) {
  w.u8(static_cast<std::uint8_t>(c.branch));
  w.f64(c.priority);
  w.f64(c.rho);
  w.f64(c.delta);
  w.f64(c.cloud);
  w.f64(c.failure);
  w.f64(c.total);
}

mission::RewardComponents get_components(ByteReader& r, const std::string& what) {
  mission::RewardComponents c;
  const auto at = r.offset();
  const auto b = r.u8();
  if (b > static_cast<std::uint8_t>(mission::RewardBranch::kPowerOnly))
    throw FormatError(what + ": bad reward branch at byte offset " + std::to_string(at));
  c.branch = static_cast<mission::RewardBranch>(b);
  c.priority = r.f64();
  c.rho = r.f64();
  c.delta = r.f64();
  c.cloud = r.f64();
  c.failure = r.f64();
  c.total = r.f64();
  return c;
}

void put_agent(ByteWriter& w, const mission::AgentStepLog& a) {
  w.i32(a.action);
  w.u8(static_cast<std::uint8_t>(a.kind));
  w.boolean(a.active);
  w.boolean(a.target.has_value());
  w.u64(a.target.value_or(0));
  w.boolean(a.window_open);
  w.boolean(a.credited);
  w.f64(a.priority);
  w.f64(a.cloud_cover);
  w.f64(a.battery_fraction_prev);
  w.f64(a.battery_fraction);
  w.f64(a.storage_used_GB);
  for (double x : a.rw_speeds_rpm) w.f64(x);
  w.f64(a.captured_GB);
  w.f64(a.downlinked_GB);
  w.f64(a.generated_Wh);
  w.f64(a.consumed_Wh);
  w.boolean(a.in_shadow);
  w.boolean(a.failure_event);
  put_components(w, a.reward);
}

mission::AgentStepLog get_agent(ByteReader& r, const std::string& what) {
  mission::AgentStepLog a;
  a.action = r.i32();
  const auto at = r.offset();
  const auto k = r.u8();
  if (k > static_cast<std::uint8_t>(mission::ActionKind::kDesaturate))
    throw FormatError(what + ": bad action kind at byte offset " + std::to_string(at));
  a.kind = static_cast<mission::ActionKind>(k);
  a.active = r.boolean();
  const bool has_target = r.boolean();
  const auto target = r.u64();
  if (has_target) a.target = static_cast<std::size_t>(target);
  a.window_open = r.boolean();
  a.credited = r.boolean();
  a.priority = r.f64();
  a.cloud_cover = r.f64();
  a.battery_fraction_prev = r.f64();
  a.battery_fraction = r.f64();
  a.storage_used_GB = r.f64();
  for (double& x : a.rw_speeds_rpm) x = r.f64();
  a.captured_GB = r.f64();
  a.downlinked_GB = r.f64();
  a.generated_Wh = r.f64();
  a.consumed_Wh = r.f64();
  a.in_shadow = r.boolean();
  a.failure_event = r.boolean();
  a.reward = get_components(r, what);
  return a;
}

}  // namespace

std::vector<std::uint8_t> encode_records(const EpisodeRecordFile& f) {
  ByteWriter w;
  w.raw({kMagic, 8});
  w.u32(f.version);
  w.u64(f.config_hash);
  w.str(f.cluster);
  w.str(f.scenario_json);
  w.u64(f.episodes.size());
  for (const auto& e : f.episodes) {
    w.u64(e.seed);
    w.u64(e.payloads.size());
    for (auto p : e.payloads) w.u8(static_cast<std::uint8_t>(p));
    w.f64s(e.battery_capacity_Wh);
    w.f64s(e.initial_battery_fraction);
    w.f64s(e.initial_storage_GB);
    w.u64(e.horizon_steps);
    w.f64(e.reward_params.alpha);
    w.f64(e.reward_params.beta);
    w.f64(e.reward_params.failure_penalty);
    w.boolean(e.complete);
    w.u64(e.steps.size());
    for (const auto& s : e.steps) {
      w.u64(s.index);
      w.f64(s.time_s);
      w.f64(s.reward);
      w.u64(s.agents.size());
      for (const auto& a : s.agents) put_agent(w, a);
    }
  }
  return w.bytes();
}

EpisodeRecordFile decode_records(std::span<const std::uint8_t> bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.expect_magic(std::string(kMagic, 8));
  EpisodeRecordFile f;
  f.version = r.u32();
  if (f.version != kRecordVersion)
    throw FormatError(what + ": format version " + std::to_string(f.version) + " is not supported (expected " +
                      std::to_string(kRecordVersion) + ")");
  f.config_hash = r.u64();
  f.cluster = r.str();
  f.scenario_json = r.str();
  const auto n = r.count(1);
  for (std::size_t k = 0; k < n; ++k) {
    mission::EpisodeLog e;
    e.seed = r.u64();
    const auto na = r.count(1);
    for (std::size_t i = 0; i < na; ++i) {
      const auto at = r.offset();
      const auto p = r.u8();
      if (p > static_cast<std::uint8_t>(resources::Payload::kSar))
        throw FormatError(what + ": bad payload at byte offset " + std::to_string(at));
      e.payloads.push_back(static_cast<resources::Payload>(p));
    }
    e.battery_capacity_Wh = r.f64s();
    e.initial_battery_fraction = r.f64s();
    e.initial_storage_GB = r.f64s();
    e.horizon_steps = r.u64();
    e.reward_params.alpha = r.f64();
    e.reward_params.beta = r.f64();
    e.reward_params.failure_penalty = r.f64();
    e.complete = r.boolean();
    const auto ns = r.count(1);
    for (std::size_t t = 0; t < ns; ++t) {
      mission::StepLog s;
      s.index = r.u64();
      s.time_s = r.f64();
      s.reward = r.f64();
      const auto at = r.offset();
      const auto nag = r.count(1);
      if (nag != na) throw FormatError(what + ": agent count mismatch at byte offset " + std::to_string(at));
      for (std::size_t i = 0; i < nag; ++i) s.agents.push_back(get_agent(r, what));
      e.steps.push_back(std::move(s));
    }
    f.episodes.push_back(std::move(e));
  }
  if (!r.at_end()) throw FormatError(what + ": trailing bytes at byte offset " + std::to_string(r.offset()));
  return f;
}

void save_records(const std::string& path, const EpisodeRecordFile& f) { write_file_bytes(path, encode_records(f)); }

EpisodeRecordFile load_records(const std::string& path) { return decode_records(read_file_bytes(path), path); }

}  // namespace eosim::experiment

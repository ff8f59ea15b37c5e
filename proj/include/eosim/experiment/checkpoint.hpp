#pragma once

#include <cstdint>
#include <string>

#include "eosim/marl/policy.hpp"
#include "eosim/rng.hpp"

namespace eosim::experiment {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::string config_json;  // full experiment config
  std::uint64_t seed = 0;
  std::uint64_t global_step = 0;
  std::uint64_t update_index = 0;  // next update to run
  marl::PolicySet policies;
  Rng update_rng;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what = "checkpoint");

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

bool checkpoints_equal(const Checkpoint& a, const Checkpoint& b);

}  // namespace eosim::experiment

#pragma once

// Binary episode records: enough to rebuild the environment and replay every
// step bit-exactly.

#include <cstdint>
#include <string>
#include <vector>

#include "eosim/environment.hpp"

namespace eosim::experiment {

inline constexpr std::uint32_t kRecordVersion = 1;

struct EpisodeRecordFile {
  std::uint32_t version = kRecordVersion;
  std::uint64_t config_hash = 0;
  std::string cluster;        // cluster name
  std::string scenario_json;  // full scenario config
  std::vector<mission::EpisodeLog> episodes;
};

std::vector<std::uint8_t> encode_records(const EpisodeRecordFile& f);
// Errors name the byte offset where the data ran out or went bad.
EpisodeRecordFile decode_records(std::span<const std::uint8_t> bytes, const std::string& what = "episode record");

void save_records(const std::string& path, const EpisodeRecordFile& f);
EpisodeRecordFile load_records(const std::string& path);

}  // namespace eosim::experiment

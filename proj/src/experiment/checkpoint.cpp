#include "eosim/experiment/checkpoint.hpp"

#include "eosim/experiment/binary_io.hpp"

namespace eosim::experiment {

namespace {

constexpr char kMagic[] = "EOSIMCKP";

std::uint64_t fnv1a(std::span<const std::uint8_t> b) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto c : b) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void put_spec(ByteWriter& w, const nn::MlpSpec& s) {
  w.u64(s.widths.size());
  for (auto x : s.widths) w.u64(x);
}

nn::MlpSpec get_spec(ByteReader& r) {
  nn::MlpSpec s;
  const auto n = r.count(8);
  for (std::size_t i = 0; i < n; ++i) s.widths.push_back(r.u64());
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return s;
}

void put_adam(ByteWriter& w, const nn::AdamState& a) {
  w.f64s(a.m);
  w.f64s(a.v);
  w.u64(a.step);
}

nn::AdamState get_adam(ByteReader& r) {
  nn::AdamState a;
  a.m = r.f64s();
  a.v = r.f64s();
  a.step = r.u64();
  return a;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  w.raw({kMagic, 8});
  w.u32(c.version);
  w.u64(c.config_hash);
  w.str(c.config_json);
  w.u64(c.seed);
  w.u64(c.global_step);
  w.u64(c.update_index);
  w.str(c.update_rng.serialize());
  const auto& ps = c.policies;
  w.boolean(ps.shared_critic);
  w.u64(ps.num_agents());
  for (std::size_t i = 0; i < ps.num_agents(); ++i) {
    put_spec(w, ps.actor_nets[i].spec());
    w.f64s(ps.actors[i].values());
    put_adam(w, ps.actor_opt[i]);
  }
  put_spec(w, ps.critic_net.spec());
  w.u64(ps.critics.size());
  for (std::size_t i = 0; i < ps.critics.size(); ++i) {
    w.f64s(ps.critics[i].values());
    put_adam(w, ps.critic_opt[i]);
  }
  auto bytes = w.bytes();
  const auto h = fnv1a(bytes);
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(h >> (8 * i)));
  return bytes;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what) {
  ByteReader r(bytes, what);
  r.expect_magic(std::string(kMagic, 8));
  Checkpoint c;
  c.version = r.u32();
  if (c.version != kCheckpointVersion)
    throw FormatError(what + ": format version " + std::to_string(c.version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  c.config_hash = r.u64();
  c.config_json = r.str();
  c.seed = r.u64();
  c.global_step = r.u64();
  c.update_index = r.u64();
  try {
    c.update_rng.deserialize(r.str());
  } catch (const std::runtime_error& e) {
    throw FormatError(what + ": " + e.what());
  }
  auto& ps = c.policies;
  ps.shared_critic = r.boolean();
  const auto n = r.count(1);
  for (std::size_t i = 0; i < n; ++i) {
    ps.actor_nets.emplace_back(get_spec(r));
    auto p = r.f64s();
    if (p.size() != ps.actor_nets.back().num_params()) throw FormatError(what + ": actor parameter count mismatch");
    ps.actors.emplace_back(std::move(p));
    ps.actor_opt.push_back(get_adam(r));
    if (ps.actor_opt.back().m.size() != ps.actors.back().size() || ps.actor_opt.back().v.size() != ps.actors.back().size())
      throw FormatError(what + ": optimiser state size mismatch");
  }
  ps.critic_net = nn::Mlp(get_spec(r));
  const auto nc = r.count(1);
  for (std::size_t i = 0; i < nc; ++i) {
    auto p = r.f64s();
    if (p.size() != ps.critic_net.num_params()) throw FormatError(what + ": critic parameter count mismatch");
    ps.critics.emplace_back(std::move(p));
    ps.critic_opt.push_back(get_adam(r));
    if (ps.critic_opt.back().m.size() != ps.critics.back().size() || ps.critic_opt.back().v.size() != ps.critics.back().size())
      throw FormatError(what + ": optimiser state size mismatch");
  }
  if (nc != (ps.shared_critic ? 1u : n)) throw FormatError(what + ": critic count does not match the layout");
  const std::size_t body = r.offset();
  const auto stored = r.u64();
  if (stored != fnv1a(bytes.subspan(0, body))) throw FormatError(what + ": checksum mismatch (file corrupted)");
  if (!r.at_end()) throw FormatError(what + ": trailing bytes after offset " + std::to_string(r.offset()));
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) { write_file_bytes(path, encode_checkpoint(c)); }

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_file_bytes(path), path); }

bool checkpoints_equal(const Checkpoint& a, const Checkpoint& b) {
  return a.version == b.version && a.config_hash == b.config_hash && a.config_json == b.config_json &&
         a.seed == b.seed && a.global_step == b.global_step && a.update_index == b.update_index &&
         a.update_rng == b.update_rng && marl::same_parameters(a.policies, b.policies) &&
         a.policies.actor_nets.size() == b.policies.actor_nets.size() &&
         a.policies.critic_net.spec() == b.policies.critic_net.spec();
}

}  // namespace eosim::experiment

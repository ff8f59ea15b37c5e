#pragma once

// CLI commands as library calls. Each returns a process exit status and
// reports to `out`; diagnostics for failures go to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eosim/experiment/config.hpp"
#include "eosim/objective.hpp"

namespace eosim::experiment {

struct TrainOptions {
  bool resume = false;
  bool quiet = false;
};

struct SeedSummary {
  std::uint64_t seed = 0;
  std::string dir;
  std::uint64_t steps = 0;
  rollout::MetricSample final_eval;
};

// Trains every seed in cfg; per-seed output in <out>/seed_<s>/ (metrics.csv,
// checkpoint.bin, eval_summary.json) and <out>/config.json.
int cmd_train(const ExperimentConfig& cfg, const TrainOptions& opt, std::ostream& out, std::ostream& err,
              std::vector<SeedSummary>* summaries = nullptr);

enum class EvalPolicy { kArgmax, kSample, kRandom };

struct EvalOptions {
  std::string checkpoint;
  std::optional<std::string> scenario;  // preset or file; default: the training scenario
  std::optional<std::string> config;    // must hash like the checkpoint when given
  std::size_t episodes = 10;
  std::uint64_t seed = 0;
  EvalPolicy policy = EvalPolicy::kArgmax;
  bool trace = false;
  bool records = true;
  std::string out_dir;  // default: next to the checkpoint
  std::string data_dir;
};

// Writes eval_<scenario>_summary.json, optional _trace.csv and _episodes.bin.
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);

enum class SweepAxis { kBattery, kMemory };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);
std::vector<double> default_sweep_values(SweepAxis a);  // percent

// One training per condition in <out>/sweep_<axis>/<idx>_<axis>_<value>/.
int cmd_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values_percent,
              const TrainOptions& opt, std::ostream& out, std::ostream& err);

struct ReplayOptions {
  std::string record;
  std::optional<std::size_t> episode;  // default: all
  bool timeline = true;
  std::string trace_csv;  // optional per-step trace export
  std::string data_dir;
};

int cmd_replay(const ReplayOptions& opt, std::ostream& out, std::ostream& err);

// Helpers shared with tests.
nlohmann::json eval_summary_json(const rollout::EvalResult& r, const std::vector<mission::ObjectiveBreakdown>& objectives);
void write_trace_csv(const std::string& path, const std::vector<mission::EpisodeLog>& logs);
std::string action_label(const mission::AgentStepLog& a);

}  // namespace eosim::experiment

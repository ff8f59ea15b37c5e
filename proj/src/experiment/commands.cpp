#include "eosim/experiment/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "eosim/experiment/record.hpp"
#include "eosim/experiment/train.hpp"

namespace eosim::experiment {

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFidelity = 3;

const std::string kHashPrefix = "# config_hash=";

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::trunc);
  if (!o) throw std::runtime_error("cannot write '" + p.string() + "'");
  o << text;
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << x;
  return os.str();
}

// Keeps the comment, the header and every row up to `max_step`.
void truncate_metrics(const fs::path& csv, std::uint64_t max_step, const std::string& hash) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("resume: metrics file '" + csv.string() + "' is missing");
  std::string line, kept;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (n == 0) {
      if (line != kHashPrefix + hash)
        throw std::invalid_argument("resume: '" + csv.string() + "' was written by a different config");
      kept += line + "\n";
    } else if (n == 1) {
      kept += line + "\n";
    } else if (!line.empty()) {
      const auto step = std::stoull(line.substr(0, line.find(',')));
      if (step <= max_step) kept += line + "\n";
    }
    ++n;
  }
  in.close();
  write_text(csv, kept);
}

std::vector<mission::ObjectiveBreakdown> objectives_of(const std::vector<mission::EpisodeLog>& logs) {
  std::vector<mission::ObjectiveBreakdown> v;
  for (const auto& l : logs) v.push_back(mission::evaluate_mission_objective(l));
  return v;
}

bool same_objective(const mission::ObjectiveBreakdown& a, const mission::ObjectiveBreakdown& b) {
  return a.base_reward == b.base_reward && a.power_used_Wh == b.power_used_Wh && a.downlinked_GB == b.downlinked_GB &&
         a.payload_usage == b.payload_usage && a.composite == b.composite && a.unique_captures == b.unique_captures &&
         a.power_used_per_agent_Wh == b.power_used_per_agent_Wh;
}

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  return s;
}

std::string percent_label(double v) {
  std::ostringstream os;
  os << v;
  return sanitize(os.str());
}

}  // namespace

std::string action_label(const mission::AgentStepLog& a) {
  if (!a.active) return "-";
  switch (a.kind) {
    case mission::ActionKind::kCapture:
      return "C" + std::to_string(a.action) + (a.credited ? "*" : "");
    case mission::ActionKind::kDownlink:
      return a.downlinked_GB > 0.0 ? "D*" : "D";
    case mission::ActionKind::kCharge:
      return "P";
    case mission::ActionKind::kDesaturate:
      return "S";
  }
  return "?";
}

nlohmann::json eval_summary_json(const rollout::EvalResult& r,
                                 const std::vector<mission::ObjectiveBreakdown>& objectives) {
  const auto& m = r.metrics;
  nlohmann::json j;
  j["episodes"] = m.episodes;
  j["mean_return"] = m.mean_return;
  j["std_return"] = m.std_return;
  j["agent_returns"] = m.agent_returns;
  j["captures"] = m.captures;
  j["unique_captures"] = m.unique_captures;
  j["downlinked_gb"] = m.downlinked_GB;
  j["failure_rate"] = m.failure_rate;
  j["min_battery_frac"] = m.min_battery_fraction;
  std::vector<double> returns;
  for (const auto& e : r.episodes) returns.push_back(e.total_return);
  j["episode_returns"] = returns;
  if (!objectives.empty()) {
    double q = 0, f1 = 0, f2 = 0, f3 = 0, jj = 0;
    for (const auto& o : objectives) {
      q += o.base_reward;
      f1 += o.power_used_Wh;
      f2 += o.downlinked_GB;
      f3 += o.payload_usage;
      jj += o.composite;
    }
    const double n = static_cast<double>(objectives.size());
    j["objective"] = {{"Q", q / n}, {"F1_power_wh", f1 / n}, {"F2_downlinked_gb", f2 / n},
                      {"F3_payload_usage", f3 / n}, {"J", jj / n}};
  }
  return j;
}

void write_trace_csv(const std::string& path, const std::vector<mission::EpisodeLog>& logs) {
  std::ostringstream os;
  os << "episode,step,time_s,agent,action,label,reward,battery_frac,storage_used_gb,rw_x_rpm,rw_y_rpm,rw_z_rpm,"
        "in_shadow,credited,downlinked_gb,failed\n";
  os << std::setprecision(10);
  for (std::size_t e = 0; e < logs.size(); ++e) {
    for (const auto& s : logs[e].steps) {
      for (std::size_t i = 0; i < s.agents.size(); ++i) {
        const auto& a = s.agents[i];
        os << e << ',' << s.index << ',' << s.time_s << ',' << i << ',' << a.action << ',' << action_label(a) << ','
           << a.reward.total << ',' << a.battery_fraction << ',' << a.storage_used_GB << ',' << a.rw_speeds_rpm[0]
           << ',' << a.rw_speeds_rpm[1] << ',' << a.rw_speeds_rpm[2] << ',' << (a.in_shadow ? 1 : 0) << ','
           << (a.credited ? 1 : 0) << ',' << a.downlinked_GB << ',' << ((a.failure_event || !a.active) ? 1 : 0)
           << '\n';
      }
    }
  }
  write_text(path, os.str());
}

int cmd_train(const ExperimentConfig& cfg, const TrainOptions& opt, std::ostream& out, std::ostream& err,
              std::vector<SeedSummary>* summaries) {
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: invalid config: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const fs::path root = resolve_output_dir(cfg);
    fs::create_directories(root);
    const std::string hash = hash_hex(config_hash(cfg));
    auto cj = to_json(cfg);
    cj["config_hash"] = hash;
    write_text(root / "config.json", cj.dump(2) + "\n");
    const auto env = make_env(cfg);
    for (const auto seed : cfg.seeds) {
      const fs::path dir = root / ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      const fs::path ckpt_path = dir / "checkpoint.bin";
      const fs::path csv_path = dir / "metrics.csv";
      std::unique_ptr<Trainer> tr;
      if (opt.resume) {
        if (!fs::exists(ckpt_path)) throw std::invalid_argument("resume: no checkpoint at '" + ckpt_path.string() + "'");
        const auto ck = load_checkpoint(ckpt_path.string());
        if (ck.seed != seed) throw std::invalid_argument("resume: checkpoint belongs to seed " + std::to_string(ck.seed));
        tr = std::make_unique<Trainer>(cfg, ck, env);
        truncate_metrics(csv_path, ck.global_step, hash);
      } else {
        tr = std::make_unique<Trainer>(cfg, seed, env);
        write_text(csv_path, kHashPrefix + hash + "\n" + metrics_header(tr->policies().num_agents()) + "\n");
      }
      std::ofstream csv(csv_path, std::ios::app);
      if (!csv) throw std::runtime_error("cannot append to '" + csv_path.string() + "'");
      const auto t0 = std::chrono::steady_clock::now();
      while (!tr->finished()) {
        auto rep = tr->update();
        if (cfg.record_wall_time)
          rep.metrics.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv << metrics_row(rep.metrics) << '\n';
        csv.flush();
        if (tr->update_index() % cfg.checkpoint_every == 0) save_checkpoint(ckpt_path.string(), tr->checkpoint());
        if (!opt.quiet)
          out << "seed " << seed << " step " << tr->global_step() << " return " << fmt(rep.metrics.mean_return)
              << " +- " << fmt(rep.metrics.std_return) << '\n';
      }
      save_checkpoint(ckpt_path.string(), tr->checkpoint());

      auto ev = rollout::evaluate_policy(&tr->policies(), tr->env(), cfg.rollout.eval_episodes, eval_seed_for(seed),
                                         rollout::ActionMode::kArgmax, true);
      ev.metrics.step = tr->global_step();
      auto sj = eval_summary_json(ev, objectives_of(ev.logs));
      sj["config_hash"] = hash;
      sj["seed"] = seed;
      sj["step"] = tr->global_step();
      sj["mode"] = "argmax";
      write_text(dir / "eval_summary.json", sj.dump(2) + "\n");
      out << "seed " << seed << " final eval (" << ev.metrics.episodes << " episodes, argmax): return "
          << fmt(ev.metrics.mean_return) << " +- " << fmt(ev.metrics.std_return) << ", unique captures "
          << fmt(ev.metrics.unique_captures, 2) << ", failure rate " << fmt(ev.metrics.failure_rate, 2) << '\n';
      if (summaries) summaries->push_back({seed, dir.string(), tr->global_step(), ev.metrics});
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const auto ck = load_checkpoint(opt.checkpoint);
    auto cfg = experiment_config_from_json(nlohmann::json::parse(ck.config_json));
    if (config_hash(cfg) != ck.config_hash) throw std::invalid_argument("checkpoint config does not match its hash");
    if (opt.config) {
      const auto other = load_experiment_config(*opt.config);
      if (config_hash(other) != ck.config_hash)
        throw std::invalid_argument("config '" + *opt.config + "' (hash " + hash_hex(config_hash(other)) +
                                    ") does not match the checkpoint (hash " + hash_hex(ck.config_hash) + ")");
    }
    if (!opt.data_dir.empty()) cfg.data_dir = opt.data_dir;
    const auto scenario = opt.scenario ? resolve_scenario(*opt.scenario) : cfg.scenario;
    const auto env = make_env(cfg, scenario);
    const auto mode = opt.policy == EvalPolicy::kArgmax   ? rollout::ActionMode::kArgmax
                      : opt.policy == EvalPolicy::kSample ? rollout::ActionMode::kSample
                                                          : rollout::ActionMode::kUniformRandom;
    const auto ev = rollout::evaluate_policy(&ck.policies, env, opt.episodes, opt.seed, mode, true);
    const fs::path dir = opt.out_dir.empty() ? fs::path(opt.checkpoint).parent_path() : fs::path(opt.out_dir);
    const std::string stem = "eval_" + sanitize(scenario.name);
    auto sj = eval_summary_json(ev, objectives_of(ev.logs));
    sj["config_hash"] = hash_hex(ck.config_hash);
    sj["checkpoint"] = opt.checkpoint;
    sj["scenario"] = scenario.name;
    sj["seed"] = opt.seed;
    sj["step"] = ck.global_step;
    sj["mode"] = opt.policy == EvalPolicy::kArgmax ? "argmax" : opt.policy == EvalPolicy::kSample ? "sample" : "random";
    write_text(dir / (stem + "_summary.json"), sj.dump(2) + "\n");
    if (opt.trace) write_trace_csv((dir / (stem + "_trace.csv")).string(), ev.logs);
    if (opt.records) {
      EpisodeRecordFile rf;
      rf.config_hash = ck.config_hash;
      rf.cluster = mission::to_string(cfg.cluster);
      rf.scenario_json = mission::scenario_to_json(scenario).dump();
      rf.episodes = ev.logs;
      save_records((dir / (stem + "_episodes.bin")).string(), rf);
    }
    out << "eval " << scenario.name << " (" << ev.metrics.episodes << " episodes, " << sj["mode"].get<std::string>()
        << "): return " << fmt(ev.metrics.mean_return) << " +- " << fmt(ev.metrics.std_return) << '\n';
    out << "wrote " << (dir / (stem + "_summary.json")).string() << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

std::string to_string(SweepAxis a) { return a == SweepAxis::kBattery ? "battery" : "memory"; }

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "battery") return SweepAxis::kBattery;
  if (s == "memory") return SweepAxis::kMemory;
  throw std::invalid_argument("unknown sweep axis '" + s + "' (expected battery or memory)");
}

std::vector<double> default_sweep_values(SweepAxis a) {
  return a == SweepAxis::kBattery ? std::vector<double>{80, 90, 100} : std::vector<double>{0, 80, 100};
}

int cmd_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<double>& values_percent,
              const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  if (values_percent.empty()) {
    err << "error: sweep needs at least one value\n";
    return kExitUsage;
  }
  for (double v : values_percent) {
    if (!(v >= 0.0 && v <= 100.0)) {
      err << "error: sweep values are percentages in [0, 100]\n";
      return kExitUsage;
    }
  }
  const fs::path root = fs::path(resolve_output_dir(base)) / ("sweep_" + to_string(axis));
  std::ostringstream summary;
  summary << "condition,axis,value_percent,seed,steps,final_mean_return,final_std_return\n";
  for (std::size_t k = 0; k < values_percent.size(); ++k) {
    const double v = values_percent[k];
    ExperimentConfig c = base;
    const auto r = mission::Range::fixed(v / 100.0);
    if (axis == SweepAxis::kBattery)
      c.scenario.initial_battery = r;
    else
      c.scenario.initial_storage = r;
    const std::string name = std::to_string(k) + "_" + to_string(axis) + "_" + percent_label(v);
    c.output_dir = fs::absolute(root / name).string();  // root already carries any output-root prefix
    out << "condition " << name << '\n';
    std::vector<SeedSummary> s;
    const int rc = cmd_train(c, opt, out, err, &s);
    if (rc != 0) return rc;
    for (const auto& x : s)
      summary << name << ',' << to_string(axis) << ',' << v << ',' << x.seed << ',' << x.steps << ','
              << std::setprecision(10) << x.final_eval.mean_return << ',' << x.final_eval.std_return << '\n';
  }
  write_text(root / "summary.csv", summary.str());
  out << "wrote " << (root / "summary.csv").string() << '\n';
  return 0;
}

int cmd_replay(const ReplayOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const auto rf = load_records(opt.record);
    const auto scenario = mission::scenario_from_json(nlohmann::json::parse(rf.scenario_json));
    const auto cluster = mission::cluster_from_string(rf.cluster);
    const std::string data_dir = opt.data_dir.empty() ? mission::default_data_dir() : opt.data_dir;
    const rollout::EnvSpec env{mission::load_world(data_dir, mission::make_cluster(cluster), scenario), scenario};
    std::vector<std::size_t> which;
    if (opt.episode) {
      if (*opt.episode >= rf.episodes.size())
        throw std::invalid_argument("episode " + std::to_string(*opt.episode) + " out of range (file has " +
                                    std::to_string(rf.episodes.size()) + ")");
      which.push_back(*opt.episode);
    } else {
      for (std::size_t k = 0; k < rf.episodes.size(); ++k) which.push_back(k);
    }
    out << "record " << opt.record << ": " << rf.episodes.size() << " episodes, cluster " << rf.cluster
        << ", scenario " << scenario.name << ", config " << hash_hex(rf.config_hash) << '\n';
    std::vector<mission::EpisodeLog> replayed;
    for (std::size_t k : which) {
      const auto& log = rf.episodes[k];
      mission::EpisodeLog again;
      try {
        again = rollout::replay_episode(env, log);
      } catch (const rollout::ReplayMismatch& e) {
        err << "error: fidelity check failed for episode " << k << ": " << e.what() << '\n';
        return kExitFidelity;
      }
      const auto obj = mission::evaluate_mission_objective(log);
      if (!same_objective(obj, mission::evaluate_mission_objective(again))) {
        err << "error: objective breakdown differs after replay of episode " << k << '\n';
        return kExitFidelity;
      }
      out << "episode " << k << " (seed " << log.seed << "): replay verified, " << log.steps.size() << " steps\n";
      out << "  J = " << fmt(obj.composite) << "  Q = " << fmt(obj.base_reward) << "  F1 = " << fmt(obj.power_used_Wh)
          << " Wh  F2 = " << fmt(obj.downlinked_GB) << " GB  F3 = " << fmt(obj.payload_usage)
          << "  unique captures = " << obj.unique_captures << '\n';
      if (opt.timeline) {
        out << "  step  time_s";
        for (std::size_t i = 0; i < log.payloads.size(); ++i) out << "  agent" << i;
        out << "  reward\n";
        for (const auto& s : log.steps) {
          out << "  " << std::setw(4) << s.index << "  " << std::setw(6) << static_cast<long>(s.time_s);
          for (const auto& a : s.agents) out << "  " << std::setw(6) << action_label(a);
          out << "  " << fmt(s.reward) << '\n';
        }
      }
      replayed.push_back(std::move(again));
    }
    if (!opt.trace_csv.empty()) write_trace_csv(opt.trace_csv, replayed);
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace eosim::experiment

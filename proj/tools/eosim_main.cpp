// eosim: train, evaluate, sweep and replay satellite-cluster scheduling policies.

#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "eosim/experiment/commands.hpp"

using namespace eosim;
using namespace eosim::experiment;

namespace {

// Flags shared by train and sweep; unset flags leave the config untouched.
struct RunFlags {
  std::string config_file;
  std::optional<std::string> algo, cluster, scenario, out, data_dir;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> steps;
  std::optional<std::size_t> num_envs, steps_per_env, workers, eval_episodes, checkpoint_every, epochs, minibatches;
  std::optional<double> lr, kl_delta, entropy_coef;
  bool no_compound_ratio = false;
  bool resume = false;
  bool wall_time = false;
  bool quiet = false;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "experiment config JSON");
    app->add_option("--algo", algo, "ppo | mappo | happo | hatrpo");
    app->add_option("--cluster", cluster, "single | homogeneous-3opt | heterogeneous-2opt-1sar");
    app->add_option("--scenario", scenario, "easy | easy-random-res | hard | hard-random-res | scenario JSON file");
    app->add_option("--seed,--seeds", seeds, "one or more seeds")->expected(1, -1);
    app->add_option("--steps", steps, "env steps per seed");
    app->add_option("--num-envs", num_envs);
    app->add_option("--steps-per-env", steps_per_env, "0 = one episode");
    app->add_option("--workers", workers, "collection threads");
    app->add_option("--eval-episodes", eval_episodes);
    app->add_option("--checkpoint-every", checkpoint_every, "updates between checkpoints");
    app->add_option("--epochs", epochs);
    app->add_option("--minibatches", minibatches);
    app->add_option("--lr", lr);
    app->add_option("--kl-delta", kl_delta, "trust region radius");
    app->add_option("--entropy-coef", entropy_coef);
    app->add_flag("--no-compound-ratio", no_compound_ratio, "happo/hatrpo: use the raw advantage for every agent");
    app->add_option("--out", out, "output directory (EOSIM_OUTPUT_ROOT prefixes relative paths)");
    app->add_option("--data-dir", data_dir);
    app->add_flag("--resume", resume, "continue from each seed's checkpoint");
    app->add_flag("--record-wall-time", wall_time, "fill the wall_s column (breaks byte-identical reruns)");
    app->add_flag("--quiet", quiet, "only print final evaluations");
  }

  ExperimentConfig build() const {
    ExperimentConfig c = config_file.empty() ? ExperimentConfig{} : load_experiment_config(config_file);
    if (algo) c.algo = marl::algorithm_from_string(*algo);
    if (cluster) c.cluster = mission::cluster_from_string(*cluster);
    if (scenario) c.scenario = resolve_scenario(*scenario);
    if (!seeds.empty()) c.seeds = seeds;
    if (steps) c.total_steps = *steps;
    if (num_envs) c.rollout.num_envs = *num_envs;
    if (steps_per_env) c.rollout.steps_per_env = *steps_per_env;
    if (workers) c.rollout.workers = *workers;
    if (eval_episodes) c.rollout.eval_episodes = *eval_episodes;
    if (checkpoint_every) c.checkpoint_every = *checkpoint_every;
    if (epochs) c.algo_config.epochs = *epochs;
    if (minibatches) c.algo_config.minibatches = *minibatches;
    if (lr) c.algo_config.lr = *lr;
    if (kl_delta) c.algo_config.kl_delta = *kl_delta;
    if (entropy_coef) c.algo_config.entropy_coef = *entropy_coef;
    if (no_compound_ratio) c.algo_config.compound_ratio = false;
    if (out) c.output_dir = *out;
    if (data_dir) c.data_dir = *data_dir;
    if (wall_time) c.record_wall_time = true;
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eosim: Earth-observation satellite cluster scheduling with multi-agent RL"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "train policies (one run per seed)");
  train_flags.add(train);

  RunFlags sweep_flags;
  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "train across initial battery or memory levels");
  sweep_flags.add(sweep);
  sweep->add_option("--axis", axis, "battery | memory")->required();
  sweep->add_option("--values", values, "percent levels (default 80 90 100 / 0 80 100)")->expected(1, -1);

  EvalOptions eval_opt;
  std::string eval_policy = "argmax";
  bool no_records = false;
  std::optional<std::string> eval_scenario, eval_config;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_opt.checkpoint)->required();
  eval->add_option("--scenario", eval_scenario, "default: the training scenario");
  eval->add_option("--config", eval_config, "reject the checkpoint unless it was trained with this config");
  eval->add_option("--episodes", eval_opt.episodes);
  eval->add_option("--seed", eval_opt.seed);
  eval->add_option("--policy", eval_policy, "argmax | sample | random")
      ->check(CLI::IsMember({"argmax", "sample", "random"}));
  eval->add_flag("--trace", eval_opt.trace, "write per-step resource traces");
  eval->add_flag("--no-records", no_records, "skip the binary episode records");
  eval->add_option("--out", eval_opt.out_dir, "default: the checkpoint's directory");
  eval->add_option("--data-dir", eval_opt.data_dir);

  ReplayOptions replay_opt;
  std::optional<std::size_t> replay_episode;
  bool no_timeline = false;
  auto* replay = app.add_subcommand("replay", "re-run recorded episodes and print the objective breakdown");
  replay->add_option("record", replay_opt.record, "episode record file")->required();
  replay->add_option("--episode", replay_episode, "only this episode");
  replay->add_flag("--no-timeline", no_timeline);
  replay->add_option("--trace-csv", replay_opt.trace_csv);
  replay->add_option("--data-dir", replay_opt.data_dir);

  auto* defaults = app.add_subcommand("defaults", "print the default experiment config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version are "errors" with a zero code; every real parse failure is a usage error
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      TrainOptions o{train_flags.resume, train_flags.quiet};
      return cmd_train(train_flags.build(), o, std::cout, std::cerr);
    }
    if (*sweep) {
      TrainOptions o{sweep_flags.resume, sweep_flags.quiet};
      const auto ax = sweep_axis_from_string(axis);
      return cmd_sweep(sweep_flags.build(), ax, values.empty() ? default_sweep_values(ax) : values, o, std::cout,
                       std::cerr);
    }
    if (*eval) {
      eval_opt.scenario = eval_scenario;
      eval_opt.config = eval_config;
      eval_opt.records = !no_records;
      eval_opt.policy = eval_policy == "sample" ? EvalPolicy::kSample
                        : eval_policy == "random" ? EvalPolicy::kRandom
                                                  : EvalPolicy::kArgmax;
      return cmd_eval(eval_opt, std::cout, std::cerr);
    }
    if (*replay) {
      replay_opt.episode = replay_episode;
      replay_opt.timeline = !no_timeline;
      return cmd_replay(replay_opt, std::cout, std::cerr);
    }
    if (*defaults) {
      std::cout << to_json(ExperimentConfig{}).dump(2) << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

// smoothbandit: run, validate and replay batched bandit experiments.
//
//   smoothbandit run --config configs/desk.json --trials 20 --out out/
//   smoothbandit validate --config configs/default.json
//   smoothbandit replay --manifest out/manifest.json --trial 3
//
// Exit status: 0 ok, 1 configuration or usage error, 2 I/O error, 3 internal error.

#include <fstream>
#include <iostream>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "smoothbandit/config.hpp"
#include "smoothbandit/errors.hpp"
#include "smoothbandit/experiment.hpp"

using namespace smoothbandit;

namespace {

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kIoFailure = 2;
constexpr int kInternalFailure = 3;

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> variants;
  std::optional<std::string> out;
  std::optional<int> parallelism;
  bool quiet = false;
};

ExperimentConfig resolve(const RunFlags& flags) {
  ExperimentConfig config = flags.config.empty() ? ExperimentConfig{} : load_config(flags.config);
  if (flags.seed) config.base_seed = *flags.seed;
  if (flags.trials) config.trials = *flags.trials;
  if (flags.variants) config.variants = parse_variant_list(*flags.variants);
  if (flags.out) config.output_dir = *flags.out;
  if (flags.parallelism) config.parallelism = *flags.parallelism;
  config.validate();
  return config;
}

std::string fmt_opt(const nlohmann::json& v, const char* spec = "{:.4f}") {
  return v.is_null() ? std::string("n/a") : fmt::format(fmt::runtime(spec), v.get<double>());
}

int cmd_run(const RunFlags& flags) {
  const auto config = resolve(flags);
  ExperimentOptions options;
  if (!flags.quiet) {
    options.progress = [](int done, int total) {
      if (done == total || done % 10 == 0) std::cerr << fmt::format("\rtrials {}/{}", done, total) << std::flush;
      if (done == total) std::cerr << '\n';
    };
  }
  const auto result = run_experiment(config, options);

  std::cout << fmt::format("{:<7} {:>10} {:>12} {:>10} {:>8} {:>8}\n", "variant", "peak_chg", "mse_var", "cum_regret",
                           "tpr", "fpr");
  for (auto kind : config.variants) {
    const std::string name(to_string(kind));
    const auto& v = result.summary.at("variants").at(name);
    std::cout << fmt::format("{:<7} {:>10} {:>12} {:>10} {:>8} {:>8}\n", name, fmt_opt(v.at("peak_allocation_change")),
                             fmt_opt(v.at("final_mse_inter_trial_variance"), "{:.3e}"),
                             fmt_opt(v.at("cumulative_regret").at("mean"), "{:.3f}"), fmt_opt(v.at("tpr"), "{:.3f}"),
                             fmt_opt(v.at("fpr"), "{:.3f}"));
  }
  std::cout << "outputs in " << config.output_dir.string() << '\n';
  return kOk;
}

int cmd_validate(const std::string& file) {
  const auto config = load_config(file);
  std::cout << fmt::format("{}: ok ({} trials x {} variants, K={}, {} updates)\n", file, config.trials,
                           config.variants.size(), config.scenario.arm_count, config.scenario.updates);
  return kOk;
}

int cmd_replay(const std::string& manifest_file, int trial, const std::string& out_file) {
  std::ifstream in(manifest_file);
  if (!in) throw ConfigError(fmt::format("{}: cannot open manifest", manifest_file));
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", manifest_file, e.what()));
  }
  if (out_file.empty()) {
    replay_trial(manifest, trial, std::cout);
    std::cout.flush();
    return kOk;
  }
  std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", out_file));
  replay_trial(manifest, trial, out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched Thompson-sampling experiments with smoothed empirical-Bayes estimates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SMOOTHBANDIT_VERSION_STRING);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "run trials x variants and write CSV/JSON outputs");
  run->add_option("--config", run_flags.config, "config file (JSON); built-in defaults when omitted");
  run->add_option("--seed", run_flags.seed, "base seed");
  run->add_option("--trials", run_flags.trials, "number of trials");
  run->add_option("--variants", run_flags.variants, "comma list of mle,veb,useb,dseb");
  run->add_option("--out", run_flags.out, "output directory");
  run->add_option("--parallelism", run_flags.parallelism, "worker threads (0: all cores)");
  run->add_flag("--quiet", run_flags.quiet, "no progress on stderr");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "parse a config file and report");
  validate->add_option("--config", validate_file, "config file")->required();

  std::string manifest_file, replay_out;
  int replay_index = 0;
  auto* replay = app.add_subcommand("replay", "re-run one trial from a manifest and print its per-update rows");
  replay->add_option("--manifest", manifest_file, "manifest.json of a finished run")->required();
  replay->add_option("--trial", replay_index, "trial index (0-based)")->required();
  replay->add_option("--out", replay_out, "write rows here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kConfigFailure;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*validate) return cmd_validate(validate_file);
    if (*replay) return cmd_replay(manifest_file, replay_index, replay_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalFailure;
  }
  return kOk;
}

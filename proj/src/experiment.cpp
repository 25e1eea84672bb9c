#include "smoothbandit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "smoothbandit/errors.hpp"

#ifndef SMOOTHBANDIT_VERSION
#define SMOOTHBANDIT_VERSION "dev"
#endif

namespace smoothbandit {

using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("{}: cannot create output directory: {}", dir.string(), ec.message()));
  const auto probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok") || !out.flush())
      throw IoError(fmt::format("{}: output directory is not writable", dir.string()));
  }
  std::filesystem::remove(probe, ec);
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", file.string()));
  return out;
}

void write_json(const std::filesystem::path& file, const json& doc) {
  auto out = open_out(file);
  out << doc.dump(2) << '\n';
  if (!out.flush()) throw IoError(fmt::format("{}: write failed", file.string()));
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Keeps what the summary needs; the full traces and per-arm shares of a
// large run would not fit in memory.
void compact(TrialMetrics& m) {
  m.shares.clear();
  m.shares.shrink_to_fit();
  m.true_rewards.clear();
  m.true_rewards.shrink_to_fit();
  for (auto& p : m.pairs) {
    p.log10_bf.clear();
    p.log10_bf.shrink_to_fit();
  }
}

struct Chunk {
  std::string updates;
  std::string pairs;
};

}  // namespace

CsvTrialWriter::CsvTrialWriter(int trial, PolicyKind variant, std::string& updates, std::string* pairs)
    : trial_(trial), variant_(to_string(variant)), updates_(updates), pairs_(pairs) {}

void CsvTrialWriter::on_update(const UpdateSnapshot& s) {
  auto out = std::back_inserter(updates_);
  for (const auto& r : s.arms) {
    fmt::format_to(out, "{},{},{},{},{},{},{},{},{},", trial_, variant_, s.update, r.arm, r.true_reward, r.lambda,
                   r.allocated, r.responses_received, r.response_sum);
    if (r.mle_mean) fmt::format_to(out, "{}", *r.mle_mean);
    fmt::format_to(out, ",{},{},{},{},{},{},{},{}\n", r.js_mean, r.js_var, r.smoothed_mean, r.smoothed_var, r.xi,
                   s.best_arm_share, s.regret, s.mse);
  }
  if (!pairs_) return;
  auto pout = std::back_inserter(*pairs_);
  for (const auto& p : s.pairs) {
    const bool decided = p.decided_at && *p.decided_at <= s.update;
    fmt::format_to(pout, "{},{},{},{},{},{},{}\n", trial_, variant_, s.update, p.pair.arm_hi, p.pair.arm_lo,
                   p.log10_bf.back(), decided ? 1 : 0);
  }
}

json summarize(const ExperimentConfig& config, const std::vector<std::vector<TrialMetrics>>& by_variant) {
  require(by_variant.size() == config.variants.size(), "summarize: one result list per variant expected");
  const auto& sc = config.scenario;

  json variants = json::object();
  double effect_fraction = 0.0;
  std::size_t effect_trials = 0;

  for (std::size_t vi = 0; vi < by_variant.size(); ++vi) {
    const auto& trials = by_variant[vi];
    require(!trials.empty(), "summarize: no trials");
    const auto n = trials.size();
    const auto updates = trials.front().best_arm_share.size();

    std::vector<std::vector<double>> best(n);
    std::vector<double> final_mse(n), cumulative(n), truth_var(n), est_var(n);
    std::vector<DecisionRecord> decisions;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& m = trials[t];
      best[t] = m.best_arm_share;
      final_mse[t] = m.mse.back();
      for (double r : m.regret) cumulative[t] += r;
      truth_var[t] = m.true_reward_variance;
      est_var[t] = m.estimated_reward_variance;
      for (const auto& p : m.pairs) decisions.push_back({p.decided(), p.truth_delta});
    }

    json change = {{"first_update", 2}, {"mean", json::array()}, {"ci_lo", json::array()}, {"ci_hi", json::array()}};
    double peak = 0.0;
    int peak_update = 0;
    int above = 0;
    if (updates >= 2) {
      const auto mean_change = allocation_change(best);
      std::vector<double> deltas(n);
      for (std::size_t u = 1; u < updates; ++u) {
        for (std::size_t t = 0; t < n; ++t) deltas[t] = std::abs(best[t][u] - best[t][u - 1]);
        const auto ci = bootstrap_ci(deltas, config.bootstrap_iterations, 0.95, derive_seed(config.base_seed, u));
        const double m = mean_change[u - 1];
        change["mean"].push_back(m);
        change["ci_lo"].push_back(ci.lo);
        change["ci_hi"].push_back(ci.hi);
        if (m > peak) {
          peak = m;
          peak_update = static_cast<int>(u + 1);
        }
        if (m > 0.05) ++above;
      }
    }

    json best_median = json::array(), second_third_median = json::array(), mse_mean = json::array(),
         regret_mean = json::array();
    std::vector<double> column(n);
    for (std::size_t u = 0; u < updates; ++u) {
      double mse_sum = 0.0, regret_sum = 0.0;
      for (std::size_t t = 0; t < n; ++t) column[t] = trials[t].best_arm_share[u];
      best_median.push_back(median(column));
      for (std::size_t t = 0; t < n; ++t) column[t] = trials[t].second_third_share[u];
      second_third_median.push_back(median(column));
      for (const auto& m : trials) {
        mse_sum += m.mse[u];
        regret_sum += m.regret[u];
      }
      mse_mean.push_back(mse_sum / static_cast<double>(n));
      regret_mean.push_back(regret_sum / static_cast<double>(n));
    }

    const auto rates = score_rates(decisions, sc.mde);
    const auto regret_ci = bootstrap_ci(cumulative, config.bootstrap_iterations, 0.95, config.base_seed);

    variants[std::string(to_string(config.variants[vi]))] = {
        {"allocation_change", change},
        {"peak_allocation_change", peak},
        {"peak_update", peak_update},
        {"updates_change_above_0_05", above},
        {"best_arm_share_median", best_median},
        {"second_third_share_median", second_third_median},
        {"mse_mean", mse_mean},
        {"final_mse_mean", mse_mean.empty() ? json(nullptr) : mse_mean.back()},
        {"final_mse_inter_trial_variance", n >= 2 ? json(inter_trial_variance(final_mse)) : json(nullptr)},
        {"regret_per_update_mean", regret_mean},
        {"cumulative_regret", {{"mean", regret_ci.point}, {"ci_lo", regret_ci.lo}, {"ci_hi", regret_ci.hi}}},
        {"tpr", optional_json(rates.tpr)},
        {"fpr", optional_json(rates.fpr)},
        {"positives", rates.positives},
        {"negatives", rates.negatives},
        {"truth_estimate_correlation", optional_json(truth_estimate_correlation(truth_var, est_var))},
    };

    if (vi == 0) {
      for (const auto& m : trials) {
        std::size_t big = 0, total = 0;
        for (std::size_t i = 0; i < m.initial_rewards.size(); ++i)
          for (std::size_t j = i + 1; j < m.initial_rewards.size(); ++j, ++total)
            if (std::abs(m.initial_rewards[i] - m.initial_rewards[j]) >= sc.mde) ++big;
        if (total > 0) {
          effect_fraction += static_cast<double>(big) / static_cast<double>(total);
          ++effect_trials;
        }
      }
    }
  }

  return {
      {"trials", by_variant.front().size()},
      {"updates", sc.updates},
      {"arm_count", sc.arm_count},
      {"mde", sc.mde},
      {"pairs_with_true_effect_at_least_mde",
       effect_trials ? json(effect_fraction / static_cast<double>(effect_trials)) : json(nullptr)},
      {"variants", variants},
  };
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options) {
  config.validate();
  const auto& dir = config.output_dir;
  ensure_writable(dir);
  const auto started = utc_now();

  auto updates_out = open_out(dir / kUpdatesCsv);
  updates_out << kUpdatesHeader;
  std::ofstream pairs_out;
  if (config.write_pair_csv) {
    pairs_out = open_out(dir / kPairsCsv);
    pairs_out << kPairsHeader;
  }

  const int trials = config.trials;
  std::vector<std::vector<TrialMetrics>> results(config.variants.size(), std::vector<TrialMetrics>(trials));

  std::mutex mutex;
  std::map<int, Chunk> ready;
  int next_to_write = 0;
  int done = 0;
  std::atomic<int> next_trial{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;

  auto worker = [&] {
    try {
      for (int t = next_trial++; t < trials && !failed; t = next_trial++) {
        Chunk chunk;
        const auto seed = config.trial_seed(t);
        for (std::size_t vi = 0; vi < config.variants.size(); ++vi) {
          CsvTrialWriter writer(t, config.variants[vi], chunk.updates, config.write_pair_csv ? &chunk.pairs : nullptr);
          auto metrics = run_trial(config.scenario, config.variants[vi], seed, &writer);
          compact(metrics);
          results[vi][static_cast<std::size_t>(t)] = std::move(metrics);
        }
        std::lock_guard lock(mutex);
        ready.emplace(t, std::move(chunk));
        // Commit in trial order so file content is independent of scheduling.
        for (auto it = ready.find(next_to_write); it != ready.end(); it = ready.find(next_to_write)) {
          updates_out << it->second.updates;
          if (config.write_pair_csv) pairs_out << it->second.pairs;
          if (!updates_out || (config.write_pair_csv && !pairs_out))
            throw IoError(fmt::format("{}: write failed", dir.string()));
          ready.erase(it);
          ++next_to_write;
        }
        ++done;
        if (options.progress) options.progress(done, trials);
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };

  int workers = config.parallelism > 0 ? config.parallelism : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, trials);
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  if (!updates_out.flush()) throw IoError(fmt::format("{}: write failed", (dir / kUpdatesCsv).string()));
  updates_out.close();
  if (config.write_pair_csv) {
    if (!pairs_out.flush()) throw IoError(fmt::format("{}: write failed", (dir / kPairsCsv).string()));
    pairs_out.close();
  }

  ExperimentResult result;
  result.summary = summarize(config, results);
  write_json(dir / kSummaryJson, result.summary);

  json seeds = json::array();
  for (int t = 0; t < trials; ++t) seeds.push_back(config.trial_seed(t));
  json files = json::array();
  for (const char* name : {kUpdatesCsv, kPairsCsv, kSummaryJson}) {
    if (!std::filesystem::exists(dir / name)) continue;
    files.push_back({{"name", name}, {"bytes", std::filesystem::file_size(dir / name)}});
  }
  result.manifest = {
      {"tool", "smoothbandit"},
      {"version", SMOOTHBANDIT_VERSION},
      {"config", to_json(config)},
      {"trial_seeds", seeds},
      {"started_at", started},
      {"finished_at", utc_now()},
      {"files", files},
  };
  write_json(dir / kManifestJson, result.manifest);
  return result;
}

void replay_trial(const json& manifest, int trial, std::ostream& out) {
  if (!manifest.is_object() || !manifest.contains("config") || !manifest.contains("trial_seeds"))
    throw ConfigError("manifest: missing 'config' or 'trial_seeds'");
  const auto config = parse_config(manifest.at("config"), std::filesystem::current_path());
  const auto& seeds = manifest.at("trial_seeds");
  if (!seeds.is_array() || trial < 0 || static_cast<std::size_t>(trial) >= seeds.size())
    throw ConfigError(fmt::format("manifest: trial {} not recorded (0..{})", trial,
                                  seeds.is_array() ? static_cast<long>(seeds.size()) - 1 : -1L));
  std::uint64_t seed = 0;
  try {
    seed = seeds.at(static_cast<std::size_t>(trial)).get<std::uint64_t>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("manifest: seed for trial {} is not an integer", trial));
  }

  std::string rows = kUpdatesHeader;
  for (auto variant : config.variants) {
    CsvTrialWriter writer(trial, variant, rows, nullptr);
    run_trial(config.scenario, variant, seed, &writer);
  }
  out << rows;
  if (!out) throw IoError("replay: write failed");
}

}  // namespace smoothbandit

#include "smoothbandit/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "smoothbandit/errors.hpp"
#include "smoothbandit/random.hpp"

namespace smoothbandit {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{}: wrong type ({})", where, key, it->type_name()));
  }
}

std::string type_of(const json& obj, const std::string& where) {
  auto it = obj.find("type");
  if (it == obj.end() || !it->is_string()) throw ConfigError(fmt::format("{}: missing string 'type'", where));
  return it->get<std::string>();
}

std::filesystem::path sample_path(const json& obj, const std::string& where, const std::filesystem::path& base) {
  std::string file;
  read(obj, "file", where, file);
  if (file.empty()) throw ConfigError(fmt::format("{}: empirical source needs 'file'", where));
  std::filesystem::path p(file);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

RewardSource parse_rewards(const json& obj, const std::filesystem::path& base) {
  const std::string where = "scenario.rewards";
  const auto type = type_of(obj, where);
  if (type == "beta") {
    check_keys(obj, where, {"type", "alpha", "beta"});
    BetaRewards b;
    read(obj, "alpha", where, b.alpha);
    read(obj, "beta", where, b.beta);
    return b;
  }
  if (type == "empirical") {
    check_keys(obj, where, {"type", "file"});
    return EmpiricalRewards{sample_path(obj, where, base)};
  }
  if (type == "fixed") {
    check_keys(obj, where, {"type", "values"});
    FixedRewards f;
    read(obj, "values", where, f.values);
    return f;
  }
  throw ConfigError(fmt::format("{}: unknown type '{}' (beta, empirical, fixed)", where, type));
}

DelaySource parse_delays(const json& obj, const std::filesystem::path& base) {
  const std::string where = "scenario.delays";
  const auto type = type_of(obj, where);
  if (type == "poisson_uniform") {
    check_keys(obj, where, {"type", "lambda_min", "lambda_max"});
    PoissonUniformDelays d;
    read(obj, "lambda_min", where, d.lambda_min);
    read(obj, "lambda_max", where, d.lambda_max);
    return d;
  }
  if (type == "poisson_fixed") {
    check_keys(obj, where, {"type", "lambda"});
    PoissonFixedDelays d;
    read(obj, "lambda", where, d.lambda);
    return d;
  }
  if (type == "empirical") {
    check_keys(obj, where, {"type", "file"});
    return EmpiricalDelays{sample_path(obj, where, base)};
  }
  throw ConfigError(fmt::format("{}: unknown type '{}' (poisson_uniform, poisson_fixed, empirical)", where, type));
}

ScenarioConfig parse_scenario(const json& obj, const std::filesystem::path& base) {
  const std::string where = "scenario";
  check_keys(obj, where,
             {"arm_count", "updates", "batch_size", "rewards", "delays", "change_point", "window", "mean_basis", "mde",
              "bf_threshold_log10"});
  ScenarioConfig s;
  read(obj, "arm_count", where, s.arm_count);
  read(obj, "updates", where, s.updates);
  read(obj, "batch_size", where, s.batch_size);
  read(obj, "mde", where, s.mde);
  read(obj, "bf_threshold_log10", where, s.bf_threshold_log10);
  if (auto it = obj.find("rewards"); it != obj.end()) s.rewards = parse_rewards(*it, base);
  if (auto it = obj.find("delays"); it != obj.end()) s.delays = parse_delays(*it, base);
  if (auto it = obj.find("change_point"); it != obj.end() && !it->is_null()) {
    int cp = 0;
    read(obj, "change_point", where, cp);
    s.change_point = cp;
  }
  if (auto it = obj.find("window"); it != obj.end()) {
    check_keys(*it, "scenario.window", {"mode", "length"});
    std::string mode = "growing";
    read(*it, "mode", "scenario.window", mode);
    if (mode == "growing") {
      s.window_mode = WindowMode::growing;
    } else if (mode == "sliding") {
      s.window_mode = WindowMode::sliding;
    } else {
      throw ConfigError(fmt::format("scenario.window.mode: unknown mode '{}' (growing, sliding)", mode));
    }
    read(*it, "length", "scenario.window", s.window_bound);
  }
  if (auto it = obj.find("mean_basis"); it != obj.end()) {
    std::string basis;
    read(obj, "mean_basis", where, basis);
    if (basis == "allocations") {
      s.mean_basis = MeanBasis::allocations;
    } else if (basis == "responses") {
      s.mean_basis = MeanBasis::responses;
    } else {
      throw ConfigError(fmt::format("scenario.mean_basis: unknown value '{}' (allocations, responses)", basis));
    }
  }
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  scenario.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (variants.empty()) throw ConfigError("variants must not be empty");
  if (std::set<PolicyKind>(variants.begin(), variants.end()).size() != variants.size())
    throw ConfigError("variants must be distinct");
  if (parallelism < 0) throw ConfigError("parallelism must be >= 0");
  if (bootstrap_iterations < 1) throw ConfigError("bootstrap_iterations must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::uint64_t ExperimentConfig::trial_seed(int trial) const {
  return derive_seed(base_seed, static_cast<std::uint64_t>(trial));
}

std::vector<PolicyKind> parse_variant_list(const std::string& list) {
  std::vector<PolicyKind> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (name.empty()) continue;
    auto kind = parse_policy_kind(name);
    if (!kind) throw ConfigError(fmt::format("unknown variant '{}' (mle, veb, useb, dseb)", name));
    if (std::find(out.begin(), out.end(), *kind) != out.end())
      throw ConfigError(fmt::format("variant '{}' listed twice", name));
    out.push_back(*kind);
  }
  if (out.empty()) throw ConfigError("variant list is empty");
  return out;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config",
             {"scenario", "variants", "trials", "base_seed", "parallelism", "output_dir", "write_pair_csv",
              "bootstrap_iterations"});
  ExperimentConfig c;
  if (auto it = doc.find("scenario"); it != doc.end()) c.scenario = parse_scenario(*it, base_dir);
  if (auto it = doc.find("variants"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("config.variants: expected an array of names");
    std::string joined;
    for (const auto& v : *it) {
      if (!v.is_string()) throw ConfigError("config.variants: expected an array of names");
      joined += v.get<std::string>() + ",";
    }
    c.variants = parse_variant_list(joined);
  }
  read(doc, "trials", "config", c.trials);
  read(doc, "base_seed", "config", c.base_seed);
  read(doc, "parallelism", "config", c.parallelism);
  read(doc, "write_pair_csv", "config", c.write_pair_csv);
  read(doc, "bootstrap_iterations", "config", c.bootstrap_iterations);
  std::string out;
  read(doc, "output_dir", "config", out);
  if (!out.empty()) {
    std::filesystem::path p(out);
    c.output_dir = p.is_relative() ? (base_dir / p).lexically_normal() : p;
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", file.string()));
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
  }
  try {
    return parse_config(doc, std::filesystem::absolute(file).parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
  }
}

json to_json(const ExperimentConfig& c) {
  const auto& s = c.scenario;
  json rewards = std::visit(
      [](const auto& r) -> json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BetaRewards>)
          return {{"type", "beta"}, {"alpha", r.alpha}, {"beta", r.beta}};
        else if constexpr (std::is_same_v<T, FixedRewards>)
          return {{"type", "fixed"}, {"values", r.values}};
        else
          return {{"type", "empirical"}, {"file", std::filesystem::absolute(r.file).string()}};
      },
      s.rewards);
  json delays = std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PoissonUniformDelays>)
          return {{"type", "poisson_uniform"}, {"lambda_min", d.lambda_min}, {"lambda_max", d.lambda_max}};
        else if constexpr (std::is_same_v<T, PoissonFixedDelays>)
          return {{"type", "poisson_fixed"}, {"lambda", d.lambda}};
        else
          return {{"type", "empirical"}, {"file", std::filesystem::absolute(d.file).string()}};
      },
      s.delays);

  json variants = json::array();
  for (auto v : c.variants) variants.push_back(std::string(to_string(v)));

  return {
      {"scenario",
       {{"arm_count", s.arm_count},
        {"updates", s.updates},
        {"batch_size", s.batch_size},
        {"rewards", rewards},
        {"delays", delays},
        {"change_point", s.change_point ? json(*s.change_point) : json(nullptr)},
        {"window",
         {{"mode", s.window_mode == WindowMode::growing ? "growing" : "sliding"}, {"length", s.window_bound}}},
        {"mean_basis", s.mean_basis == MeanBasis::allocations ? "allocations" : "responses"},
        {"mde", s.mde},
        {"bf_threshold_log10", s.bf_threshold_log10}}},
      {"variants", variants},
      {"trials", c.trials},
      {"base_seed", c.base_seed},
      {"parallelism", c.parallelism},
      {"output_dir", std::filesystem::absolute(c.output_dir).string()},
      {"write_pair_csv", c.write_pair_csv},
      {"bootstrap_iterations", c.bootstrap_iterations},
  };
}

}  // namespace smoothbandit

#include "smoothbandit/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "smoothbandit/errors.hpp"

namespace smoothbandit {

EmpiricalSampler::EmpiricalSampler(std::vector<double> values, std::string source)
    : values_(std::move(values)), source_(std::move(source)) {
  require(!values_.empty(), "EmpiricalSampler: no values");
}

double EmpiricalSampler::draw(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, values_.size() - 1);
  return values_[pick(rng)];
}

double EmpiricalSampler::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

EmpiricalSampler load_empirical(const std::filesystem::path& file, SampleRole role) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("cannot open sample file '{}'", file.string()));

  std::vector<double> values;
  std::string line;
  int row = 0;
  bool seen_data_line = false;
  while (std::getline(in, line)) {
    ++row;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto value = parse_number(text);
    if (!value) {
      if (!seen_data_line) {
        seen_data_line = true;  // header
        continue;
      }
      throw ConfigError(fmt::format("{}:{}: not a number: '{}'", file.string(), row, text));
    }
    seen_data_line = true;
    if (role == SampleRole::reward && (*value < 0.0 || *value > 1.0))
      throw ConfigError(fmt::format("{}:{}: reward {} outside [0, 1]", file.string(), row, *value));
    if (role == SampleRole::delay && *value < 0.0)
      throw ConfigError(fmt::format("{}:{}: negative delay {}", file.string(), row, *value));
    values.push_back(*value);
  }
  if (values.empty()) throw ConfigError(fmt::format("sample file '{}' holds no values", file.string()));
  return EmpiricalSampler(std::move(values), file.string());
}

void ScenarioConfig::validate() const {
  if (arm_count < 1) throw ConfigError("arm_count must be >= 1");
  if (updates < 1) throw ConfigError("updates must be >= 1");
  if (batch_size < 0) throw ConfigError("batch_size must be >= 0");
  if (!(mde > 0.0)) throw ConfigError("mde must be > 0");
  if (!(bf_threshold_log10 > 0.0)) throw ConfigError("bf threshold must be > 0");
  if (change_point && (*change_point < 2 || *change_point > updates))
    throw ConfigError(fmt::format("change_point {} outside [2, {}]", *change_point, updates));
  if (window_mode == WindowMode::sliding && window_bound < 1) throw ConfigError("window length must be >= 1");
  if (const auto* beta = std::get_if<BetaRewards>(&rewards); beta && !(beta->alpha > 0.0 && beta->beta > 0.0))
    throw ConfigError("beta reward parameters must be > 0");
  if (const auto* f = std::get_if<FixedRewards>(&rewards)) {
    if (static_cast<int>(f->values.size()) != arm_count)
      throw ConfigError(fmt::format("fixed rewards: {} values for {} arms", f->values.size(), arm_count));
    for (double v : f->values)
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("fixed rewards: {} outside [0, 1]", v));
  }
  if (const auto* u = std::get_if<PoissonUniformDelays>(&delays); u && !(u->lambda_min >= 1 && u->lambda_max >= u->lambda_min))
    throw ConfigError("poisson_uniform needs 1 <= lambda_min <= lambda_max");
  if (const auto* f = std::get_if<PoissonFixedDelays>(&delays); f && !(f->lambda > 0.0))
    throw ConfigError("poisson_fixed lambda must be > 0");
}

int ScenarioConfig::window_length_at(int update) const {
  if (window_mode == WindowMode::growing) return std::max(update, 1);
  return std::clamp(update, 1, window_bound);
}

void DeliveryBuffer::push(const ResponseRecord& record) {
  require(record.deliver_at >= record.allocated_at, "DeliveryBuffer: delivery before allocation");
  require(record.outcome == 0 || record.outcome == 1, "DeliveryBuffer: outcome must be binary");
  push(record.arm_id, record.deliver_at, 1, record.outcome);
}

void DeliveryBuffer::push(int arm_id, int deliver_at, std::int64_t count, std::int64_t successes) {
  require(arm_id >= 0 && arm_id < arm_count_, "DeliveryBuffer: arm out of range");
  require(count >= 0 && successes >= 0 && successes <= count, "DeliveryBuffer: bad counts");
  if (count == 0) return;
  auto& cells = due_[deliver_at];
  if (cells.empty()) cells.resize(static_cast<std::size_t>(arm_count_));
  auto& cell = cells[static_cast<std::size_t>(arm_id)];
  cell.count += count;
  cell.successes += successes;
  pending_ += count;
}

std::vector<BatchStats> DeliveryBuffer::drain_due(int update) {
  std::vector<BatchStats> stats(static_cast<std::size_t>(arm_count_));
  for (int k = 0; k < arm_count_; ++k) stats[static_cast<std::size_t>(k)] = {k, update, 0, 0, 0};
  auto it = due_.begin();
  while (it != due_.end() && it->first <= update) {
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      stats[k].response_count += it->second[k].count;
      stats[k].response_sum += it->second[k].successes;
      pending_ -= it->second[k].count;
    }
    it = due_.erase(it);
  }
  return stats;
}

std::optional<int> DeliveryBuffer::earliest_delivery() const {
  if (due_.empty()) return std::nullopt;
  return due_.begin()->first;
}

World::World(const ScenarioConfig& config, std::vector<ArmSpec> arms, std::uint64_t seed,
             std::optional<EmpiricalSampler> delay_sampler)
    : arms_(std::move(arms)),
      buffer_(static_cast<int>(arms_.size())),
      response_rng_(make_stream(seed, Stream::responses)),
      change_rng_(make_stream(seed, Stream::change_point)),
      delay_sampler_(std::move(delay_sampler)),
      allocated_now_(arms_.size(), 0),
      allocated_total_(arms_.size(), 0),
      delivered_total_(arms_.size(), 0) {
  require(static_cast<int>(arms_.size()) == config.arm_count, "World: arm count mismatch");
  if (!delay_sampler_) {
    for (const auto& arm : arms_) {
      require(arm.delay_lambda > 0.0, "World: delay rate must be > 0");
      delay_dists_.emplace_back(arm.delay_lambda);
    }
  }
}

std::vector<double> World::true_rewards() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& arm : arms_) out.push_back(arm.true_reward);
  return out;
}

int World::draw_delay(std::size_t arm) {
  if (delay_sampler_) return static_cast<int>(std::llround(delay_sampler_->draw(response_rng_)));
  return delay_dists_[arm](response_rng_);
}

void World::generate_responses(const AllocationPlan& plan) {
  require(plan.update_index == current_update_, "generate_responses: plan is for a different update");
  require(plan.counts.size() == arms_.size(), "generate_responses: plan arm count mismatch");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    const auto n = plan.counts[k];
    allocated_now_[k] += n;
    allocated_total_[k] += n;
    const double p = arms_[k].true_reward;
    // [delay] -> (count, successes), flushed to the buffer once per arm
    std::vector<std::pair<std::int64_t, std::int64_t>> by_delay;
    for (std::int64_t i = 0; i < n; ++i) {
      const int outcome = unit(response_rng_) < p ? 1 : 0;
      const auto delay = static_cast<std::size_t>(draw_delay(k));
      if (delay >= by_delay.size()) by_delay.resize(delay + 1);
      ++by_delay[delay].first;
      by_delay[delay].second += outcome;
    }
    for (std::size_t l = 0; l < by_delay.size(); ++l)
      buffer_.push(static_cast<int>(k), current_update_ + static_cast<int>(l), by_delay[l].first, by_delay[l].second);
  }
}

std::vector<BatchStats> World::collect_due() {
  auto stats = buffer_.drain_due(current_update_);
  for (std::size_t k = 0; k < stats.size(); ++k) {
    stats[k].allocated = allocated_now_[k];
    delivered_total_[k] += stats[k].response_count;
    allocated_now_[k] = 0;
  }
  ++current_update_;
  return stats;
}

void World::apply_change_point() {
  std::vector<int> perm(arms_.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), change_rng_);
  const auto old = true_rewards();
  for (std::size_t k = 0; k < arms_.size(); ++k) arms_[k].true_reward = old[static_cast<std::size_t>(perm[k])];
  permutation_ = std::move(perm);
}

namespace {

double draw_beta(const BetaRewards& b, Rng& rng) {
  std::gamma_distribution<double> ga(b.alpha, 1.0);
  std::gamma_distribution<double> gb(b.beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

World init_world(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng = make_stream(seed, Stream::arms);

  std::optional<EmpiricalSampler> reward_sampler;
  if (const auto* e = std::get_if<EmpiricalRewards>(&config.rewards))
    reward_sampler = load_empirical(e->file, SampleRole::reward);
  std::optional<EmpiricalSampler> delay_sampler;
  if (const auto* e = std::get_if<EmpiricalDelays>(&config.delays))
    delay_sampler = load_empirical(e->file, SampleRole::delay);

  std::vector<ArmSpec> arms(static_cast<std::size_t>(config.arm_count));
  for (int k = 0; k < config.arm_count; ++k) {
    auto& arm = arms[static_cast<std::size_t>(k)];
    arm.arm_id = k;
    if (reward_sampler)
      arm.true_reward = reward_sampler->draw(rng);
    else if (const auto* f = std::get_if<FixedRewards>(&config.rewards))
      arm.true_reward = f->values[static_cast<std::size_t>(k)];
    else
      arm.true_reward = draw_beta(std::get<BetaRewards>(config.rewards), rng);

    if (const auto* u = std::get_if<PoissonUniformDelays>(&config.delays)) {
      std::uniform_int_distribution<int> pick(u->lambda_min, u->lambda_max);
      arm.delay_lambda = pick(rng);
    } else if (const auto* f = std::get_if<PoissonFixedDelays>(&config.delays)) {
      arm.delay_lambda = f->lambda;
    } else {
      arm.delay_lambda = delay_sampler->mean();
    }
  }
  return World(config, std::move(arms), seed, std::move(delay_sampler));
}

}  // namespace smoothbandit

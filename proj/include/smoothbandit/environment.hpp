#pragma once

// Simulated delayed-feedback world: Bernoulli arms with hidden rewards,
// per-arm Poisson response delays, a delivery buffer keyed by delivery
// update, optional change points, and empirical samplers for realistic runs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smoothbandit/estimation.hpp"
#include "smoothbandit/policy.hpp"
#include "smoothbandit/random.hpp"

namespace smoothbandit {

/// Uniform resampling (with replacement) from values read from a file.
class EmpiricalSampler {
 public:
  EmpiricalSampler() = default;
  EmpiricalSampler(std::vector<double> values, std::string source);

  double draw(Rng& rng) const;
  double mean() const;
  const std::vector<double>& values() const { return values_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<double> values_;
  std::string source_;
};

enum class SampleRole { reward, delay };

/// Reads a one-column numeric sample file. Blank lines and `#` comments are
/// skipped; a non-numeric first data line is treated as a header. Rewards
/// must lie in [0, 1], delays must be >= 0. Throws ConfigError naming the
/// file and the offending row.
EmpiricalSampler load_empirical(const std::filesystem::path& file, SampleRole role);

struct BetaRewards {
  double alpha = 3.0;
  double beta = 80.0;
};
struct EmpiricalRewards {
  std::filesystem::path file;
};
/// One reward per arm, in arm order.
struct FixedRewards {
  std::vector<double> values;
};
using RewardSource = std::variant<BetaRewards, EmpiricalRewards, FixedRewards>;

struct PoissonUniformDelays {
  int lambda_min = 1;
  int lambda_max = 5;
};
struct PoissonFixedDelays {
  double lambda = 1.0;
};
struct EmpiricalDelays {
  std::filesystem::path file;
};
using DelaySource = std::variant<PoissonUniformDelays, PoissonFixedDelays, EmpiricalDelays>;

enum class WindowMode { growing, sliding };

struct ScenarioConfig {
  int arm_count = 15;
  int updates = 300;
  std::int64_t batch_size = 1000;
  RewardSource rewards = BetaRewards{};
  DelaySource delays = PoissonUniformDelays{};
  std::optional<int> change_point;
  WindowMode window_mode = WindowMode::growing;
  int window_bound = 50;  // U in sliding mode; unused when growing
  MeanBasis mean_basis = MeanBasis::allocations;
  double mde = 0.01;
  double bf_threshold_log10 = 1.2787536009528289;  // log10(19)

  /// Throws ConfigError on violated invariants.
  void validate() const;
  /// Window length at update u (1-based).
  int window_length_at(int update) const;
};

struct ArmSpec {
  int arm_id = 0;
  double true_reward = 0.0;
  double delay_lambda = 1.0;  // Poisson rate, or the sample mean for empirical delays
};

struct ResponseRecord {
  int arm_id = 0;
  int allocated_at = 1;
  int deliver_at = 1;
  int outcome = 0;
};

/// Pending responses aggregated per (delivery update, arm). Feedback is
/// anonymous, so only counts and sums survive.
class DeliveryBuffer {
 public:
  explicit DeliveryBuffer(int arm_count = 0) : arm_count_(arm_count) {}

  void push(const ResponseRecord& record);
  void push(int arm_id, int deliver_at, std::int64_t count, std::int64_t successes);
  /// Removes and aggregates everything due at or before `update`.
  std::vector<BatchStats> drain_due(int update);
  std::int64_t pending() const { return pending_; }
  bool empty() const { return pending_ == 0; }
  std::optional<int> earliest_delivery() const;

 private:
  struct Cell {
    std::int64_t count = 0;
    std::int64_t successes = 0;
  };
  int arm_count_;
  std::map<int, std::vector<Cell>> due_;
  std::int64_t pending_ = 0;
};

class World {
 public:
  World(const ScenarioConfig& config, std::vector<ArmSpec> arms, std::uint64_t seed,
        std::optional<EmpiricalSampler> delay_sampler);

  const std::vector<ArmSpec>& arms() const { return arms_; }
  std::vector<double> true_rewards() const;
  int current_update() const { return current_update_; }
  const DeliveryBuffer& buffer() const { return buffer_; }
  DeliveryBuffer& buffer() { return buffer_; }
  /// Permutation applied at the change point: new reward of arm k is the
  /// old reward of arm permutation[k]. Empty until a change point fires.
  const std::vector<int>& permutation() const { return permutation_; }
  std::int64_t allocated_total(int arm) const { return allocated_total_[static_cast<std::size_t>(arm)]; }
  std::int64_t delivered_total(int arm) const { return delivered_total_[static_cast<std::size_t>(arm)]; }

  /// Draws one outcome and one delay per allocated unit and buffers them.
  void generate_responses(const AllocationPlan& plan);
  /// Delivers everything due by the current update and advances the clock.
  std::vector<BatchStats> collect_due();
  /// Randomly permutes true rewards; delays are untouched.
  void apply_change_point();

 private:
  int draw_delay(std::size_t arm);

  std::vector<ArmSpec> arms_;
  DeliveryBuffer buffer_;
  int current_update_ = 1;
  Rng response_rng_;
  Rng change_rng_;
  std::optional<EmpiricalSampler> delay_sampler_;
  std::vector<std::poisson_distribution<int>> delay_dists_;
  std::vector<std::int64_t> allocated_now_;
  std::vector<std::int64_t> allocated_total_;
  std::vector<std::int64_t> delivered_total_;
  std::vector<int> permutation_;
};

/// Builds a world with arm rewards and delay rates drawn from the scenario
/// sources. Deterministic in `seed`; arm draws use their own stream so they
/// do not depend on anything a policy does.
World init_world(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace smoothbandit

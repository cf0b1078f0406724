// engine.hpp
//
// Synchronized multiplicative-weights dynamics for every resident, with
// regret bookkeeping, the time-averaged outcome distribution, and an online
// Monte Carlo estimate of the coarse correlated equilibrium gap.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nrd/cost_model.hpp"
#include "nrd/population.hpp"
#include "nrd/random_stream.hpp"
#include "nrd/spatial_graph.hpp"

namespace nrd {

struct EngineConfig {
  ModelParams params;
  std::uint64_t horizon = 0;  // T_max; fixes the step size
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t seed = 0;
  std::uint32_t cce_samples_per_step = 1;
  unsigned workers = 1;  // 0 means one per hardware thread

  // Throws std::invalid_argument.
  void validate() const;
};

// epsilon = sqrt(ln(num_actions) / horizon), capped at 1/2.
double step_size(std::size_t num_actions, std::uint64_t horizon);

// Log-weights are kept unnormalized (each entry is the running sum of
// cost * ln(1 - epsilon)); probabilities subtract the maximum before
// exponentiating, so no underflow occurs however long the run.
class MixedStrategy {
 public:
  MixedStrategy() = default;
  explicit MixedStrategy(std::size_t num_actions);
  static MixedStrategy from_log_weights(std::vector<double> log_weights);

  std::size_t size() const { return logw_.size(); }
  std::span<const double> log_weights() const { return logw_; }
  std::span<const double> probabilities() const { return p_; }

  // logw(h) += c(h) * ln(1 - epsilon), then renormalize.
  void update(std::span<const double> costs, double epsilon);

  // Inverse-CDF draw for u in [0, 1).
  std::size_t sample(double u) const;

  double entropy() const;

 private:
  void normalize();

  std::vector<double> logw_;
  std::vector<double> p_;
};

MixedStrategy mwu_update(MixedStrategy strategy, std::span<const double> costs, double epsilon);

struct RegretLedger {
  std::size_t num_agents = 0;
  std::size_t num_actions = 0;
  std::vector<double> realized_cum;  // sum_t c_j^t(h_j^t)
  std::vector<double> action_cum;    // agent-major, sum_t c_j^t(h)
  std::uint64_t steps = 0;

  RegretLedger() = default;
  RegretLedger(std::size_t agents, std::size_t actions);
  std::span<const double> action_row(std::size_t j) const {
    return {action_cum.data() + j * num_actions, num_actions};
  }
};

// (realized_cum - min_h action_cum) / steps.
double empirical_regret(const RegretLedger& ledger, std::size_t agent);
double max_empirical_regret(const RegretLedger& ledger);

struct CheckpointFrame {
  std::uint64_t step = 0;
  std::vector<double> pop_acc;
  std::vector<double> wealth_acc;
};

// pop_acc(h) = sum_t sum_j p_j^t(h); wealth_acc(h) = sum_t sum_j w_j p_j^t(h).
struct EquilibriumAccumulator {
  std::vector<double> pop_acc;
  std::vector<double> wealth_acc;
  std::vector<CheckpointFrame> frames;
};

// Sampled costs under profiles drawn from sigma^t, accumulated over the run.
struct CceLedger {
  std::uint64_t samples = 0;
  std::vector<double> realized;   // per agent: sum_s c_j(a^s)
  std::vector<double> deviation;  // agent-major: sum_s c_j(a', a^s_-j)
  std::vector<double> diff_sq;    // agent-major: sum_s (c_j(a^s) - c_j(a', a^s_-j))^2
};

struct CceGap {
  double gap = 0.0;        // clamped below at 0
  double std_error = 0.0;  // Monte Carlo standard error at the maximizing pair
  std::size_t agent = 0;
  std::size_t action = 0;
  std::uint64_t samples = 0;
};

struct EngineState {
  EngineConfig config;
  double epsilon = 0.0;
  std::vector<MixedStrategy> strategies;
  Profile profile;  // most recently enacted
  RegretLedger ledger;
  EquilibriumAccumulator accumulator;
  CceLedger cce;

  std::uint64_t steps_done() const { return ledger.steps; }
  std::size_t num_agents() const { return strategies.size(); }
  std::size_t num_actions() const { return ledger.num_actions; }
};

EngineState init_state(const Geography& geo, const EndowmentProfile& w, const EngineConfig& config);

// Throws std::logic_error if no CCE samples were taken.
CceGap estimate_cce_gap(const EngineState& state);

class Engine {
 public:
  Engine(const Geography& geo, const EndowmentProfile& w, EngineConfig config);
  // Resumes from a previously saved state.
  Engine(const Geography& geo, const EndowmentProfile& w, EngineState state);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // One round of play. Throws std::logic_error once the horizon is reached.
  void step();
  void run_until(std::uint64_t steps);
  void run() { run_until(state_.config.horizon); }

  const EngineState& state() const { return state_; }
  const CostModel& cost_model() const { return model_; }
  bool done() const { return state_.steps_done() >= state_.config.horizon; }

 private:
  struct Workers;

  void sample_profile(StreamTag tag, std::uint64_t draw, Profile& out) const;
  void evaluate_costs(const Profile& profile);
  void sample_cce(std::uint64_t draw);

  const Geography* geo_;
  const EndowmentProfile* w_;
  EngineState state_;
  CostModel model_;
  std::unique_ptr<Workers> workers_;

  StepFields fields_;
  std::vector<double> costs_;  // agent-major |R| x |H|
  Profile cce_profile_;
};

// Text checkpoint (JSON) tagged with the magic string "NRD1".
inline constexpr const char* kCheckpointMagic = "NRD1";
void save_checkpoint(const EngineState& state, const std::filesystem::path& path);
EngineState load_checkpoint(const std::filesystem::path& path);
std::string serialize_state(const EngineState& state);
EngineState deserialize_state(const std::string& text);

}  // namespace nrd

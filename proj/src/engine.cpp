#include "nrd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <oneapi/tbb/blocked_range.h>
#include <oneapi/tbb/info.h>
#include <oneapi/tbb/parallel_for.h>
#include <oneapi/tbb/task_arena.h>

#include "nrd/random_stream.hpp"

namespace nrd {

void EngineConfig::validate() const {
  params.validate();
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (checkpoints.empty()) throw std::invalid_argument("at least one checkpoint is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0) throw std::invalid_argument("checkpoints must be positive");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
      throw std::invalid_argument("checkpoints must be strictly increasing");
    }
  }
  if (checkpoints.back() > horizon) throw std::invalid_argument("checkpoint beyond horizon");
}

double step_size(std::size_t num_actions, std::uint64_t horizon) {
  if (num_actions < 2) return 0.0;
  const double eps =
      std::sqrt(std::log(static_cast<double>(num_actions)) / static_cast<double>(horizon));
  return std::min(eps, 0.5);
}

// --- MixedStrategy -------------------------------------------------------

MixedStrategy::MixedStrategy(std::size_t num_actions)
    : logw_(num_actions, 0.0), p_(num_actions, 0.0) {
  if (num_actions == 0) throw std::invalid_argument("strategy needs at least one action");
  normalize();
}

MixedStrategy MixedStrategy::from_log_weights(std::vector<double> log_weights) {
  if (log_weights.empty()) throw std::invalid_argument("strategy needs at least one action");
  MixedStrategy s;
  s.logw_ = std::move(log_weights);
  s.p_.resize(s.logw_.size());
  s.normalize();
  return s;
}

void MixedStrategy::normalize() {
  const double top = *std::max_element(logw_.begin(), logw_.end());
  double z = 0.0;
  for (std::size_t h = 0; h < logw_.size(); ++h) {
    p_[h] = std::exp(logw_[h] - top);
    z += p_[h];
  }
  const double inv = 1.0 / z;
  for (double& x : p_) x *= inv;
}

void MixedStrategy::update(std::span<const double> costs, double epsilon) {
  if (costs.size() != logw_.size()) throw std::invalid_argument("cost vector size mismatch");
  if (epsilon == 0.0) return;
  const double decay = std::log1p(-epsilon);
  for (std::size_t h = 0; h < logw_.size(); ++h) logw_[h] += costs[h] * decay;
  normalize();
}

std::size_t MixedStrategy::sample(double u) const {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t h = 0; h < p_.size(); ++h) {
    if (p_[h] <= 0.0) continue;
    cum += p_[h];
    last_positive = h;
    if (u < cum) return h;
  }
  return last_positive;
}

double MixedStrategy::entropy() const {
  double e = 0.0;
  for (double x : p_) {
    if (x > 0.0) e -= x * std::log(x);
  }
  return e;
}

MixedStrategy mwu_update(MixedStrategy strategy, std::span<const double> costs, double epsilon) {
  strategy.update(costs, epsilon);
  return strategy;
}

// --- Ledgers ---------------------------------------------------------------

RegretLedger::RegretLedger(std::size_t agents, std::size_t actions)
    : num_agents(agents),
      num_actions(actions),
      realized_cum(agents, 0.0),
      action_cum(agents * actions, 0.0) {}

double empirical_regret(const RegretLedger& ledger, std::size_t agent) {
  if (ledger.steps == 0) throw std::logic_error("empirical_regret: no steps recorded");
  const auto row = ledger.action_row(agent);
  const double best = *std::min_element(row.begin(), row.end());
  return (ledger.realized_cum[agent] - best) / static_cast<double>(ledger.steps);
}

double max_empirical_regret(const RegretLedger& ledger) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ledger.num_agents; ++j) {
    worst = std::max(worst, empirical_regret(ledger, j));
  }
  return worst;
}

CceGap estimate_cce_gap(const EngineState& state) {
  const CceLedger& cce = state.cce;
  if (cce.samples == 0) throw std::logic_error("estimate_cce_gap: no CCE samples were taken");
  const std::size_t na = state.num_actions();
  const double s = static_cast<double>(cce.samples);

  CceGap best;
  best.samples = cce.samples;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < state.num_agents(); ++j) {
    for (std::size_t a = 0; a < na; ++a) {
      const double mean = (cce.realized[j] - cce.deviation[j * na + a]) / s;
      if (mean > best_mean) {
        best_mean = mean;
        best.agent = j;
        best.action = a;
      }
    }
  }
  best.gap = std::max(best_mean, 0.0);
  if (cce.samples > 1) {
    const double sq = cce.diff_sq[best.agent * na + best.action];
    const double var = std::max((sq - s * best_mean * best_mean) / (s - 1.0), 0.0);
    best.std_error = std::sqrt(var / s);
  }
  return best;
}

EngineState init_state(const Geography& geo, const EndowmentProfile& w,
                       const EngineConfig& config) {
  config.validate();
  const std::size_t nh = geo.num_housing();
  const std::size_t nr = w.size();
  EngineState s;
  s.config = config;
  s.epsilon = step_size(nh, config.horizon);
  s.strategies.assign(nr, MixedStrategy(nh));
  s.profile.site.assign(nr, 0);
  s.ledger = RegretLedger(nr, nh);
  s.accumulator.pop_acc.assign(nh, 0.0);
  s.accumulator.wealth_acc.assign(nh, 0.0);
  s.cce.realized.assign(nr, 0.0);
  s.cce.deviation.assign(nr * nh, 0.0);
  s.cce.diff_sq.assign(nr * nh, 0.0);
  return s;
}

// --- Engine ---------------------------------------------------------------

struct Engine::Workers {
  explicit Workers(unsigned n)
      : arena(n == 0 ? tbb::task_arena::automatic
                     : std::min(static_cast<int>(n), tbb::info::default_concurrency())) {}

  template <class Fn>
  void for_each_agent(std::size_t count, Fn&& fn) {
    arena.execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count),
                        [&](const tbb::blocked_range<std::size_t>& r) {
                          for (std::size_t j = r.begin(); j != r.end(); ++j) fn(j);
                        });
    });
  }

  tbb::task_arena arena;
};

Engine::Engine(const Geography& geo, const EndowmentProfile& w, EngineConfig config)
    : Engine(geo, w, init_state(geo, w, config)) {}

Engine::Engine(const Geography& geo, const EndowmentProfile& w, EngineState state)
    : geo_(&geo),
      w_(&w),
      state_(std::move(state)),
      model_(geo, w, state_.config.params),
      workers_(std::make_unique<Workers>(state_.config.workers)) {
  if (state_.num_agents() != w.size() || state_.num_actions() != geo.num_housing()) {
    throw std::invalid_argument("engine state does not match the instance");
  }
  costs_.assign(w.size() * geo.num_housing(), 0.0);
  cce_profile_.site.assign(w.size(), 0);
}

Engine::~Engine() = default;

void Engine::sample_profile(StreamTag tag, std::uint64_t draw, Profile& out) const {
  const std::uint64_t seed = state_.config.seed;
  const std::uint64_t t = state_.steps_done();
  workers_->for_each_agent(state_.num_agents(), [&](std::size_t j) {
    const double u = stream_uniform(seed, tag, j, t, draw);
    out.site[j] = static_cast<std::uint32_t>(state_.strategies[j].sample(u));
  });
}

void Engine::evaluate_costs(const Profile& profile) {
  model_.build_fields(profile, fields_);
  const std::size_t nh = state_.num_actions();
  workers_->for_each_agent(state_.num_agents(), [&](std::size_t j) {
    model_.cost_vector(j, fields_, std::span<double>(costs_.data() + j * nh, nh));
  });
}

void Engine::step() {
  if (done()) throw std::logic_error("step: horizon already reached");
  const std::size_t nr = state_.num_agents();
  const std::size_t nh = state_.num_actions();
  const std::uint32_t cce_samples = state_.config.cce_samples_per_step;

  // Play and CCE profiles are all drawn from sigma^t before any update.
  sample_profile(StreamTag::play, 0, state_.profile);
  std::vector<Profile> cce_profiles(cce_samples, Profile{std::vector<std::uint32_t>(nr)});
  for (std::uint32_t k = 0; k < cce_samples; ++k) {
    sample_profile(StreamTag::cce, k, cce_profiles[k]);
  }

  // Expected population and wealth under p^t, summed in agent order.
  auto& acc = state_.accumulator;
  for (std::size_t j = 0; j < nr; ++j) {
    const auto p = state_.strategies[j].probabilities();
    const double wj = (*w_)[j];
    for (std::size_t h = 0; h < nh; ++h) {
      acc.pop_acc[h] += p[h];
      acc.wealth_acc[h] += wj * p[h];
    }
  }

  evaluate_costs(state_.profile);
  auto& ledger = state_.ledger;
  const double eps = state_.epsilon;
  workers_->for_each_agent(nr, [&](std::size_t j) {
    const double* c = costs_.data() + j * nh;
    ledger.realized_cum[j] += c[state_.profile.site[j]];
    double* row = ledger.action_cum.data() + j * nh;
    for (std::size_t h = 0; h < nh; ++h) row[h] += c[h];
    state_.strategies[j].update(std::span<const double>(c, nh), eps);
  });
  ++ledger.steps;

  auto& cce = state_.cce;
  for (const Profile& sampled : cce_profiles) {
    evaluate_costs(sampled);
    workers_->for_each_agent(nr, [&](std::size_t j) {
      const double* c = costs_.data() + j * nh;
      const double own = c[sampled.site[j]];
      cce.realized[j] += own;
      double* dev = cce.deviation.data() + j * nh;
      double* sq = cce.diff_sq.data() + j * nh;
      for (std::size_t h = 0; h < nh; ++h) {
        const double d = own - c[h];
        dev[h] += c[h];
        sq[h] += d * d;
      }
    });
    ++cce.samples;
  }

  const auto& cps = state_.config.checkpoints;
  if (std::binary_search(cps.begin(), cps.end(), ledger.steps)) {
    acc.frames.push_back({ledger.steps, acc.pop_acc, acc.wealth_acc});
  }
}

void Engine::run_until(std::uint64_t steps) {
  steps = std::min(steps, state_.config.horizon);
  while (state_.steps_done() < steps) step();
}

// --- Checkpoint files ----------------------------------------------------

namespace {

using nlohmann::json;

json config_to_json(const EngineConfig& c) {
  return {{"rho", c.params.rho},
          {"lambda", c.params.lambda},
          {"horizon", c.horizon},
          {"checkpoints", c.checkpoints},
          {"seed", c.seed},
          {"cce_samples_per_step", c.cce_samples_per_step},
          {"workers", c.workers}};
}

EngineConfig config_from_json(const json& j) {
  EngineConfig c;
  c.params.rho = j.at("rho").get<std::uint32_t>();
  c.params.lambda = j.at("lambda").get<double>();
  c.horizon = j.at("horizon").get<std::uint64_t>();
  c.checkpoints = j.at("checkpoints").get<std::vector<std::uint64_t>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.cce_samples_per_step = j.at("cce_samples_per_step").get<std::uint32_t>();
  c.workers = j.at("workers").get<unsigned>();
  return c;
}

}  // namespace

std::string serialize_state(const EngineState& s) {
  json doc;
  doc["magic"] = kCheckpointMagic;
  doc["config"] = config_to_json(s.config);
  doc["epsilon"] = s.epsilon;
  doc["num_agents"] = s.num_agents();
  doc["num_actions"] = s.num_actions();
  json logw = json::array();
  for (const auto& st : s.strategies) {
    logw.push_back(std::vector<double>(st.log_weights().begin(), st.log_weights().end()));
  }
  doc["log_weights"] = std::move(logw);
  doc["profile"] = s.profile.site;
  doc["ledger"] = {{"steps", s.ledger.steps},
                   {"realized_cum", s.ledger.realized_cum},
                   {"action_cum", s.ledger.action_cum}};
  json frames = json::array();
  for (const auto& f : s.accumulator.frames) {
    frames.push_back({{"step", f.step}, {"pop_acc", f.pop_acc}, {"wealth_acc", f.wealth_acc}});
  }
  doc["accumulator"] = {{"pop_acc", s.accumulator.pop_acc},
                        {"wealth_acc", s.accumulator.wealth_acc},
                        {"frames", std::move(frames)}};
  doc["cce"] = {{"samples", s.cce.samples},
                {"realized", s.cce.realized},
                {"deviation", s.cce.deviation},
                {"diff_sq", s.cce.diff_sq}};
  return doc.dump() + "\n";
}

EngineState deserialize_state(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint parse failure: ") + e.what());
  }
  if (!doc.is_object() || doc.value("magic", std::string{}) != kCheckpointMagic) {
    throw std::runtime_error("not an NRD1 checkpoint");
  }
  try {
    EngineState s;
    s.config = config_from_json(doc.at("config"));
    s.epsilon = doc.at("epsilon").get<double>();
    const auto nr = doc.at("num_agents").get<std::size_t>();
    const auto nh = doc.at("num_actions").get<std::size_t>();
    for (const auto& row : doc.at("log_weights")) {
      s.strategies.push_back(MixedStrategy::from_log_weights(row.get<std::vector<double>>()));
    }
    s.profile.site = doc.at("profile").get<std::vector<std::uint32_t>>();
    s.ledger = RegretLedger(nr, nh);
    s.ledger.steps = doc.at("ledger").at("steps").get<std::uint64_t>();
    s.ledger.realized_cum = doc.at("ledger").at("realized_cum").get<std::vector<double>>();
    s.ledger.action_cum = doc.at("ledger").at("action_cum").get<std::vector<double>>();
    const auto& acc = doc.at("accumulator");
    s.accumulator.pop_acc = acc.at("pop_acc").get<std::vector<double>>();
    s.accumulator.wealth_acc = acc.at("wealth_acc").get<std::vector<double>>();
    for (const auto& f : acc.at("frames")) {
      s.accumulator.frames.push_back({f.at("step").get<std::uint64_t>(),
                                      f.at("pop_acc").get<std::vector<double>>(),
                                      f.at("wealth_acc").get<std::vector<double>>()});
    }
    const auto& cce = doc.at("cce");
    s.cce.samples = cce.at("samples").get<std::uint64_t>();
    s.cce.realized = cce.at("realized").get<std::vector<double>>();
    s.cce.deviation = cce.at("deviation").get<std::vector<double>>();
    s.cce.diff_sq = cce.at("diff_sq").get<std::vector<double>>();

    const bool consistent =
        s.strategies.size() == nr && s.profile.site.size() == nr &&
        s.ledger.realized_cum.size() == nr && s.ledger.action_cum.size() == nr * nh &&
        s.accumulator.pop_acc.size() == nh && s.accumulator.wealth_acc.size() == nh &&
        s.cce.realized.size() == nr && s.cce.deviation.size() == nr * nh &&
        s.cce.diff_sq.size() == nr * nh &&
        std::all_of(s.strategies.begin(), s.strategies.end(),
                    [nh](const MixedStrategy& m) { return m.size() == nh; });
    if (!consistent) throw std::runtime_error("checkpoint dimensions are inconsistent");
    s.config.validate();
    return s;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint is malformed: ") + e.what());
  }
}

void save_checkpoint(const EngineState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << serialize_state(state);
}

EngineState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_state(buf.str());
}

}  // namespace nrd

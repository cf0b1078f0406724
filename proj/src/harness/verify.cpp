#include "nrd/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "nrd/engine.hpp"
#include "nrd/harness/grid.hpp"
#include "nrd/harness/snapshot.hpp"
#include "nrd/population.hpp"

namespace nrd::harness {

namespace {

std::string str(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// Floyd-Warshall over the raw arcs, normalized by the largest entry.
std::vector<double> floyd_normalized(const RoadGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> d(n * n, std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < n; ++v) d[v * n + v] = 0.0;
  for (const Arc& a : g.arcs()) d[a.tail * n + a.head] = std::min(d[a.tail * n + a.head], a.length_m);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
  const double diam = *std::max_element(d.begin(), d.end());
  for (double& x : d) x /= diam;
  return d;
}

}  // namespace

std::vector<CheckResult> run_property_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const GridDims dims{5, 5};
  const auto loaded = generate_grid(dims, {{1, 1}, {3, 4}});
  const Geography geo = build_geography(loaded.graph, loaded.sites);
  const std::size_t nh = geo.num_housing();
  const EndowmentProfile w = generate_endowments(nh);

  {
    const auto oracle = floyd_normalized(geo.graph);
    double worst = 0.0;
    const std::size_t n = geo.graph.num_nodes();
    for (std::size_t i = 0; i < n * n; ++i) {
      worst = std::max(worst, std::abs(geo.ell(i / n, i % n) - oracle[i]));
    }
    out.push_back({"distances match Floyd-Warshall", worst <= 1e-12, "max diff " + str(worst)});
  }

  {
    bool ok = true;
    for (std::size_t n = 1; n <= 1000 && ok; ++n) {
      const auto e = generate_endowments(n);
      for (std::size_t j = 1; j < n; ++j) ok = ok && e[j] > e[j - 1];
    }
    out.push_back({"endowments strictly increasing (n <= 1000)", ok, ""});
  }

  {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nh - 1));
    double worst = 0.0;
    bool range_ok = true;
    for (double lambda : {0.0, 0.25, 0.75, 1.0}) {
      for (std::uint32_t rho : {1u, 2u, 4u}) {
        CostModel model(geo, w, {rho, lambda});
        for (int trial = 0; trial < 20; ++trial) {
          Profile p{std::vector<std::uint32_t>(nh)};
          for (auto& s : p.site) s = pick(rng);
          const auto fields = model.build_fields(p);
          for (std::size_t j = 0; j < nh; ++j) {
            const auto fused = model.cost_vector(j, fields);
            for (std::size_t h = 0; h < nh; ++h) {
              const double ref = model.cost(j, h, fields);
              worst = std::max(worst, std::abs(ref - fused[h]));
              range_ok = range_ok && fused[h] >= 0.0 && fused[h] <= 1.0;
              if (fields.occupancy.count(h) == 0) range_ok = range_ok && fused[h] == 1.0;
            }
          }
        }
      }
    }
    out.push_back({"fused cost vector matches reference", worst <= 1e-12, "max diff " + str(worst)});
    out.push_back({"costs in [0,1], abandoned sites cost exactly 1", range_ok, ""});
  }

  {
    EngineConfig cfg;
    cfg.params = {2, 0.5};
    cfg.horizon = 300;
    cfg.checkpoints = {100, 300};
    cfg.seed = seed;
    cfg.cce_samples_per_step = 1;
    Engine a(geo, w, cfg);
    double norm_err = 0.0;
    while (!a.done()) {
      a.step();
      for (const auto& s : a.state().strategies) {
        const auto p = s.probabilities();
        norm_err = std::max(norm_err, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
      }
    }
    out.push_back({"strategies normalized", norm_err < 1e-9, "max error " + str(norm_err)});

    double cons = 0.0;
    for (const auto& f : a.state().accumulator.frames) {
      const auto rows = snapshot(f, geo);
      double total = 0.0;
      for (const auto& r : rows) total += r.exp_pop;
      cons = std::max(cons, std::abs(total - static_cast<double>(nh)) / static_cast<double>(nh));
    }
    out.push_back({"expected population conserved", cons <= 1e-6, "relative error " + str(cons)});

    cfg.workers = 3;
    Engine b(geo, w, cfg);
    b.run();
    EngineState sb = b.state();
    sb.config.workers = a.state().config.workers;
    const bool same = serialize_state(a.state()) == serialize_state(sb);
    out.push_back({"bitwise determinism across worker counts", same, ""});
  }
  return out;
}

}  // namespace nrd::harness

// nrd - command line driver.
//
//   nrd run (--graph PATH | --grid RxC --amenities SPEC) --seed U64 --out DIR ...
//   nrd run --verify
//   nrd generate-grid --grid RxC --amenities SPEC --out graph.json
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nrd/harness/grid.hpp"
#include "nrd/harness/run_matrix.hpp"
#include "nrd/harness/verify.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    T v{};
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw nrd::harness::ConfigError(std::string("bad ") + what + " list entry '" + item + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-regret dynamics of neighborhood change"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the (rho, lambda) experiment matrix");
  std::string graph, grid, amenities = "center", rhos = "1", lambdas = "0.5", checkpoints;
  std::string out_dir;
  std::size_t residents = 0;
  std::uint64_t horizon = 0, seed = 0;
  std::uint32_t cce_samples = 1;
  unsigned workers = 1;
  bool render = false, independent = false, verify = false;
  auto* graph_opt = run->add_option("--graph", graph, "Graph file (JSON)");
  auto* grid_opt = run->add_option("--grid", grid, "Synthetic grid dimensions RxC");
  graph_opt->excludes(grid_opt);
  run->add_option("--amenities", amenities, "Grid amenities: 'center' or 'r,c;r,c'");
  run->add_option("--residents", residents, "Resident count (default |H|)");
  run->add_option("--rho", rhos, "Comma-separated rho values");
  run->add_option("--lambda", lambdas, "Comma-separated lambda values");
  run->add_option("--horizon", horizon, "Time horizon T_max");
  run->add_option("--checkpoints", checkpoints, "Comma-separated checkpoint steps (default T_max)");
  auto* seed_opt = run->add_option("--seed", seed, "Random seed (required)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--cce-samples", cce_samples, "CCE samples per step");
  run->add_option("--workers", workers, "Worker threads per run (0 = all cores)");
  run->add_flag("--render", render, "Write an SVG map per checkpoint");
  run->add_flag("--independent-runs-per-checkpoint", independent,
                "Separate run (and step size) for each checkpoint");
  run->add_flag("--verify", verify, "Run the property self-check on a small instance");

  auto* gen = app.add_subcommand("generate-grid", "Write a synthetic grid graph file");
  std::string gen_grid, gen_amenities = "center", gen_out;
  gen->add_option("--grid", gen_grid, "Grid dimensions RxC")->required();
  gen->add_option("--amenities", gen_amenities, "'center' or 'r,c;r,c'");
  gen->add_option("--out", gen_out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (gen->parsed()) {
      const auto dims = nrd::harness::parse_grid_dims(gen_grid);
      const auto g = nrd::harness::generate_grid(
          dims, nrd::harness::parse_amenity_spec(gen_amenities, dims));
      std::ofstream out(gen_out, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << gen_out << "\n";
        return kRuntimeError;
      }
      out << nrd::dump_graph(g.graph, g.sites);
      std::cout << "wrote " << gen_out << " (" << g.sites.amenities.size() << " amenities, "
                << g.sites.housing.size() << " housing)\n";
      return 0;
    }

    if (verify) {
      bool all = true;
      for (const auto& c : nrd::harness::run_property_checks(seed_opt->count() ? seed : 42)) {
        std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
        std::cout << "\n";
        all = all && c.passed;
      }
      return all ? 0 : kRuntimeError;
    }

    nrd::harness::RunConfig cfg;
    if (!graph.empty()) cfg.graph_path = graph;
    if (!grid.empty()) cfg.grid = nrd::harness::GridSource{nrd::harness::parse_grid_dims(grid), amenities};
    if (residents > 0) cfg.residents = residents;
    cfg.rhos = parse_list<std::uint32_t>(rhos, "rho");
    cfg.lambdas = parse_list<double>(lambdas, "lambda");
    cfg.horizon = horizon;
    if (!checkpoints.empty()) cfg.checkpoints = parse_list<std::uint64_t>(checkpoints, "checkpoint");
    if (seed_opt->count()) cfg.seed = seed;
    cfg.out_dir = out_dir;
    cfg.cce_samples = cce_samples;
    cfg.render = render;
    cfg.independent_runs = independent;
    cfg.workers = workers;
    cfg.validate();
    nrd::harness::run_matrix(cfg, &std::cout);
    return 0;
  } catch (const nrd::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

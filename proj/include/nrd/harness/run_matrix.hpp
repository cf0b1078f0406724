// run_matrix.hpp - experiment orchestration over the (rho, lambda) grid.
//
// Layout: out/rho{rho}_lam{lambda}/manifest.json and
//         out/rho{rho}_lam{lambda}/T{t}/{snapshot.csv, snapshot.geojson, map.svg}
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nrd/engine.hpp"
#include "nrd/harness/grid.hpp"
#include "nrd/spatial_graph.hpp"

namespace nrd::harness {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridSource {
  GridDims dims;
  std::string amenities;  // "center" or "r,c;r,c"
};

struct RunConfig {
  std::optional<std::filesystem::path> graph_path;
  std::optional<GridSource> grid;
  std::optional<std::size_t> residents;  // defaults to |H|
  std::vector<std::uint32_t> rhos;
  std::vector<double> lambdas;
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> checkpoints;  // defaults to {horizon}
  std::optional<std::uint64_t> seed;       // required
  std::filesystem::path out_dir;
  std::uint32_t cce_samples = 1;
  bool render = false;
  bool independent_runs = false;  // one run per checkpoint, each with its own horizon
  unsigned workers = 1;

  // Throws ConfigError.
  void validate() const;
};

// Loads or synthesizes the instance named by the config.
LoadedGraph load_instance(const RunConfig& config);

struct CheckpointSummary {
  std::uint64_t step = 0;
  double max_regret = 0.0;
  std::optional<CceGap> cce;
  std::filesystem::path dir;
};

struct RunResult {
  std::uint32_t rho = 0;
  double lambda = 0.0;
  std::filesystem::path dir;
  std::vector<CheckpointSummary> checkpoints;
  std::vector<double> agent_regret;  // at the final checkpoint
  double wall_seconds = 0.0;
};

// Shortest round-trip decimal, e.g. 0.25 -> "0.25".
std::string format_number(double v);
std::string run_dir_name(std::uint32_t rho, double lambda);

// Runs every (rho, lambda) cell with the shared seed and writes all outputs.
// `log` receives one progress line per cell; pass nullptr to stay quiet.
std::vector<RunResult> run_matrix(const RunConfig& config, std::ostream* log = nullptr);

// Keys every manifest must carry.
inline constexpr const char* kManifestKeys[] = {"config", "endowments", "agent_regret", "cce_gap"};
bool manifest_complete(const std::filesystem::path& manifest_path);

}  // namespace nrd::harness

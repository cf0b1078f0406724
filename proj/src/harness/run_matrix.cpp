#include "nrd/harness/run_matrix.hpp"

#include <chrono>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "nrd/harness/render.hpp"
#include "nrd/harness/snapshot.hpp"
#include "nrd/population.hpp"

namespace nrd::harness {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  if (graph_path.has_value() == grid.has_value()) {
    throw ConfigError("exactly one of a graph path or grid dimensions is required");
  }
  if (rhos.empty()) throw ConfigError("rho list is empty");
  if (lambdas.empty()) throw ConfigError("lambda list is empty");
  for (auto r : rhos) {
    if (r < 1) throw ConfigError("rho values must be at least 1");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda values must lie in [0, 1]");
  }
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (!seed) throw ConfigError("a seed is required");
  if (residents && *residents == 0) throw ConfigError("resident count must be positive");
  if (out_dir.empty()) throw ConfigError("output directory is required");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] == 0 || checkpoints[i] > horizon ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw ConfigError("checkpoints must be strictly increasing and within the horizon");
    }
  }
}

LoadedGraph load_instance(const RunConfig& config) {
  if (config.graph_path) return load_graph(*config.graph_path);
  const auto cells = parse_amenity_spec(config.grid->amenities, config.grid->dims);
  return generate_grid(config.grid->dims, cells);
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string run_dir_name(std::uint32_t rho, double lambda) {
  return "rho" + std::to_string(rho) + "_lam" + format_number(lambda);
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ordered_json cce_json(const std::optional<CceGap>& gap) {
  if (!gap) return {{"samples", 0}, {"gap", nullptr}, {"std_error", nullptr}};
  return {{"samples", gap->samples},
          {"gap", gap->gap},
          {"std_error", gap->std_error},
          {"agent", gap->agent},
          {"action", gap->action}};
}

ordered_json config_json(const RunConfig& c, std::uint32_t rho, double lambda,
                         const Geography& geo, std::size_t residents, double epsilon) {
  ordered_json j;
  if (c.graph_path) {
    j["graph"] = c.graph_path->string();
  } else {
    j["grid"] = std::to_string(c.grid->dims.rows) + "x" + std::to_string(c.grid->dims.cols);
    j["amenities"] = c.grid->amenities;
  }
  j["residents"] = residents;
  j["rho"] = rho;
  j["lambda"] = lambda;
  j["horizon"] = c.horizon;
  j["checkpoints"] = c.checkpoints.empty() ? std::vector<std::uint64_t>{c.horizon} : c.checkpoints;
  j["seed"] = *c.seed;
  j["cce_samples_per_step"] = c.cce_samples;
  j["independent_runs_per_checkpoint"] = c.independent_runs;
  j["epsilon"] = epsilon;
  j["num_amenities"] = geo.sites.amenities.size();
  j["num_housing"] = geo.num_housing();
  j["diameter_m"] = geo.ell.diameter_m();
  return j;
}

CheckpointSummary write_checkpoint(const fs::path& run_dir, const CheckpointFrame& frame,
                                   const Engine& engine, const Geography& geo, bool render) {
  CheckpointSummary cp;
  cp.step = frame.step;
  cp.max_regret = max_empirical_regret(engine.state().ledger);
  if (engine.state().cce.samples > 0) cp.cce = estimate_cce_gap(engine.state());
  cp.dir = run_dir / ("T" + std::to_string(frame.step));
  fs::create_directories(cp.dir);
  const auto rows = snapshot(frame, geo);
  write_file(cp.dir / "snapshot.csv", to_csv(rows));
  write_file(cp.dir / "snapshot.geojson", to_geojson(rows));
  if (render) write_file(cp.dir / "map.svg", render_svg(rows, geo.graph));
  return cp;
}

}  // namespace

std::vector<RunResult> run_matrix(const RunConfig& config, std::ostream* log) {
  config.validate();
  const auto instance = load_instance(config);
  const Geography geo = build_geography(instance.graph, instance.sites);
  const std::size_t residents = config.residents.value_or(geo.num_housing());
  const EndowmentProfile w = generate_endowments(residents);
  const std::vector<std::uint64_t> checkpoints =
      config.checkpoints.empty() ? std::vector<std::uint64_t>{config.horizon} : config.checkpoints;

  fs::create_directories(config.out_dir);
  write_file(config.out_dir / "graph.json", dump_graph(geo.graph, geo.sites));

  std::vector<RunResult> results;
  for (std::uint32_t rho : config.rhos) {
    for (double lambda : config.lambdas) {
      const auto started = std::chrono::steady_clock::now();
      RunResult result;
      result.rho = rho;
      result.lambda = lambda;
      result.dir = config.out_dir / run_dir_name(rho, lambda);
      fs::create_directories(result.dir);

      EngineConfig ec;
      ec.params = {rho, lambda};
      ec.seed = *config.seed;
      ec.cce_samples_per_step = config.cce_samples;
      ec.workers = config.workers;

      double epsilon = 0.0;
      if (config.independent_runs) {
        for (std::uint64_t t : checkpoints) {
          ec.horizon = t;
          ec.checkpoints = {t};
          Engine engine(geo, w, ec);
          engine.run();
          epsilon = engine.state().epsilon;
          result.checkpoints.push_back(write_checkpoint(
              result.dir, engine.state().accumulator.frames.back(), engine, geo, config.render));
          result.agent_regret.clear();
          for (std::size_t j = 0; j < residents; ++j) {
            result.agent_regret.push_back(empirical_regret(engine.state().ledger, j));
          }
        }
      } else {
        ec.horizon = config.horizon;
        ec.checkpoints = checkpoints;
        Engine engine(geo, w, ec);
        epsilon = engine.state().epsilon;
        for (std::uint64_t t : checkpoints) {
          engine.run_until(t);
          result.checkpoints.push_back(write_checkpoint(
              result.dir, engine.state().accumulator.frames.back(), engine, geo, config.render));
        }
        engine.run();
        for (std::size_t j = 0; j < residents; ++j) {
          result.agent_regret.push_back(empirical_regret(engine.state().ledger, j));
        }
      }
      result.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

      ordered_json manifest;
      manifest["config"] = config_json(config, rho, lambda, geo, residents, epsilon);
      manifest["endowments"] = std::vector<double>(w.values().begin(), w.values().end());
      manifest["agent_regret"] = result.agent_regret;
      manifest["max_regret"] = result.checkpoints.back().max_regret;
      manifest["cce_gap"] = cce_json(result.checkpoints.back().cce);
      ordered_json cps = ordered_json::array();
      for (const auto& cp : result.checkpoints) {
        cps.push_back({{"step", cp.step},
                       {"dir", cp.dir.filename().string()},
                       {"max_regret", cp.max_regret},
                       {"cce_gap", cce_json(cp.cce)}});
      }
      manifest["checkpoints"] = std::move(cps);
      manifest["wall_seconds"] = result.wall_seconds;
      const auto manifest_path = result.dir / "manifest.json";
      write_file(manifest_path, manifest.dump(1) + "\n");
      if (!manifest_complete(manifest_path)) {
        throw std::runtime_error("manifest incomplete for " + result.dir.string());
      }

      if (log) {
        *log << result.dir.filename().string() << ": T=" << result.checkpoints.back().step
             << " max_regret=" << result.checkpoints.back().max_regret;
        if (result.checkpoints.back().cce) {
          *log << " cce_gap=" << result.checkpoints.back().cce->gap;
        }
        *log << " (" << result.wall_seconds << " s)\n";
      }
      results.push_back(std::move(result));
    }
  }
  return results;
}

bool manifest_complete(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) return false;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  for (const char* key : kManifestKeys) {
    if (!doc.contains(key)) return false;
  }
  return true;
}

}  // namespace nrd::harness

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "nrd/harness/grid.hpp"
#include "nrd/harness/metrics.hpp"
#include "nrd/harness/render.hpp"
#include "nrd/harness/run_matrix.hpp"
#include "nrd/harness/snapshot.hpp"
#include "test_support.hpp"

using namespace nrd;
using namespace nrd::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nrd_harness_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

SiteSnapshot housing_row(std::string id, double lon, double pop, double mean, bool populated = true) {
  SiteSnapshot s;
  s.site_id = std::move(id);
  s.lon = lon;
  s.lat = 0.0;
  s.exp_pop = pop;
  s.exp_mean_endow = mean;
  s.exp_total_endow = pop * mean;
  s.populated = populated;
  return s;
}

}  // namespace

TEST_CASE("generate_grid") {
  SUBCASE("2x2 with one amenity") {
    const auto g = generate_grid({2, 2}, {{0, 0}});
    CHECK(g.graph.num_nodes() == 4);
    CHECK(g.graph.arcs().size() == 8);
    CHECK(g.sites.amenities.size() == 1);
    CHECK(g.sites.housing.size() == 3);
  }
  SUBCASE("center of an even grid rounds half up") {
    const GridDims dims{6, 6};
    const auto cells = parse_amenity_spec("center", dims);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0] == GridCell{3, 3});
    const auto parsed = parse_graph(dump_graph(generate_grid(dims, cells).graph,
                                               generate_grid(dims, cells).sites));
    REQUIRE(parsed.sites.amenities.size() == 1);
    CHECK(parsed.graph.nodes()[parsed.sites.amenities[0]].id == grid_node_id(dims, {3, 3}));
    CHECK(parse_amenity_spec("center", {3, 3})[0] == GridCell{1, 1});
  }
  SUBCASE("all cells amenities") {
    std::vector<GridCell> all;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) all.push_back({r, c});
    CHECK_THROWS_AS(generate_grid({3, 3}, all), std::invalid_argument);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(generate_grid({3, 3}, {{3, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(generate_grid({1, 3}, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid_dims("12by12"), std::invalid_argument);
    CHECK_THROWS_AS(parse_amenity_spec("1;2", {3, 3}), std::invalid_argument);
  }
  SUBCASE("dimension and amenity list parsing, id ordering") {
    CHECK(parse_grid_dims("12x7").rows == 12);
    CHECK(parse_grid_dims("12x7").cols == 7);
    const auto cells = parse_amenity_spec("3,3;8,8", {12, 12});
    REQUIRE(cells.size() == 2);
    CHECK(cells[1] == GridCell{8, 8});
    CHECK(grid_node_id({12, 12}, {2, 11}) < grid_node_id({12, 12}, {10, 0}));
  }
}

TEST_CASE("snapshot semantics") {
  const auto g = generate_grid({3, 3}, {{1, 1}});
  const auto geo = build_geography(g.graph, g.sites);
  const auto w = generate_endowments(6);

  SUBCASE("uniform strategies after one step") {
    EngineConfig cfg;
    cfg.horizon = 1;
    cfg.checkpoints = {1};
    cfg.seed = 1;
    Engine engine(geo, w, cfg);
    engine.step();
    const auto rows = snapshot(engine.state().accumulator.frames[0], geo);
    REQUIRE(rows.size() == 9);
    CHECK(std::is_sorted(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.site_id < b.site_id; }));
    double total = 0.0;
    for (const auto& r : rows) {
      total += r.exp_pop;
      if (r.kind == SiteKind::housing) {
        CHECK(r.exp_pop == doctest::Approx(6.0 / 8.0).epsilon(1e-14));
        CHECK(r.exp_mean_endow == doctest::Approx(w.sum() / 6.0).epsilon(1e-12));
      } else {
        CHECK(r.amenity_score == 1.0);
        CHECK_FALSE(r.populated);
      }
    }
    CHECK(total == doctest::Approx(6.0).epsilon(1e-12));
  }
  SUBCASE("unpopulated guard") {
    CheckpointFrame frame{10, std::vector<double>(8, 7.5), std::vector<double>(8, 1.0)};
    frame.pop_acc[2] = 1e-12;
    frame.wealth_acc[2] = 1e-13;
    const auto rows = snapshot(frame, geo);
    std::size_t unpopulated = 0;
    for (const auto& r : rows) {
      if (r.kind != SiteKind::housing) continue;
      if (!r.populated) {
        ++unpopulated;
        CHECK(r.exp_mean_endow == 0.0);
      } else {
        CHECK(r.exp_mean_endow == doctest::Approx(1.0 / 7.5));
      }
    }
    CHECK(unpopulated == 1);
  }
}

TEST_CASE("snapshot after two steps matches a hand-rolled reference") {
  RoadGraph g({{"h0", 0, 0}, {"h1", 1, 0}, {"h2", 2, 0}, {"f", 3, 0}},
              {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
  const auto geo = build_geography(g, SitePartition::from_kinds(std::vector<SiteKind>{
                                          SiteKind::housing, SiteKind::housing, SiteKind::housing,
                                          SiteKind::amenity}));
  const auto w = generate_endowments(3);
  EngineConfig cfg;
  cfg.params = {1, 0.6};
  cfg.horizon = 2;
  cfg.checkpoints = {1, 2};
  cfg.seed = 314;
  cfg.cce_samples_per_step = 0;
  Engine engine(geo, w, cfg);
  engine.run();
  const auto ref = testing::reference_run(geo, w, 1, 0.6, engine.state().epsilon, 314, 2, 0);
  const auto rows = snapshot(engine.state().accumulator.frames.at(1), geo);
  for (const auto& r : rows) {
    if (r.kind != SiteKind::housing) continue;
    const std::size_t h = static_cast<std::size_t>(r.site_id[1] - '0');
    CHECK(r.exp_pop == doctest::Approx(ref.pop_acc[h] / 2.0).epsilon(1e-12));
    CHECK(r.exp_total_endow == doctest::Approx(ref.wealth_acc[h] / 2.0).epsilon(1e-12));
    CHECK(r.exp_mean_endow == doctest::Approx(ref.wealth_acc[h] / ref.pop_acc[h]).epsilon(1e-12));
  }
}

TEST_CASE("snapshot CSV round-trips exactly") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SiteSnapshot> rows;
    const int n = 1 + trial % 30;
    for (int i = 0; i < n; ++i) {
      SiteSnapshot s;
      s.site_id = testing::node_name(static_cast<std::size_t>(i));
      s.lon = -74.0 + u(rng);
      s.lat = 40.0 + u(rng);
      s.kind = rng() % 5 == 0 ? SiteKind::amenity : SiteKind::housing;
      s.amenity_score = u(rng);
      s.exp_pop = rng() % 7 == 0 ? 0.0 : 10 * u(rng);
      s.exp_total_endow = u(rng) * 1e-3;
      s.exp_mean_endow = u(rng);
      s.populated = s.exp_pop > 0.0;
      rows.push_back(s);
    }
    CHECK(parse_csv(to_csv(rows)) == rows);
  }
  CHECK_THROWS_AS(parse_csv("bad header\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_csv(""), std::runtime_error);
}

TEST_CASE("GeoJSON carries the CSV properties") {
  std::vector<SiteSnapshot> rows{housing_row("a", 1.0, 2.0, 0.3), housing_row("b", 2.0, 0.0, 0.0, false)};
  const auto doc = nlohmann::json::parse(to_geojson(rows));
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == 2);
  const auto& f = doc["features"][0];
  CHECK(f["geometry"]["type"] == "Point");
  CHECK(f["geometry"]["coordinates"][0] == 1.0);
  for (const char* key : {"site_id", "lon", "lat", "kind", "amenity_score", "exp_pop",
                          "exp_total_endow", "exp_mean_endow", "populated_flag"}) {
    CHECK(f["properties"].contains(key));
  }
  CHECK(doc["features"][1]["properties"]["populated_flag"] == 0);
}

TEST_CASE("render_svg") {
  RoadGraph g({{"a", 0, 0}, {"b", 1, 0}, {"c", 2, 0}, {"f", 3, 0}},
              {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}});
  SiteSnapshot amenity;
  amenity.site_id = "f";
  amenity.lon = 3.0;
  amenity.kind = SiteKind::amenity;

  SUBCASE("ramp stops") {
    CHECK(hex_color(endowment_ramp(0.0)) == "#ffff00");
    CHECK(hex_color(endowment_ramp(0.5)) == "#ffa500");
    CHECK(hex_color(endowment_ramp(1.0)) == "#ff0000");
  }
  SUBCASE("equal population and endowment: equal radii, mid-ramp color") {
    std::vector<SiteSnapshot> rows{housing_row("a", 0, 2.0, 0.4), housing_row("b", 1, 2.0, 0.4),
                                   housing_row("c", 2, 2.0, 0.4), amenity};
    const auto svg = render_svg(rows, g);
    CHECK(count_occurrences(svg, "fill=\"#ffa500\"") == 3);
    CHECK(count_occurrences(svg, "r=\"9.00\" fill=\"#ffa500\"") == 3);
    CHECK(count_occurrences(svg, std::string("fill=\"") + kAmenityFill + "\"") == 1);
  }
  SUBCASE("zero-population site gets min radius and gray") {
    std::vector<SiteSnapshot> rows{housing_row("a", 0, 2.0, 0.1), housing_row("b", 1, 0.0, 0.0, false),
                                   housing_row("c", 2, 1.0, 0.5), amenity};
    const auto svg = render_svg(rows, g);
    CHECK(count_occurrences(svg, std::string("r=\"1.50\" fill=\"") + kUnpopulatedFill + "\"") == 1);
    CHECK(count_occurrences(svg, "fill=\"#ffff00\"") == 1);
    CHECK(count_occurrences(svg, "fill=\"#ff0000\"") == 1);
    CHECK(render_svg(rows, g) == svg);
  }
}

TEST_CASE("metrics") {
  SUBCASE("spearman") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    CHECK(spearman(x, std::vector<double>{2, 4, 6, 8, 100}) == doctest::Approx(1.0));
    CHECK(spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
    // Ties: ranks of y are (1.5, 1.5, 3, 4, 5); Pearson of ranks by hand.
    const double r = spearman(x, std::vector<double>{1, 1, 2, 3, 4});
    CHECK(r == doctest::Approx(9.5 / std::sqrt(10.0 * 9.5)));
    CHECK(std::isnan(spearman(x, std::vector<double>{1, 1, 1, 1, 1})));
  }
  SUBCASE("weighted statistics") {
    const std::vector<double> v{1.0, 3.0}, wts{1.0, 3.0};
    CHECK(weighted_mean(v, wts) == 2.5);
    CHECK(weighted_variance(v, wts) == doctest::Approx(0.75));
  }
  SUBCASE("decile contrast and core share") {
    std::vector<SiteSnapshot> rows;
    for (int i = 0; i < 10; ++i) {
      auto r = housing_row("s" + std::to_string(i), i, 1.0, 0.1 + 0.05 * i);
      r.amenity_score = 0.05 * i;
      rows.push_back(r);
    }
    const auto d = endowment_decile_amenity(rows);
    CHECK(d.bottom_amenity == doctest::Approx(0.0));
    CHECK(d.top_amenity == doctest::Approx(0.45));
    CHECK(amenity_endowment_spearman(rows) == doctest::Approx(1.0));
    CHECK(core_population_share(rows) == doctest::Approx(0.1));
    CHECK(population_weighted_amenity(rows) == doctest::Approx(0.225));
  }
}

TEST_CASE("run_matrix writes one directory per cell") {
  RunConfig cfg;
  cfg.grid = GridSource{{4, 4}, "center"};
  cfg.rhos = {1};
  cfg.lambdas = {0.25};
  cfg.horizon = 50;
  cfg.seed = 42;
  cfg.render = true;
  cfg.out_dir = scratch_dir("single");
  const auto results = run_matrix(cfg);
  REQUIRE(results.size() == 1);
  std::size_t dirs = 0;
  for (const auto& e : fs::directory_iterator(cfg.out_dir)) dirs += e.is_directory();
  CHECK(dirs == 1);
  const auto run_dir = cfg.out_dir / "rho1_lam0.25";
  CHECK(fs::exists(run_dir / "manifest.json"));
  CHECK(manifest_complete(run_dir / "manifest.json"));
  CHECK(fs::exists(run_dir / "T50" / "snapshot.csv"));
  CHECK(fs::exists(run_dir / "T50" / "snapshot.geojson"));
  CHECK(fs::exists(run_dir / "T50" / "map.svg"));
  const auto svg = slurp(run_dir / "T50" / "map.svg");
  CHECK(count_occurrences(svg, std::string("fill=\"") + kAmenityFill + "\"") == 1);
  const auto manifest = nlohmann::json::parse(slurp(run_dir / "manifest.json"));
  CHECK(manifest["endowments"].size() == 15);
  CHECK(manifest["agent_regret"].size() == 15);
  CHECK(manifest["config"]["seed"] == 42);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("run_matrix is reproducible and handles both checkpoint modes") {
  RunConfig cfg;
  cfg.grid = GridSource{{4, 5}, "1,1;2,3"};
  cfg.rhos = {1, 2};
  cfg.lambdas = {0.25, 0.75};
  cfg.horizon = 60;
  cfg.checkpoints = {20, 40, 60};
  cfg.seed = 7;
  cfg.out_dir = scratch_dir("a");
  run_matrix(cfg);
  auto again = cfg;
  again.out_dir = scratch_dir("b");
  again.workers = 3;
  run_matrix(again);
  for (std::uint32_t rho : {1u, 2u}) {
    for (double lambda : {0.25, 0.75}) {
      for (int t : {20, 40, 60}) {
        const auto rel = fs::path(run_dir_name(rho, lambda)) / ("T" + std::to_string(t)) / "snapshot.csv";
        const auto csv = slurp(cfg.out_dir / rel);
        CHECK(!csv.empty());
        CHECK(csv == slurp(again.out_dir / rel));
        const auto rows = parse_csv(csv);
        double total = 0.0;
        for (const auto& r : rows) total += r.exp_pop;
        CHECK(total == doctest::Approx(18.0).epsilon(1e-9));
      }
    }
  }

  auto independent = cfg;
  independent.independent_runs = true;
  independent.out_dir = scratch_dir("c");
  const auto res = run_matrix(independent);
  REQUIRE(res.size() == 4);
  CHECK(res[0].checkpoints.size() == 3);
  // The final checkpoint of an independent run uses the same horizon as the
  // prefix run, so the two must agree bitwise there.
  const auto rel = fs::path(run_dir_name(2, 0.75)) / "T60" / "snapshot.csv";
  CHECK(slurp(independent.out_dir / rel) == slurp(cfg.out_dir / rel));
  const auto rel20 = fs::path(run_dir_name(2, 0.75)) / "T20" / "snapshot.csv";
  CHECK(slurp(independent.out_dir / rel20) != slurp(cfg.out_dir / rel20));
  for (const auto& d : {cfg.out_dir, again.out_dir, independent.out_dir}) fs::remove_all(d);
}

TEST_CASE("RunConfig validation") {
  RunConfig cfg;
  cfg.rhos = {1};
  cfg.lambdas = {0.5};
  cfg.horizon = 10;
  cfg.seed = 1;
  cfg.out_dir = "x";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // neither graph nor grid
  cfg.grid = GridSource{{3, 3}, "center"};
  CHECK_NOTHROW(cfg.validate());
  cfg.graph_path = "g.json";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // both
  cfg.graph_path.reset();
  cfg.seed.reset();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.seed = 1;
  cfg.lambdas = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.lambdas = {1.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.lambdas = {0.5};
  cfg.checkpoints = {5, 20};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_matrix loads a graph file") {
  const auto dir = scratch_dir("graphfile");
  fs::create_directories(dir);
  const auto g = generate_grid({3, 4}, {{0, 0}, {2, 3}});
  {
    std::ofstream out(dir / "graph.json");
    out << dump_graph(g.graph, g.sites);
  }
  RunConfig cfg;
  cfg.graph_path = dir / "graph.json";
  cfg.residents = 5;
  cfg.rhos = {8};
  cfg.lambdas = {1.0};
  cfg.horizon = 10;
  cfg.seed = 3;
  cfg.out_dir = dir / "out";
  const auto res = run_matrix(cfg);
  REQUIRE(res.size() == 1);
  CHECK(res[0].agent_regret.size() == 5);
  fs::remove_all(dir);
}

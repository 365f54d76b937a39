#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "nlstefan/io.hpp"
#include "nlstefan/scenario.hpp"
#include "oracles.hpp"

using namespace nlstefan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nlstefan_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("doubles print with full round-trip precision") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int i = 0; i < 200; ++i) {
    double x = d(rng);
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(std::stod(io::format_double(0.1)) == 0.1);
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(std::stod(io::format_double(1e300)) == 1e300);
}

TEST_CASE("hash is the reference 64-bit FNV-1a") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(io::hash_hex("").size() == 16);
  CHECK(io::hash_hex("a") != io::hash_hex("b"));
  // Same input, same digest, every time.
  CHECK(io::hash_hex("stefan") == io::hash_hex("stefan"));
}

TEST_CASE("atomic write replaces content and leaves no temp file") {
  TempDir tmp;
  fs::path target = tmp.path / "out.txt";
  io::atomic_write(target, "first");
  CHECK(slurp(target) == "first");
  io::atomic_write(target, "second");
  CHECK(slurp(target) == "second");
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
}

TEST_CASE("field json round-trips bitwise") {
  std::mt19937 rng(11);
  Grid g = Grid::make_2d(7, 5, 0.13, -0.3, 0.2);
  Field f = oracles::random_compact(g, rng, 10.0, 3.0);
  io::ordered_json j = io::field_json(f);
  Field back = io::field_from_json(j);
  CHECK(back.grid == f.grid);
  for (index_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);

  io::ordered_json bad = j;
  bad.erase("values");
  CHECK_THROWS_AS(io::field_from_json(bad), std::invalid_argument);
  io::ordered_json short_values = j;
  short_values["values"].erase(0);
  CHECK_THROWS_AS(io::field_from_json(short_values), std::invalid_argument);
}

TEST_CASE("csv artifacts carry headers and one line per record") {
  Grid g = Grid::make_1d(5, 0.5, -1.0);
  Field f(g, {0.0, 1.0, 2.0, 1.0, 0.0});
  std::string csv = io::field_csv(f);
  CHECK(csv.rfind("index,coord,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  SimConfig c;
  c.kernel = KernelSpec{KernelProfile::tent, 1.0};
  c.dt = 0.5;
  c.t_end = 1.0;
  Grid wg = Grid::make_1d(101, 0.1, -5.0);
  Trajectory traj = integrate(oracles::block_1d(wg, -1.0, 1.0, 0.5), c);
  std::string diag = io::diagnostics_csv(traj);
  CHECK(diag.rfind("t,mass,linf,l1_gamma,supp_plus_count,supp_minus_count\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(diag.begin(), diag.end(), '\n')) == 1 + traj.rows.size());
}

TEST_CASE("infinite distances serialize as strings") {
  InteractionReport rep;
  io::ordered_json j = io::interaction_json(rep);
  CHECK(j["projected_support_distance"] == "infinity");
  CHECK(j["level"] == "strong");
}

TEST_CASE("scenario parsing fills defaults and rejects unknown keys") {
  io::ordered_json j = {
      {"name", "demo"},
      {"grid", {{"n", 101}, {"h", 0.1}, {"origin", -5.0}}},
  };
  Scenario sc = parse_scenario(j, ".");
  CHECK(sc.name == "demo");
  CHECK(sc.grid.node_count() == 101);
  CHECK(sc.config.dt == 0.1);
  CHECK(sc.config.kernel.radius == 1.0);

  io::ordered_json bad = j;
  bad["grdi"] = 1;
  CHECK_THROWS_WITH(parse_scenario(bad, "."), Catch::Matchers::ContainsSubstring("unknown key"));

  io::ordered_json nogrid = {{"name", "x"}};
  CHECK_THROWS_AS(parse_scenario(nogrid, "."), std::invalid_argument);
}

TEST_CASE("scenario builds its initial data from segments and bumps") {
  io::ordered_json j = {
      {"name", "blocks"},
      {"grid", {{"n", 201}, {"h", 0.05}, {"origin", -5.0}}},
      {"kernel", {{"profile", "poly-bump"}, {"radius", 0.5}}},
      {"solver",
       {{"dt", 0.2},
        {"t_end", 4.0},
        {"snapshot_stride", 2},
        {"stop", {{"kind", "gamma_l1"}, {"tol", 1e-7}}}}},
      {"initial",
       {{"segments", io::ordered_json::array({{{"from", -1.0}, {"to", 1.0}, {"value", 2.0}}})},
        {"bumps",
         io::ordered_json::array({{{"center", 3.0}, {"height", 0.5}, {"width", 0.7}}})}}},
      {"outputs", io::ordered_json::array({"snapshots", "kernel"})},
  };
  Scenario sc = parse_scenario(j, ".");
  CHECK(sc.config.kernel.profile == KernelProfile::poly_bump);
  CHECK(sc.config.dt == 0.2);
  CHECK(sc.config.stop.kind == StoppingRule::Kind::gamma_l1_below);
  CHECK(sc.wants("snapshots"));
  CHECK_FALSE(sc.wants("potential"));

  Field f = sc.initial();
  CHECK(sc.grid.node_count() == 201);
  // Node at x = 0 sits in the segment; the bump adds exp(-9/0.49) ~ 1e-8.
  CHECK(f[100] == Catch::Approx(2.0).epsilon(1e-6));
  // Node at x = 3 carries the bump peak.
  CHECK(f[160] == Catch::Approx(0.5).epsilon(1e-9));
  // Node at x = -3 is far from both.
  CHECK(f[40] == Catch::Approx(0.0).epsilon(0).margin(1e-12));
}

TEST_CASE("2d scenario segments use the box form") {
  io::ordered_json j = {
      {"name", "box2d"},
      {"grid",
       {{"dim", 2}, {"nx", 21}, {"ny", 21}, {"h", 0.1}, {"origin_x", -1.0}, {"origin_y", -1.0}}},
      {"initial",
       {{"segments",
         io::ordered_json::array(
             {{{"x0", -0.5}, {"x1", 0.5}, {"y0", -0.5}, {"y1", 0.5}, {"value", 1.5}}})}}},
  };
  Scenario sc = parse_scenario(j, ".");
  Field f = sc.initial();
  Grid g = sc.grid;
  CHECK(g.node_count() == 441);
  CHECK(f[g.flat(10, 10)] == 1.5);
  CHECK(f[g.flat(0, 0)] == 0.0);
}

TEST_CASE("scenario can pull its initial data from a field file") {
  TempDir tmp;
  Grid g = Grid::make_1d(11, 0.5, -2.5);
  Field f(g);
  f[5] = 3.25;
  io::atomic_write(tmp.path / "seed.json", io::field_json(f).dump(2));

  io::ordered_json j = {
      {"name", "fromfile"},
      {"grid", {{"n", 11}, {"h", 0.5}, {"origin", -2.5}}},
      {"initial", {{"file", "seed.json"}}},
  };
  Scenario sc = parse_scenario(j, tmp.path);
  Field built = sc.initial();
  CHECK(built[5] == 3.25);
  CHECK(built[0] == 0.0);

  io::ordered_json wrong = j;
  wrong["grid"]["n"] = 13;
  Scenario bad = parse_scenario(wrong, tmp.path);
  CHECK_THROWS_WITH(bad.initial(), Catch::Matchers::ContainsSubstring("does not match"));
}

TEST_CASE("config hash is stable and sensitive") {
  io::ordered_json j = {
      {"name", "hashme"},
      {"grid", {{"n", 101}, {"h", 0.1}, {"origin", -5.0}}},
      {"solver", {{"dt", 0.25}}},
  };
  Scenario a = parse_scenario(j, ".");
  Scenario b = parse_scenario(j, ".");
  CHECK(a.config_hash() == b.config_hash());

  j["solver"]["dt"] = 0.125;
  Scenario c = parse_scenario(j, ".");
  CHECK(a.config_hash() != c.config_hash());
}

TEST_CASE("loading reports unreadable or malformed files") {
  TempDir tmp;
  CHECK_THROWS_AS(load_scenario(tmp.path / "missing.json"), std::invalid_argument);
  io::atomic_write(tmp.path / "broken.json", "{ not json");
  CHECK_THROWS_AS(load_scenario(tmp.path / "broken.json"), std::invalid_argument);
}

TEST_CASE("phase-loss and bop blocks parse") {
  io::ordered_json j = {
      {"name", "opts"},
      {"grid", {{"n", 101}, {"h", 0.1}, {"origin", -5.0}}},
      {"phaseloss",
       {{"user_R", 2.5}, {"verify", true}, {"verify_t_end", 7.0}, {"estimate", {{"dt", 0.05}}}}},
      {"bop", {{"max_sweeps", 500}, {"tol", 1e-10}}},
  };
  Scenario sc = parse_scenario(j, ".");
  CHECK(sc.phase.user_R == 2.5);
  CHECK(sc.phase.verify);
  CHECK(sc.phase.verify_t_end == 7.0);
  REQUIRE(sc.phase.estimate.has_value());
  CHECK(sc.phase.estimate->dt == 0.05);
  CHECK(sc.bop.max_sweeps == 500);
  CHECK(sc.bop.tol == 1e-10);
}

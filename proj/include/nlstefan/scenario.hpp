#ifndef NLSTEFAN_SCENARIO_HPP
#define NLSTEFAN_SCENARIO_HPP

// Scenario files: a JSON description of grid, kernel, graph, solver settings
// and initial data, resolvable to a concrete Field plus SimConfig. Parsing is
// strict: unknown keys and malformed values raise std::invalid_argument so a
// typo fails loudly instead of silently running defaults. The parsed state is
// re-serialized into a canonical effective-config document, so the hash of a
// run does not depend on input formatting or key order.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlstefan/evolution.hpp"
#include "nlstefan/grid.hpp"
#include "nlstefan/io.hpp"
#include "nlstefan/phaseloss.hpp"

namespace nlstefan {

using ordered_json = nlohmann::ordered_json;

struct ScenarioSegment {
  // 1D uses [from, to]; 2D uses [x0, x1] x [y0, y1].
  double from = 0.0, to = 0.0;
  double y0 = 0.0, y1 = 0.0;
  double value = 0.0;
};

struct ScenarioBump {
  double cx = 0.0, cy = 0.0;
  double height = 0.0;
  double width = 1.0;
};

struct BopOptions {
  long max_sweeps = 200000;
  double tol = 1e-12;
};

struct Scenario {
  std::string name;
  Grid grid;
  SimConfig config;
  std::vector<ScenarioSegment> segments;
  std::vector<ScenarioBump> bumps;
  std::optional<Field> file_field;
  std::vector<std::string> outputs;
  PhaseLossOptions phase;
  BopOptions bop;

  bool wants(const std::string& artifact) const {
    for (const auto& o : outputs)
      if (o == artifact) return true;
    return false;
  }

  // Piecewise-constant segments plus smooth bumps plus an optional field file.
  Field initial() const {
    Field f(grid);
    const double slack = 1e-9 * grid.h;
    for (index_t i = 0; i < grid.node_count(); ++i) {
      double x = grid.coord(i, 0);
      double y = grid.dim == 2 ? grid.coord(i, 1) : 0.0;
      double val = 0.0;
      for (const auto& s : segments) {
        bool inside = x >= s.from - slack && x <= s.to + slack;
        if (grid.dim == 2) inside = inside && y >= s.y0 - slack && y <= s.y1 + slack;
        if (inside) val += s.value;
      }
      for (const auto& b : bumps) {
        double dx = x - b.cx;
        double dy = grid.dim == 2 ? y - b.cy : 0.0;
        double r2 = dx * dx + dy * dy;
        val += b.height * std::exp(-r2 / (b.width * b.width));
      }
      f[i] = val;
    }
    if (file_field) {
      if (!(file_field->grid == grid))
        throw std::invalid_argument("scenario: initial data file grid does not match scenario grid");
      for (index_t i = 0; i < grid.node_count(); ++i) f[i] += (*file_field)[i];
    }
    return f;
  }

  ordered_json effective_config() const;
  std::string config_hash() const { return io::hash_hex(effective_config().dump(2)); }
};

namespace scenario_detail {

inline void require_keys(const ordered_json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument("scenario: unknown key \"" + it.key() + "\" in " + where);
  }
}

inline double num(const ordered_json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw std::invalid_argument(std::string("scenario: \"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

inline double num_required(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw std::invalid_argument("scenario: " + where + " needs numeric \"" + key + "\"");
  return j.at(key).get<double>();
}

inline Grid parse_grid(const ordered_json& j) {
  require_keys(j, {"dim", "n", "nx", "ny", "h", "origin", "origin_x", "origin_y"}, "grid");
  int dim = j.contains("dim") ? j.at("dim").get<int>() : 1;
  double h = num_required(j, "h", "grid");
  if (dim == 1) {
    auto n = static_cast<index_t>(num_required(j, "n", "1D grid"));
    return Grid::make_1d(n, h, num(j, "origin", 0.0));
  }
  if (dim == 2) {
    auto nx = static_cast<index_t>(num_required(j, "nx", "2D grid"));
    auto ny = static_cast<index_t>(num_required(j, "ny", "2D grid"));
    return Grid::make_2d(nx, ny, h, num(j, "origin_x", 0.0), num(j, "origin_y", 0.0));
  }
  throw std::invalid_argument("scenario: grid dim must be 1 or 2");
}

inline KernelSpec parse_kernel(const ordered_json& j) {
  require_keys(j, {"profile", "radius"}, "kernel");
  KernelSpec k;
  if (j.contains("profile")) {
    std::string p = j.at("profile").get<std::string>();
    if (p == "tent")
      k.profile = KernelProfile::tent;
    else if (p == "poly-bump")
      k.profile = KernelProfile::poly_bump;
    else
      throw std::invalid_argument("scenario: kernel profile must be \"tent\" or \"poly-bump\"");
  }
  k.radius = num(j, "radius", k.radius);
  return k;
}

inline GraphSpec parse_graph(const ordered_json& j) {
  require_keys(j, {"kind", "e1", "e2", "c1", "c2", "n"}, "graph");
  std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "canonical";
  if (kind == "canonical") return GraphSpec::canonical();
  if (kind == "one_phase") return GraphSpec::one_phase();
  if (kind == "general") {
    GraphParams p;
    p.e1 = num(j, "e1", p.e1);
    p.e2 = num(j, "e2", p.e2);
    p.c1 = num(j, "c1", p.c1);
    p.c2 = num(j, "c2", p.c2);
    return GraphSpec::general(p);
  }
  if (kind == "regularized")
    return GraphSpec::regularized(static_cast<int>(num_required(j, "n", "regularized graph")));
  throw std::invalid_argument("scenario: graph kind must be canonical, one_phase, general or regularized");
}

inline StoppingRule parse_stop(const ordered_json& j) {
  require_keys(j, {"kind", "tol", "threshold"}, "solver.stop");
  std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "fixed";
  if (kind == "fixed") return StoppingRule::fixed();
  if (kind == "gamma_l1") return StoppingRule::gamma_l1(num(j, "tol", -1.0));
  if (kind == "min_above") return StoppingRule::min_above(num_required(j, "threshold", "min_above stop"));
  throw std::invalid_argument("scenario: stop kind must be fixed, gamma_l1 or min_above");
}

inline void parse_solver(const ordered_json& j, SimConfig& cfg) {
  require_keys(j,
               {"dt", "t_end", "snapshot_stride", "guard_margin", "support_eps", "threads", "stop"},
               "solver");
  cfg.dt = num(j, "dt", cfg.dt);
  cfg.t_end = num(j, "t_end", cfg.t_end);
  cfg.snapshot_stride = static_cast<index_t>(num(j, "snapshot_stride",
                                                 static_cast<double>(cfg.snapshot_stride)));
  cfg.guard_margin = static_cast<index_t>(num(j, "guard_margin",
                                              static_cast<double>(cfg.guard_margin)));
  cfg.support_eps = num(j, "support_eps", cfg.support_eps);
  cfg.threads = static_cast<int>(num(j, "threads", cfg.threads));
  if (j.contains("stop")) cfg.stop = parse_stop(j.at("stop"));
}

inline void parse_initial(const ordered_json& j, Scenario& sc,
                          const std::filesystem::path& base_dir) {
  require_keys(j, {"segments", "bumps", "file"}, "initial");
  if (j.contains("segments")) {
    for (const auto& e : j.at("segments")) {
      ScenarioSegment s;
      if (sc.grid.dim == 1) {
        require_keys(e, {"from", "to", "value"}, "initial segment");
        s.from = num_required(e, "from", "segment");
        s.to = num_required(e, "to", "segment");
      } else {
        require_keys(e, {"x0", "x1", "y0", "y1", "value"}, "initial segment");
        s.from = num_required(e, "x0", "segment");
        s.to = num_required(e, "x1", "segment");
        s.y0 = num_required(e, "y0", "segment");
        s.y1 = num_required(e, "y1", "segment");
      }
      s.value = num_required(e, "value", "segment");
      sc.segments.push_back(s);
    }
  }
  if (j.contains("bumps")) {
    for (const auto& e : j.at("bumps")) {
      require_keys(e, {"center", "center_y", "height", "width"}, "initial bump");
      ScenarioBump b;
      b.cx = num_required(e, "center", "bump");
      if (sc.grid.dim == 2) b.cy = num(e, "center_y", 0.0);
      b.height = num_required(e, "height", "bump");
      b.width = num_required(e, "width", "bump");
      if (!(b.width > 0)) throw std::invalid_argument("scenario: bump width must be positive");
      sc.bumps.push_back(b);
    }
  }
  if (j.contains("file")) {
    std::filesystem::path p = base_dir / j.at("file").get<std::string>();
    std::ifstream in(p);
    if (!in) throw std::invalid_argument("scenario: cannot read initial data file " + p.string());
    ordered_json fj = ordered_json::parse(in);
    sc.file_field = io::field_from_json(fj);
  }
}

inline void parse_phaseloss(const ordered_json& j, Scenario& sc) {
  require_keys(j, {"user_R", "verify", "verify_t_end", "estimate"}, "phaseloss");
  sc.phase.user_R = num(j, "user_R", sc.phase.user_R);
  if (j.contains("verify")) sc.phase.verify = j.at("verify").get<bool>();
  sc.phase.verify_t_end = num(j, "verify_t_end", sc.phase.verify_t_end);
  if (j.contains("estimate")) {
    SimConfig est = sc.config;
    parse_solver(j.at("estimate"), est);
    sc.phase.estimate = est;
  }
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const ordered_json& j, const std::filesystem::path& base_dir) {
  using namespace scenario_detail;
  require_keys(j, {"name", "grid", "kernel", "graph", "solver", "initial", "outputs",
                   "phaseloss", "bop"},
               "scenario");
  Scenario sc;
  sc.name = j.contains("name") ? j.at("name").get<std::string>() : "unnamed";
  if (!j.contains("grid")) throw std::invalid_argument("scenario: missing \"grid\"");
  sc.grid = parse_grid(j.at("grid"));
  if (j.contains("kernel")) sc.config.kernel = parse_kernel(j.at("kernel"));
  if (j.contains("graph")) sc.config.graph = parse_graph(j.at("graph"));
  if (j.contains("solver")) parse_solver(j.at("solver"), sc.config);
  if (j.contains("initial")) parse_initial(j.at("initial"), sc, base_dir);
  if (j.contains("outputs")) {
    for (const auto& e : j.at("outputs")) sc.outputs.push_back(e.get<std::string>());
  }
  if (j.contains("phaseloss")) parse_phaseloss(j.at("phaseloss"), sc);
  if (j.contains("bop")) {
    require_keys(j.at("bop"), {"max_sweeps", "tol"}, "bop");
    sc.bop.max_sweeps = static_cast<long>(num(j.at("bop"), "max_sweeps",
                                              static_cast<double>(sc.bop.max_sweeps)));
    sc.bop.tol = num(j.at("bop"), "tol", sc.bop.tol);
  }
  sc.config.validate();
  sc.grid.validate();
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot read " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw std::invalid_argument("scenario: invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

inline ordered_json Scenario::effective_config() const {
  ordered_json j;
  j["name"] = name;
  j["grid"] = io::grid_json(grid);

  ordered_json k;
  k["profile"] = profile_name(config.kernel.profile);
  k["radius"] = config.kernel.radius;
  j["kernel"] = k;

  ordered_json g;
  switch (config.graph.kind) {
    case GraphSpec::Kind::canonical: g["kind"] = "canonical"; break;
    case GraphSpec::Kind::one_phase: g["kind"] = "one_phase"; break;
    case GraphSpec::Kind::general:
      g["kind"] = "general";
      g["e1"] = config.graph.params.e1;
      g["e2"] = config.graph.params.e2;
      g["c1"] = config.graph.params.c1;
      g["c2"] = config.graph.params.c2;
      break;
    case GraphSpec::Kind::regularized:
      g["kind"] = "regularized";
      g["n"] = config.graph.n;
      break;
  }
  j["graph"] = g;

  ordered_json s;
  s["dt"] = config.dt;
  s["t_end"] = config.t_end;
  s["snapshot_stride"] = config.snapshot_stride;
  s["guard_margin"] = config.guard_margin;
  s["support_eps"] = config.support_eps;
  s["threads"] = config.threads;
  ordered_json st;
  switch (config.stop.kind) {
    case StoppingRule::Kind::fixed_horizon: st["kind"] = "fixed"; break;
    case StoppingRule::Kind::gamma_l1_below:
      st["kind"] = "gamma_l1";
      st["tol"] = config.stop.tol;
      break;
    case StoppingRule::Kind::min_u_above:
      st["kind"] = "min_above";
      st["threshold"] = config.stop.threshold;
      break;
  }
  s["stop"] = st;
  j["solver"] = s;

  ordered_json init;
  ordered_json segs = ordered_json::array();
  for (const auto& sg : segments) {
    ordered_json e;
    if (grid.dim == 1) {
      e["from"] = sg.from;
      e["to"] = sg.to;
    } else {
      e["x0"] = sg.from;
      e["x1"] = sg.to;
      e["y0"] = sg.y0;
      e["y1"] = sg.y1;
    }
    e["value"] = sg.value;
    segs.push_back(e);
  }
  init["segments"] = segs;
  ordered_json bmps = ordered_json::array();
  for (const auto& b : bumps) {
    ordered_json e;
    e["center"] = b.cx;
    if (grid.dim == 2) e["center_y"] = b.cy;
    e["height"] = b.height;
    e["width"] = b.width;
    bmps.push_back(e);
  }
  init["bumps"] = bmps;
  init["from_file"] = file_field.has_value();
  j["initial"] = init;

  j["outputs"] = outputs;

  ordered_json ph;
  ph["user_R"] = phase.user_R;
  ph["verify"] = phase.verify;
  ph["verify_t_end"] = phase.verify_t_end;
  ph["has_estimate_config"] = phase.estimate.has_value();
  j["phaseloss"] = ph;

  ordered_json bp;
  bp["max_sweeps"] = bop.max_sweeps;
  bp["tol"] = bop.tol;
  j["bop"] = bp;
  return j;
}

}  // namespace nlstefan

#endif

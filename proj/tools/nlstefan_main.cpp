// Command-line front end. Subcommands map one-to-one onto the library's
// top-level entry points; every artifact is written atomically and contains
// no timestamps or machine state, so identical configs give byte-identical
// output trees. Exit codes: 0 success, 1 assertion failure at runtime,
// 2 configuration error.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlstefan/asymptotics.hpp"
#include "nlstefan/diagnostics.hpp"
#include "nlstefan/evolution.hpp"
#include "nlstefan/graph.hpp"
#include "nlstefan/grid.hpp"
#include "nlstefan/io.hpp"
#include "nlstefan/kernel.hpp"
#include "nlstefan/phaseloss.hpp"
#include "nlstefan/scenario.hpp"

namespace fs = std::filesystem;
using namespace nlstefan;
using nlstefan::io::format_double;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  double dt = -1.0;
  double t_end = -1.0;
  double tol = -1.0;
  int threads = 0;
  bool dump = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config, "scenario JSON file")->required();
  sub->add_option("--out", o.out, "output directory (default: $STEFAN_OUT_DIR or .)");
  sub->add_option("--dt", o.dt, "override solver time step");
  sub->add_option("--t-end", o.t_end, "override solver horizon");
  sub->add_option("--tol", o.tol, "override stopping/assertion tolerance");
  sub->add_option("--threads", o.threads, "override worker thread count");
  sub->add_flag("--dump-effective-config", o.dump,
                "print the resolved configuration as JSON and exit");
}

Scenario load(const CommonOpts& o) {
  Scenario sc = load_scenario(o.config);
  if (o.dt > 0.0) sc.config.dt = o.dt;
  if (o.t_end >= 0.0) sc.config.t_end = o.t_end;
  if (o.threads > 0) sc.config.threads = o.threads;
  if (o.tol > 0.0) {
    if (sc.config.stop.kind == StoppingRule::Kind::gamma_l1_below) sc.config.stop.tol = o.tol;
    sc.bop.tol = o.tol;
  }
  sc.config.validate();
  return sc;
}

fs::path out_dir(const CommonOpts& o) {
  std::string dir = o.out;
  if (dir.empty()) {
    const char* env = std::getenv("STEFAN_OUT_DIR");
    dir = env != nullptr && *env != '\0' ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& p, const ordered_json& j) {
  io::atomic_write(p, j.dump(2) + "\n");
}

// Returns true when the run should stop after dumping the resolved config.
bool maybe_dump(const CommonOpts& o, const Scenario& sc) {
  if (!o.dump) return false;
  std::cout << sc.effective_config().dump(2) << "\n";
  return true;
}

double assert_tol(const CommonOpts& o, double fallback) {
  return o.tol > 0.0 ? o.tol : fallback;
}

void run_simulate(const CommonOpts& o) {
  Scenario sc = load(o);
  if (maybe_dump(o, sc)) return;
  fs::path dir = out_dir(o);
  Field f = sc.initial();
  Trajectory traj = integrate(f, sc.config);

  io::atomic_write(dir / (sc.name + "_diagnostics.csv"), io::diagnostics_csv(traj));
  write_json(dir / (sc.name + "_final.json"), io::field_json(traj.final_u()));
  io::atomic_write(dir / (sc.name + "_final.csv"), io::field_csv(traj.final_u()));
  if (sc.wants("potential"))
    write_json(dir / (sc.name + "_potential.json"), io::field_json(traj.final_w()));
  if (sc.wants("kernel")) write_json(dir / (sc.name + "_kernel.json"), io::kernel_json(traj.kernel));
  if (sc.wants("snapshots")) {
    ordered_json j;
    j["grid"] = io::grid_json(traj.grid);
    j["times"] = traj.snap_times;
    ordered_json states = ordered_json::array();
    ordered_json pots = ordered_json::array();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      states.push_back(traj.snapshots[k].values);
      pots.push_back(traj.w_snaps[k].values);
    }
    j["states"] = states;
    j["potentials"] = pots;
    write_json(dir / (sc.name + "_snapshots.json"), j);
  }

  const DiagRow& last = traj.rows.back();
  std::cout << "simulate " << sc.name << ": t=" << format_double(last.t)
            << " mass=" << format_double(last.mass)
            << " linf=" << format_double(last.linf)
            << " l1_gamma=" << format_double(last.l1_gamma)
            << (traj.stop_reason == Trajectory::StopReason::rule_fired ? " (stop rule fired)"
                                                                       : " (horizon)")
            << "\n";
}

void run_project(const CommonOpts& o) {
  Scenario sc = load(o);
  if (maybe_dump(o, sc)) return;
  fs::path dir = out_dir(o);
  Field f = sc.initial();

  if (min_value(f) >= 0.0) {
    OnePhaseProjection p = project_one_phase_full(f, sc.config);
    double m0 = integral(f), m1 = integral(p.limit);
    write_json(dir / (sc.name + "_projection.json"), io::field_json(p.limit));
    io::atomic_write(dir / (sc.name + "_projection.csv"), io::field_csv(p.limit));
    ordered_json rep;
    rep["kind"] = "one_phase";
    rep["t_reached"] = p.t_reached;
    rep["residual"] = p.residual;
    rep["mass_initial"] = m0;
    rep["mass_final"] = m1;
    rep["max_value"] = max_value(p.limit);
    write_json(dir / (sc.name + "_project_report.json"), rep);
    if (std::fabs(m1 - m0) > 1e-9 * std::max(1.0, std::fabs(m0)))
      throw std::runtime_error("mass conservation violated in one-phase projection");
    std::cout << "project " << sc.name << ": t=" << format_double(p.t_reached)
              << " residual=" << format_double(p.residual) << "\n";
    return;
  }

  GeneralProjection gp = project_general(f, sc.config);
  write_json(dir / (sc.name + "_projection.json"), io::field_json(gp.limit));
  io::atomic_write(dir / (sc.name + "_projection.csv"), io::field_csv(gp.limit));
  ordered_json rep;
  rep["kind"] = "general";
  rep["status"] = projection_status_name(gp.status);
  rep["t_reached"] = gp.t_reached;
  rep["interaction"] = io::interaction_json(gp.interaction);
  write_json(dir / (sc.name + "_project_report.json"), rep);
  if (gp.status == ProjectionStatus::unresolved)
    throw std::runtime_error("projection unresolved: horizon exhausted before a recognised limit");
  std::cout << "project " << sc.name << ": status=" << projection_status_name(gp.status)
            << " t=" << format_double(gp.t_reached) << "\n";
}

void run_bop(const CommonOpts& o) {
  Scenario sc = load(o);
  if (maybe_dump(o, sc)) return;
  fs::path dir = out_dir(o);
  Field f = sc.initial();
  DiscreteKernel kernel =
      build_kernel(sc.config.kernel.profile, sc.config.kernel.radius, sc.grid.dim, sc.grid.h);

  BopResult time_route = solve_bop_time(f, sc.config);
  BopResult direct = solve_bop_direct(f, kernel, static_cast<int>(sc.bop.max_sweeps), sc.bop.tol);

  write_json(dir / (sc.name + "_w_time.json"), io::field_json(time_route.w_inf));
  write_json(dir / (sc.name + "_f_tilde_time.json"), io::field_json(time_route.f_tilde));
  write_json(dir / (sc.name + "_w_direct.json"), io::field_json(direct.w_inf));
  write_json(dir / (sc.name + "_f_tilde_direct.json"), io::field_json(direct.f_tilde));
  write_json(dir / (sc.name + "_bop_time.json"),
             io::bop_json(time_route, sc.name + "_w_time.json", sc.name + "_f_tilde_time.json"));
  write_json(dir / (sc.name + "_bop_direct.json"),
             io::bop_json(direct, sc.name + "_w_direct.json", sc.name + "_f_tilde_direct.json"));

  double w_gap = l1_distance(time_route.w_inf, direct.w_inf);
  double f_gap = l1_distance(time_route.f_tilde, direct.f_tilde);
  double comp = std::max(time_route.residuals.complementarity, direct.residuals.complementarity);
  double bound = std::max(time_route.residuals.bound, direct.residuals.bound);
  double comp_tol = assert_tol(o, 1e-8);
  bool pass = comp <= comp_tol && bound <= comp_tol && w_gap <= 1e-6 && f_gap <= 1e-8;

  ordered_json cross;
  cross["w_l1_gap"] = w_gap;
  cross["f_tilde_l1_gap"] = f_gap;
  cross["complementarity_max"] = comp;
  cross["bound_max"] = bound;
  cross["pass"] = pass;
  write_json(dir / (sc.name + "_bop_cross.json"), cross);

  std::cout << "bop " << sc.name << ": w_gap=" << format_double(w_gap)
            << " f_gap=" << format_double(f_gap) << " complementarity=" << format_double(comp)
            << " sweeps=" << direct.sweeps << " t=" << format_double(time_route.t_reached) << "\n";
  if (!pass) throw std::runtime_error("cross-method disagreement: stationary solvers do not match");
}

void run_criterion(const CommonOpts& o) {
  Scenario sc = load(o);
  if (maybe_dump(o, sc)) return;
  fs::path dir = out_dir(o);
  Field f = sc.initial();
  PhaseLossReport rep = criterion(f, sc.config, sc.phase);
  write_json(dir / (sc.name + "_criterion.json"), io::phase_loss_json(rep, sc.config_hash()));
  std::cout << "criterion " << sc.name << ": holds=" << (rep.criterion_holds ? "yes" : "no")
            << " kappa=" << format_double(rep.kappa) << " t1=" << format_double(rep.t1);
  if (rep.measured_loss_time)
    std::cout << " measured_loss_time=" << format_double(*rep.measured_loss_time);
  std::cout << "\n";
  if (rep.loss_within_bound && !*rep.loss_within_bound)
    throw std::runtime_error("phase loss later than the predicted bound");
}

void run_decompose(const CommonOpts& o) {
  Scenario sc = load(o);
  if (maybe_dump(o, sc)) return;
  fs::path dir = out_dir(o);
  Field f = sc.initial();

  InteractionReport rep = check_noninteraction(f, sc.config);
  Trajectory parts = decompose_noninteracting(f, sc.config);
  SimConfig full_cfg = sc.config;
  full_cfg.stop = StoppingRule::fixed();
  Trajectory full = integrate(f, full_cfg);

  if (full.snap_times.size() != parts.snap_times.size())
    throw std::runtime_error("decomposition snapshots misaligned with the full run");
  double max_gap = 0.0;
  std::string csv = "t,gap\n";
  for (std::size_t k = 0; k < full.snapshots.size(); ++k) {
    double gap = l1_distance(full.snapshots[k], parts.snapshots[k]);
    if (gap > max_gap) max_gap = gap;
    csv += format_double(full.snap_times[k]);
    csv += ',';
    csv += format_double(gap);
    csv += '\n';
  }
  io::atomic_write(dir / (sc.name + "_decompose_gap.csv"), csv);

  double tol = assert_tol(o, 1e-10);
  ordered_json j;
  j["interaction"] = io::interaction_json(rep);
  j["max_gap"] = max_gap;
  j["tol"] = tol;
  j["pass"] = max_gap <= tol;
  write_json(dir / (sc.name + "_decompose.json"), j);

  std::cout << "decompose " << sc.name << ": level=" << interaction_level_name(rep.level)
            << " max_gap=" << format_double(max_gap) << "\n";
  if (max_gap > tol)
    throw std::runtime_error("superposition gap exceeds tolerance: phases are not independent");
}

void run_checks(const CommonOpts& o) {
  Scenario sc = load(o);
  if (maybe_dump(o, sc)) return;
  fs::path dir = out_dir(o);
  Field f = sc.initial();
  SimConfig c = sc.config;
  c.snapshot_stride = 1;
  c.stop = StoppingRule::fixed();
  Trajectory traj = integrate(f, c);

  std::vector<CheckReport> reports;
  reports.push_back(check_conservation(traj));
  reports.push_back(check_linf_bound(traj));
  reports.push_back(check_support_growth(traj, support_bound(f, traj.kernel, c.graph)));
  reports.push_back(check_subcaloric(traj));
  if (sc.wants("retention")) reports.push_back(check_retention(traj));
  if (sc.wants("contraction")) {
    Trajectory partner = integrate(positive_part(f), c);
    reports.push_back(check_contraction(traj, partner));
  }

  ordered_json arr = ordered_json::array();
  std::string failed;
  for (const CheckReport& r : reports) {
    arr.push_back(io::report_json(r));
    if (!r.pass) failed += (failed.empty() ? "" : ", ") + r.check;
  }
  write_json(dir / (sc.name + "_checks.json"), arr);

  std::cout << "checks " << sc.name << ": " << reports.size() << " checks, "
            << (failed.empty() ? "all passed" : "FAILED: " + failed) << "\n";
  if (!failed.empty()) throw std::runtime_error("invariant checks failed: " + failed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlocal two-phase Stefan problem toolkit"};
  app.require_subcommand(1);

  CommonOpts o_sim, o_proj, o_bop, o_crit, o_dec, o_chk;
  std::function<void()> action;

  auto* sim = app.add_subcommand("simulate", "integrate the flow and write diagnostics");
  add_common(sim, o_sim);
  sim->callback([&] { action = [&] { run_simulate(o_sim); }; });

  auto* proj = app.add_subcommand("project", "long-time projection of the initial data");
  add_common(proj, o_proj);
  proj->callback([&] { action = [&] { run_project(o_proj); }; });

  auto* bop = app.add_subcommand("bop", "solve the stationary biobstacle system both ways");
  add_common(bop, o_bop);
  bop->callback([&] { action = [&] { run_bop(o_bop); }; });

  auto* crit = app.add_subcommand("criterion", "phase-loss criterion report");
  add_common(crit, o_crit);
  crit->callback([&] { action = [&] { run_criterion(o_crit); }; });

  auto* dec = app.add_subcommand("decompose", "compare the flow with its one-phase superposition");
  add_common(dec, o_dec);
  dec->callback([&] { action = [&] { run_decompose(o_dec); }; });

  auto* chk = app.add_subcommand("checks", "run the structural invariant suite");
  add_common(chk, o_chk);
  chk->callback([&] { action = [&] { run_checks(o_chk); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    action();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "assertion failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

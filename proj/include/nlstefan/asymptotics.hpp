#ifndef NLSTEFAN_ASYMPTOTICS_HPP
#define NLSTEFAN_ASYMPTOTICS_HPP

// Long-time structure: the one-phase projection P, the stationary biobstacle
// complementarity system solved two independent ways (time integration of the
// flow, and direct nodewise relaxation), the non-interaction classification
// that decides when the two-phase limit splits into P f+ - P f-, and the
// general-data limit dispatcher.
//
// The time-integrated accumulator satisfies u_k = f + J*w_k - w_k exactly, so
// at a converged stop the pair (w, f_tilde) solves the same complementarity
// system the direct sweep targets; agreement of the two solvers is then a
// uniqueness statement, not a discretization coincidence.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlstefan/diagnostics.hpp"
#include "nlstefan/evolution.hpp"
#include "nlstefan/graph.hpp"
#include "nlstefan/grid.hpp"
#include "nlstefan/kernel.hpp"

namespace nlstefan {

struct OnePhaseProjection {
  Field limit;       // P f
  Field w_inf;       // accumulated potential of the projection run
  double t_reached = 0.0;
  double residual = 0.0;  // ||(u-1)+||_1 at stop
};

namespace detail {

inline std::string format_residual(double r) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3e", r);
  return buf;
}

}  // namespace detail

// Runs the one-phase flow until the excess ||(u-1)+||_1 drops below tol
// (config stopping tolerance when given, else the mass-scaled default).
inline OnePhaseProjection project_one_phase_full(const Field& f, const SimConfig& cfg) {
  if (min_value(f) < 0.0)
    throw std::invalid_argument("one-phase projection: initial data must be nonnegative");
  SimConfig c = cfg;
  c.graph = GraphSpec::one_phase();
  c.snapshot_stride = 0;
  double tol = c.stop.kind == StoppingRule::Kind::gamma_l1_below && c.stop.tol > 0.0
                   ? c.stop.tol
                   : default_gamma_stop_tol(f);
  c.stop = StoppingRule::gamma_l1(tol);
  Trajectory traj = integrate_one_phase(f, c);
  if (traj.stop_reason != Trajectory::StopReason::rule_fired)
    throw std::runtime_error("one-phase projection: horizon exhausted before convergence (residual " +
                             detail::format_residual(traj.rows.back().l1_gamma) + ")");
  OnePhaseProjection p;
  p.limit = traj.final_u();
  p.w_inf = traj.final_w();
  p.t_reached = traj.final_time();
  p.residual = traj.rows.back().l1_gamma;
  return p;
}

inline Field project_one_phase(const Field& f, const SimConfig& cfg) {
  return project_one_phase_full(f, cfg).limit;
}

enum class InteractionLevel { none, temperature, strong };

inline const char* interaction_level_name(InteractionLevel l) {
  switch (l) {
    case InteractionLevel::none: return "none";
    case InteractionLevel::temperature: return "temperature";
    default: return "strong";
  }
}

// Separation certificate built from the two one-phase projection runs.
// Distances:
//   projected supports:     between supp P f+ and supp P f-.
//   temperature envelopes:  between the supports of the accumulated
//                           potentials of the two runs. The potential marks
//                           every node whose temperature was ever nonzero,
//                           so envelope distance >= R_J certifies the phases
//                           never exchange heat through the kernel (the
//                           final-state temperature alone would not: it is
//                           stopping-tolerance noise).
struct InteractionReport {
  InteractionLevel level = InteractionLevel::strong;
  double dist_projected_supports = std::numeric_limits<double>::infinity();
  double dist_temperature_envelopes = std::numeric_limits<double>::infinity();
  double r_j = 0.0;
};

inline InteractionReport check_noninteraction(const Field& f, const SimConfig& cfg) {
  InteractionReport rep;
  rep.r_j = cfg.kernel.radius;
  Field fp = positive_part(f);
  Field fm = negative_part(f);
  if (support_mask(fp).empty() || support_mask(fm).empty()) return rep;  // one-signed

  // The classification is about the limit, while the caller's t_end is
  // usually a viewing window; give the internal projections a horizon of
  // their own so slowly decaying data still classifies.
  SimConfig pc = cfg;
  pc.t_end = std::max(cfg.t_end, 2000.0);
  OnePhaseProjection pp = project_one_phase_full(fp, pc);
  OnePhaseProjection pm = project_one_phase_full(fm, pc);
  rep.dist_projected_supports =
      set_distance(support_mask(pp.limit), support_mask(pm.limit));
  rep.dist_temperature_envelopes =
      set_distance(support_mask(pp.w_inf), support_mask(pm.w_inf));
  if (rep.dist_projected_supports > 2.0 * rep.r_j)
    rep.level = InteractionLevel::strong;
  else if (rep.dist_temperature_envelopes >= rep.r_j)
    rep.level = InteractionLevel::temperature;
  else
    rep.level = InteractionLevel::none;
  return rep;
}

enum class BopMethod { time_integration, direct_sweep };

inline const char* bop_method_name(BopMethod m) {
  return m == BopMethod::time_integration ? "time-integration" : "direct-sweep";
}

struct BopResiduals {
  double complementarity = 0.0;  // max_i of: w=0 -> (|f~|-1)+, else min(|w|, |f~ - sign(w)|)
  double bound = 0.0;            // max_i (|f~|-1)+
  double fixed_point = 0.0;      // final ||G(u)||_1 (time) or last max update (direct)
};

struct BopResult {
  BopMethod method = BopMethod::time_integration;
  Field w_inf;
  Field f_tilde;
  BopResiduals residuals;
  int sweeps = 0;          // direct method
  double t_reached = 0.0;  // time method
};

inline BopResiduals bop_residuals(const Field& w, const Field& f_tilde) {
  BopResiduals r;
  for (index_t i = 0; i < w.grid.node_count(); ++i) {
    double excess = std::fabs(f_tilde[i]) - 1.0;
    if (excess > r.bound) r.bound = excess;
    double c;
    if (w[i] == 0.0)
      c = excess > 0.0 ? excess : 0.0;
    else
      c = std::min(std::fabs(w[i]), std::fabs(f_tilde[i] - (w[i] > 0.0 ? 1.0 : -1.0)));
    if (c > r.complementarity) r.complementarity = c;
  }
  if (r.bound < 0.0) r.bound = 0.0;
  return r;
}

namespace detail {

inline Field recover_f_tilde(const Field& f, const Field& w, const DiscreteKernel& kernel) {
  Field conv = convolve(kernel, w);
  Field out(f.grid);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = f.values[i] + conv.values[i] - w.values[i];
  return out;
}

inline BopResult solve_bop_time_unchecked(const Field& f, const SimConfig& cfg) {
  SimConfig c = cfg;
  c.graph = GraphSpec::canonical();
  c.snapshot_stride = 0;
  double tol = c.stop.kind == StoppingRule::Kind::gamma_l1_below && c.stop.tol > 0.0
                   ? c.stop.tol
                   : default_gamma_stop_tol(f);
  c.stop = StoppingRule::gamma_l1(tol);
  Trajectory traj = integrate(f, c);
  if (traj.stop_reason != Trajectory::StopReason::rule_fired)
    throw std::runtime_error("biobstacle time integration: horizon exhausted (residual " +
                             format_residual(traj.rows.back().l1_gamma) + ")");
  BopResult res;
  res.method = BopMethod::time_integration;
  res.w_inf = traj.final_w();
  res.f_tilde = recover_f_tilde(f, res.w_inf, traj.kernel);
  res.t_reached = traj.final_time();
  double slack = 1e-8 * (1.0 + l1_norm(f));
  double gap = l1_distance(res.f_tilde, traj.final_u());
  if (gap > slack)
    throw std::runtime_error("biobstacle time integration: potential identity violated (gap " +
                             format_residual(gap) + ")");
  res.residuals = bop_residuals(res.w_inf, res.f_tilde);
  res.residuals.fixed_point = traj.rows.back().l1_gamma;
  return res;
}

}  // namespace detail

// Time-integration route: run the flow to its limit and read the potential.
// Requires non-interacting (or one-signed) data; the accumulated potential
// of an interacting run solves no stationary system.
inline BopResult solve_bop_time(const Field& f, const SimConfig& cfg) {
  bool one_signed = min_value(f) >= 0.0 || max_value(f) <= 0.0;
  if (!one_signed) {
    InteractionReport rep = check_noninteraction(f, cfg);
    if (rep.level == InteractionLevel::none)
      throw std::runtime_error("phases interact: BOP theory not applicable");
  }
  return detail::solve_bop_time_unchecked(f, cfg);
}

enum class SweepOrder { ascending, descending };

// Direct route: nodewise projected relaxation of the complementarity system
//   f~ = f + J*w - w,  |f~| <= 1,  w > 0 => f~ = 1,  w < 0 => f~ = -1.
// Each visit solves its node exactly with the others frozen (scalar
// shrinkage); the iteration is coordinate descent on a strictly convex
// energy, so it converges for any data the grid can hold.
inline BopResult solve_bop_direct(const Field& f, const DiscreteKernel& kernel,
                                  int max_sweeps = 200000, double tol = 1e-12,
                                  SweepOrder order = SweepOrder::ascending) {
  if (f.grid.dim != kernel.dim || std::fabs(f.grid.h - kernel.h) > 1e-12 * kernel.h)
    throw std::invalid_argument("direct biobstacle solve: kernel and field grids disagree");
  if (max_sweeps < 1 || !(tol > 0.0))
    throw std::invalid_argument("direct biobstacle solve: need max_sweeps >= 1 and tol > 0");
  detail::check_support_guard(f, GraphSpec::canonical(), default_guard_margin(kernel),
                              default_support_eps(f));

  const Grid& g = f.grid;
  const double vol = g.cell_volume();
  const double d = vol * kernel.weight(0, 0);
  if (!(d < 1.0))
    throw std::invalid_argument("direct biobstacle solve: kernel center weight too large");
  const double inv = 1.0 / (1.0 - d);

  Field w(g);
  Field conv(g);  // J*w, maintained incrementally
  const index_t n = g.node_count();
  const index_t m = kernel.m;

  auto deposit = [&](index_t node, double delta) {
    if (g.dim == 1) {
      index_t lo = std::max<index_t>(0, node - m), hi = std::min<index_t>(n - 1, node + m);
      for (index_t j = lo; j <= hi; ++j) conv.values[j] += delta * vol * kernel.weight(j - node);
    } else {
      index_t ix = g.ix_of(node), iy = g.iy_of(node);
      index_t xlo = std::max<index_t>(0, ix - m), xhi = std::min(g.shape[0] - 1, ix + m);
      index_t ylo = std::max<index_t>(0, iy - m), yhi = std::min(g.shape[1] - 1, iy + m);
      for (index_t jx = xlo; jx <= xhi; ++jx)
        for (index_t jy = ylo; jy <= yhi; ++jy)
          conv.values[g.flat(jx, jy)] += delta * vol * kernel.weight(jx - ix, jy - iy);
    }
  };

  BopResult res;
  res.method = BopMethod::direct_sweep;
  double last_update = 0.0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_update = 0.0;
    for (index_t pos = 0; pos < n; ++pos) {
      index_t i = order == SweepOrder::ascending ? pos : n - 1 - pos;
      double s = f.values[i] + conv.values[i] - d * w.values[i];
      double cand;
      if (s > 1.0)
        cand = (s - 1.0) * inv;
      else if (s < -1.0)
        cand = (s + 1.0) * inv;
      else
        cand = 0.0;
      double delta = cand - w.values[i];
      if (delta != 0.0) {
        w.values[i] = cand;
        deposit(i, delta);
        double a = std::fabs(delta);
        if (a > max_update) max_update = a;
      }
    }
    res.sweeps = sweep;
    last_update = max_update;
    if (max_update < tol) {
      res.w_inf = w;
      res.f_tilde = detail::recover_f_tilde(f, w, kernel);
      res.residuals = bop_residuals(res.w_inf, res.f_tilde);
      res.residuals.fixed_point = max_update;
      return res;
    }
  }
  throw std::runtime_error("direct biobstacle solve: no convergence after " +
                           std::to_string(max_sweeps) + " sweeps (last update " +
                           detail::format_residual(last_update) + ")");
}

// Predicted trajectory U+(t) - U-(t) from two decoupled one-phase runs.
// Valid only under strong separation; forced to a fixed horizon so the two
// runs stay snapshot-aligned.
inline Trajectory decompose_noninteracting(const Field& f, const SimConfig& cfg) {
  InteractionReport rep = check_noninteraction(f, cfg);
  if (rep.level != InteractionLevel::strong)
    throw std::runtime_error("decomposition requires strongly separated projected supports");

  SimConfig c = cfg;
  c.stop = StoppingRule::fixed();
  Trajectory up = integrate_one_phase(positive_part(f), c);
  Trajectory um = integrate_one_phase(negative_part(f), c);

  Trajectory out;
  out.grid = up.grid;
  out.config = cfg;
  out.config.stop = c.stop;
  out.kernel = up.kernel;
  out.support_eps = up.support_eps;
  out.snap_times = up.snap_times;
  out.stop_reason = Trajectory::StopReason::horizon;
  for (std::size_t k = 0; k < up.snapshots.size(); ++k) {
    out.snapshots.push_back(axpy(up.snapshots[k], -1.0, um.snapshots[k]));
    out.w_snaps.push_back(axpy(up.w_snaps[k], -1.0, um.w_snaps[k]));
    out.rows.push_back(
        detail::make_row(up.snap_times[k], out.snapshots.back(), cfg.graph, out.support_eps));
  }
  return out;
}

enum class ProjectionStatus { noninteracting, converged, phase_loss_continuation, unresolved };

inline const char* projection_status_name(ProjectionStatus s) {
  switch (s) {
    case ProjectionStatus::noninteracting: return "noninteracting";
    case ProjectionStatus::converged: return "converged";
    case ProjectionStatus::phase_loss_continuation: return "phase_loss_continuation";
    default: return "unresolved";
  }
}

struct GeneralProjection {
  Field limit;
  ProjectionStatus status = ProjectionStatus::unresolved;
  double t_reached = 0.0;
  InteractionReport interaction;
};

namespace detail {

inline bool first_loss_time(const Trajectory& traj, double* t_loss) {
  // A loss needs a negative phase to lose: data starting above -1 never count.
  if (traj.rows.empty() || traj.rows.front().min_u >= -1.0 - 1e-12) return false;
  for (const DiagRow& r : traj.rows)
    if (r.min_u >= -1.0 - 1e-12) {
      *t_loss = r.t;
      return true;
    }
  return false;
}

}  // namespace detail

// General-data limit. Dispatch:
//   separated phases        -> stationary solve via the time route;
//   temperature decayed     -> converged at the recorded state;
//   negative phase lost     -> the flow is one-phase from the loss time on,
//                              so one more horizon is granted to finish;
//   neither within horizon  -> unresolved (interacting case left open).
inline GeneralProjection project_general(const Field& f, const SimConfig& cfg) {
  GeneralProjection out;
  out.interaction = check_noninteraction(f, cfg);
  if (out.interaction.level != InteractionLevel::none) {
    BopResult bop = detail::solve_bop_time_unchecked(f, cfg);
    out.limit = bop.f_tilde;
    out.status = ProjectionStatus::noninteracting;
    out.t_reached = bop.t_reached;
    return out;
  }

  SimConfig c = cfg;
  c.snapshot_stride = 0;
  double tol = c.stop.kind == StoppingRule::Kind::gamma_l1_below && c.stop.tol > 0.0
                   ? c.stop.tol
                   : default_gamma_stop_tol(f);
  c.stop = StoppingRule::gamma_l1(tol);
  Trajectory run = integrate(f, c);
  double t_loss = 0.0;
  bool lost = detail::first_loss_time(run, &t_loss);
  if (run.stop_reason == Trajectory::StopReason::rule_fired) {
    out.limit = run.final_u();
    out.status = lost && t_loss < run.final_time() ? ProjectionStatus::phase_loss_continuation
                                                   : ProjectionStatus::converged;
    out.t_reached = run.final_time();
    return out;
  }
  if (lost) {
    Trajectory cont = integrate(run.final_u(), c);
    out.limit = cont.final_u();
    out.t_reached = run.final_time() + cont.final_time();
    out.status = cont.stop_reason == Trajectory::StopReason::rule_fired
                     ? ProjectionStatus::phase_loss_continuation
                     : ProjectionStatus::unresolved;
    return out;
  }
  out.limit = run.final_u();
  out.status = ProjectionStatus::unresolved;
  out.t_reached = run.final_time();
  return out;
}

}  // namespace nlstefan

#endif

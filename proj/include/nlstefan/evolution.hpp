#ifndef NLSTEFAN_EVOLUTION_HPP
#define NLSTEFAN_EVOLUTION_HPP

// Explicit-Euler evolution of u_t = J*G(u) - G(u) with zero extension, a
// support guard against silent boundary truncation, per-step diagnostics, and
// an integral-equation fixed-point solver used as an independent oracle.
//
// The accumulated potential w uses left-endpoint quadrature,
// w_{k+1} = w_k + dt*G(u_k), because the stepped trajectory then satisfies
// u_k = f + J*w_k - w_k exactly (the update telescopes); any other quadrature
// breaks that identity by O(dt) at the initial corner, which the asymptotic
// solvers cannot absorb.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlstefan/graph.hpp"
#include "nlstefan/grid.hpp"
#include "nlstefan/kernel.hpp"

namespace nlstefan {

inline constexpr double kMaxStableDt = 0.5;  // RHS is 2-Lipschitz in u

struct KernelSpec {
  KernelProfile profile = KernelProfile::tent;
  double radius = 1.0;
};

struct StoppingRule {
  enum class Kind { fixed_horizon, gamma_l1_below, min_u_above };
  Kind kind = Kind::fixed_horizon;
  double tol = 0.0;        // gamma_l1_below only
  double threshold = 0.0;  // min_u_above only

  static StoppingRule fixed() { return {}; }
  static StoppingRule gamma_l1(double tol) { return {Kind::gamma_l1_below, tol, 0.0}; }
  static StoppingRule min_above(double threshold) {
    return {Kind::min_u_above, 0.0, threshold};
  }
};

struct SimConfig {
  KernelSpec kernel{};
  GraphSpec graph{};
  double dt = 0.1;
  double t_end = 10.0;
  index_t snapshot_stride = 1;  // snapshot every this many steps; 0 = endpoints only
  index_t guard_margin = 0;     // boundary margin in nodes; 0 = derived from the kernel
  double support_eps = -1.0;    // threshold for guards and support counts; <0 = default
  StoppingRule stop{};
  int threads = 1;

  void validate() const {
    if (!(dt > 0.0) || dt > kMaxStableDt)
      throw std::invalid_argument("sim config: dt must lie in (0, 0.5]");
    if (!(t_end >= 0.0)) throw std::invalid_argument("sim config: t_end must be nonnegative");
    if (snapshot_stride < 0) throw std::invalid_argument("sim config: snapshot stride must be >= 0");
    if (threads < 1) throw std::invalid_argument("sim config: threads must be >= 1");
    if (stop.kind == StoppingRule::Kind::gamma_l1_below && !(stop.tol > 0.0))
      throw std::invalid_argument("sim config: stopping tolerance must be positive");
    if (stop.kind == StoppingRule::Kind::min_u_above && !std::isfinite(stop.threshold))
      throw std::invalid_argument("sim config: stopping threshold must be finite");
    graph.validate();
  }
};

// Margin that keeps the convolution's reach strictly inside the box.
inline index_t default_guard_margin(const DiscreteKernel& k) {
  index_t by_radius = static_cast<index_t>(std::ceil(k.radius / k.h - 1e-9));
  return std::max(k.m, by_radius);
}

inline double default_gamma_stop_tol(const Field& f) { return 1e-8 * (1.0 + l1_norm(f)); }

namespace detail {

inline void check_support_guard(const Field& u, const GraphSpec& graph, index_t margin, double eps) {
  const Grid& g = u.grid;
  auto hot = [&](index_t node) { return std::fabs(graph(u[node])) > eps; };
  if (g.dim == 1) {
    const index_t n = g.shape[0];
    for (index_t i = 0; i < std::min(margin, n); ++i)
      if (hot(i) || hot(n - 1 - i))
        throw std::runtime_error("domain too small: support reached boundary margin");
  } else {
    const index_t nx = g.shape[0], ny = g.shape[1];
    for (index_t ix = 0; ix < nx; ++ix)
      for (index_t iy = 0; iy < ny; ++iy) {
        bool near = ix < margin || iy < margin || ix >= nx - margin || iy >= ny - margin;
        if (near && hot(g.flat(ix, iy)))
          throw std::runtime_error("domain too small: support reached boundary margin");
      }
  }
}

}  // namespace detail

// One explicit Euler step u + dt*(J*G(u) - G(u)). The guard rejects states
// whose temperature support has reached the boundary margin before any mass
// can leak through the zero extension.
inline Field step_explicit(const Field& u, const DiscreteKernel& kernel, const GraphSpec& graph,
                           double dt, index_t guard_margin = -1, double eps = -1.0,
                           int threads = 1) {
  if (!(dt > 0.0) || dt > kMaxStableDt)
    throw std::invalid_argument("step_explicit: dt must lie in (0, 0.5]");
  if (guard_margin < 0) guard_margin = default_guard_margin(kernel);
  if (eps < 0.0) eps = default_support_eps(u);
  detail::check_support_guard(u, graph, guard_margin, eps);

  Field v = apply_graph(u, graph);
  Field conv = convolve(kernel, v, threads);
  Field out(u.grid);
  for (size_t i = 0; i < u.values.size(); ++i)
    out.values[i] = u.values[i] + dt * (conv.values[i] - v.values[i]);
  return out;
}

struct DiagRow {
  double t = 0.0;
  double mass = 0.0;
  double linf = 0.0;
  double l1_gamma = 0.0;
  double min_u = 0.0;
  index_t supp_plus = 0;     // nodes with G(u) > eps
  index_t supp_minus = 0;    // nodes with G(u) < -eps
  double supp_radius = 0.0;  // max node radius with |G(u)| > eps
};

struct Trajectory {
  Grid grid;
  SimConfig config;
  DiscreteKernel kernel;
  double support_eps = 0.0;

  std::vector<double> snap_times;
  std::vector<Field> snapshots;  // enthalpy u at snap_times
  std::vector<Field> w_snaps;    // accumulated potential w at snap_times
  std::vector<DiagRow> rows;     // one per step, including the initial state

  enum class StopReason { horizon, rule_fired };
  StopReason stop_reason = StopReason::horizon;

  const Field& initial() const { return snapshots.front(); }
  const Field& final_u() const { return snapshots.back(); }
  const Field& final_w() const { return w_snaps.back(); }
  double final_time() const { return snap_times.back(); }
};

namespace detail {

inline DiagRow make_row(double t, const Field& u, const GraphSpec& graph, double eps) {
  DiagRow r;
  r.t = t;
  double sum = 0.0, g1 = 0.0, linf = 0.0, rad = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  index_t np = 0, nm = 0;
  for (index_t i = 0; i < u.grid.node_count(); ++i) {
    double x = u.values[static_cast<std::size_t>(i)];
    sum += x;
    double a = std::fabs(x);
    if (a > linf) linf = a;
    if (x < mn) mn = x;
    double gv = graph(x);
    g1 += std::fabs(gv);
    if (gv > eps || gv < -eps) {
      if (gv > eps) ++np;
      else ++nm;
      double nr = u.grid.radius(i);
      if (nr > rad) rad = nr;
    }
  }
  r.mass = u.grid.cell_volume() * sum;
  r.linf = linf;
  r.l1_gamma = u.grid.cell_volume() * g1;
  r.min_u = mn;
  r.supp_plus = np;
  r.supp_minus = nm;
  r.supp_radius = rad;
  return r;
}

inline Trajectory integrate_impl(const Field& f, const SimConfig& cfg) {
  cfg.validate();
  f.grid.validate();

  Trajectory traj;
  traj.grid = f.grid;
  traj.config = cfg;
  traj.kernel = build_kernel(cfg.kernel.profile, cfg.kernel.radius, f.grid.dim, f.grid.h);

  index_t margin = cfg.guard_margin > 0 ? cfg.guard_margin : default_guard_margin(traj.kernel);
  if (margin < default_guard_margin(traj.kernel))
    throw std::invalid_argument("sim config: guard margin smaller than the kernel reach");
  double eps = cfg.support_eps > 0.0 ? cfg.support_eps : default_support_eps(f);
  traj.support_eps = eps;

  const double dt = cfg.dt;
  const index_t max_steps = static_cast<index_t>(std::floor(cfg.t_end / dt + 1e-9));

  Field u = f;
  Field w(f.grid);
  index_t k = 0;
  bool fired = false;

  DiagRow row0 = make_row(0.0, u, cfg.graph, eps);
  if (!std::isfinite(row0.mass) || !std::isfinite(row0.linf))
    throw std::runtime_error("blow-up: reduce dt");
  traj.rows.push_back(row0);
  traj.snap_times.push_back(0.0);
  traj.snapshots.push_back(u);
  traj.w_snaps.push_back(w);

  auto rule_fires = [&]() {
    const DiagRow& r = traj.rows.back();
    switch (cfg.stop.kind) {
      case StoppingRule::Kind::gamma_l1_below: return r.l1_gamma < cfg.stop.tol;
      case StoppingRule::Kind::min_u_above: return r.min_u >= cfg.stop.threshold;
      default: return false;
    }
  };

  while (true) {
    if (rule_fires()) {
      fired = true;
      break;
    }
    if (k >= max_steps) break;

    detail::check_support_guard(u, cfg.graph, margin, eps);
    Field v = apply_graph(u, cfg.graph);
    Field conv = convolve(traj.kernel, v, cfg.threads);
    for (size_t i = 0; i < u.values.size(); ++i) {
      w.values[i] += dt * v.values[i];
      u.values[i] += dt * (conv.values[i] - v.values[i]);
    }
    ++k;
    double t = dt * static_cast<double>(k);

    DiagRow row = make_row(t, u, cfg.graph, eps);
    if (!std::isfinite(row.mass) || !std::isfinite(row.linf) || !std::isfinite(row.l1_gamma))
      throw std::runtime_error("blow-up: reduce dt");
    traj.rows.push_back(row);

    if (cfg.snapshot_stride > 0 && k % cfg.snapshot_stride == 0) {
      traj.snap_times.push_back(t);
      traj.snapshots.push_back(u);
      traj.w_snaps.push_back(w);
    }
  }

  double t_final = dt * static_cast<double>(k);
  if (traj.snap_times.back() != t_final) {
    traj.snap_times.push_back(t_final);
    traj.snapshots.push_back(u);
    traj.w_snaps.push_back(w);
  }
  traj.stop_reason = fired ? Trajectory::StopReason::rule_fired : Trajectory::StopReason::horizon;
  return traj;
}

}  // namespace detail

inline Trajectory integrate(const Field& f, const SimConfig& cfg) {
  return detail::integrate_impl(f, cfg);
}

// One-phase dynamics: same engine with the (s-1)_+ branch. For nonnegative
// data the two-phase graph coincides with it, so the trajectories are
// bitwise identical; the restriction is enforced so callers cannot feed
// signed data into one-phase-only theory.
inline Trajectory integrate_one_phase(const Field& f, const SimConfig& cfg) {
  if (min_value(f) < 0.0)
    throw std::invalid_argument("integrate_one_phase: initial data must be nonnegative");
  SimConfig c = cfg;
  c.graph = GraphSpec::one_phase();
  return detail::integrate_impl(f, c);
}

inline Trajectory integrate_regularized(const Field& f, const SimConfig& cfg, int n) {
  SimConfig c = cfg;
  c.graph = GraphSpec::regularized(n);
  return detail::integrate_impl(f, c);
}

// Fixed-point solution of u(t) = f + int_0^t (J*G(u) - G(u)) ds on [0, t0],
// t0 < 1/2, via Picard iteration on an inner trapezoid mesh. Independent of
// the Euler stepper: no CFL structure, no per-step truncation; agreement
// between the two is a genuine cross-check.
struct PicardResult {
  Field u;                       // state at t0
  int sweeps = 0;
  std::vector<double> errors;    // sup-over-mesh L1 update distance per sweep

  // Largest successive-error ratio observed while updates are well above the
  // convergence floor; the contraction factor of the exact map is 2*t0.
  double max_contraction_ratio(double floor_tol) const {
    double r = 0.0;
    for (size_t i = 0; i + 1 < errors.size(); ++i)
      if (errors[i] > floor_tol && errors[i + 1] > floor_tol)
        r = std::max(r, errors[i + 1] / errors[i]);
    return r;
  }
};

inline PicardResult picard_solve(const Field& f, const DiscreteKernel& kernel,
                                 const GraphSpec& graph, double t0, double tol,
                                 index_t mesh_steps = 64) {
  if (!(t0 > 0.0) || !(t0 < 0.5))
    throw std::invalid_argument("picard_solve: requires 0 < t0 < 1/2");
  if (!(tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
  if (mesh_steps < 4) throw std::invalid_argument("picard_solve: need at least 4 mesh steps");

  const double delta = t0 / static_cast<double>(mesh_steps);
  const size_t M = static_cast<size_t>(mesh_steps);
  std::vector<Field> u(M + 1, f);
  std::vector<Field> g(M + 1, Field(f.grid));

  PicardResult res;
  const int max_sweeps = 200;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (size_t j = 0; j <= M; ++j) {
      Field v = apply_graph(u[j], graph);
      Field conv = convolve(kernel, v);
      for (size_t i = 0; i < v.values.size(); ++i) g[j].values[i] = conv.values[i] - v.values[i];
    }
    // cumulative trapezoid of g along the mesh
    double err = 0.0;
    Field acc(f.grid);
    Field next = f;  // j = 0: integral is empty
    err = std::max(err, l1_distance(next, u[0]));
    u[0] = next;
    for (size_t j = 1; j <= M; ++j) {
      for (size_t i = 0; i < acc.values.size(); ++i)
        acc.values[i] += 0.5 * delta * (g[j - 1].values[i] + g[j].values[i]);
      Field cand = axpy(f, 1.0, acc);
      err = std::max(err, l1_distance(cand, u[j]));
      u[j] = cand;
    }
    res.errors.push_back(err);
    res.sweeps = sweep;
    if (err < tol) {
      res.u = u[M];
      return res;
    }
  }
  throw std::runtime_error("picard_solve: no convergence within 200 sweeps");
}

}  // namespace nlstefan

#endif

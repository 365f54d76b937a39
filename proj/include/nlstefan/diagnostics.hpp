#ifndef NLSTEFAN_DIAGNOSTICS_HPP
#define NLSTEFAN_DIAGNOSTICS_HPP

// Structural invariants of the flow, phrased as checkable predicates over
// recorded trajectories. Every check is a pure function of its inputs and
// reports violations rather than throwing; empty violation list means pass.
//
// Discrete facts the tolerances rely on (all for dt <= 0.5, guarded domain):
//   mass:        exactly conserved by kernel symmetry; roundoff only.
//   L-inf:       ||u(t)||_inf <= ||f||_inf exactly.
//   L1:          ||u1(t) - u2(t)||_1 and the positive-part gap nonincreasing
//                exactly; slack absorbs roundoff.
//   supports:    one kernel radius of growth per t0 = 1/c0 of elapsed time;
//                the node dilation dominates the step reach.
//   retention:   strict positivity of each signed temperature part is never
//                lost where the phase is undisturbed; quantitatively
//                v(t) >= e^{-(t-s)} v(s) minus an O(dt) deficit.
//   subcaloric:  chi' <= J*chi - chi holds stepwise with zero truncation
//                constant for chi in {G(u)+, G(u)-, |G(u)|}.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlstefan/evolution.hpp"
#include "nlstefan/grid.hpp"
#include "nlstefan/kernel.hpp"

namespace nlstefan {

struct Violation {
  double t = 0.0;
  index_t node = -1;
  double lhs = 0.0;  // offending quantity
  double rhs = 0.0;  // bound it had to satisfy
};

struct CheckReport {
  std::string check;
  bool pass = true;
  std::vector<Violation> violations;
  std::size_t points_checked = 0;

  static constexpr std::size_t kMaxRecorded = 64;

  void flag(double t, index_t node, double lhs, double rhs) {
    pass = false;
    if (violations.size() < kMaxRecorded) violations.push_back({t, node, lhs, rhs});
  }
};

// Envelope for support growth: starting from the support of f, the
// temperature support gains at most one kernel radius per t0 = 1/c0 of
// elapsed time, c0 = (sup J) * ||G(f)||_1.
struct SupportBound {
  bool stationary = false;  // G(f) == 0: supports never move
  double c0 = 0.0;
  double t0 = 0.0;
  double r_j = 0.0;
  SupportMask base;

  index_t n_of(double t) const {
    if (stationary) return 0;
    return static_cast<index_t>(std::floor(t / t0 + 1e-12)) + 1;
  }
};

inline SupportBound support_bound(const Field& f, const DiscreteKernel& kernel,
                                  const GraphSpec& graph = GraphSpec::canonical(),
                                  double eps = -1.0) {
  if (eps < 0.0) eps = default_support_eps(f);
  SupportBound b;
  b.r_j = kernel.radius;
  b.base = support_mask(f, eps);
  Field g = apply_graph(f, graph);
  double gmass = l1_norm(g);
  if (gmass == 0.0) {
    b.stationary = true;
    return b;
  }
  b.c0 = kernel_sup(kernel) * gmass;
  b.t0 = 1.0 / b.c0;
  return b;
}

namespace detail {

inline double dist_to_mask(const SupportMask& mask, index_t node) {
  SupportMask single(mask.grid);
  single.set(node);
  return set_distance(single, mask);
}

}  // namespace detail

// Snapshot masks of u and G(u) must stay inside the dilated initial mask,
// with one extra kernel radius allowed for u (enthalpy spreads one reach
// ahead of the temperature).
inline CheckReport check_support_growth(const Trajectory& traj, const SupportBound& bound,
                                        double eps = -1.0) {
  if (eps < 0.0) eps = traj.support_eps;
  CheckReport rep;
  rep.check = "support_growth";

  std::map<index_t, SupportMask> dilated;  // by ball count, reused across snapshots
  auto envelope = [&](index_t n) -> const SupportMask& {
    auto it = dilated.find(n);
    if (it == dilated.end())
      it = dilated.emplace(n, dilate(bound.base, static_cast<double>(n) * bound.r_j)).first;
    return it->second;
  };

  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    double t = traj.snap_times[s];
    const Field& u = traj.snapshots[s];
    index_t n_u = bound.stationary ? 0 : bound.n_of(t);
    index_t n_g = bound.stationary ? 0 : n_u - 1;

    SupportMask mu = support_mask(u, eps);
    SupportMask mg = support_mask(apply_graph(u, traj.config.graph), eps);
    const SupportMask& env_u = envelope(n_u);
    const SupportMask& env_g = envelope(n_g);
    for (index_t node = 0; node < u.grid.node_count(); ++node) {
      ++rep.points_checked;
      if (mu.contains(node) && !env_u.contains(node))
        rep.flag(t, node, detail::dist_to_mask(bound.base, node),
                 static_cast<double>(n_u) * bound.r_j);
      if (mg.contains(node) && !env_g.contains(node))
        rep.flag(t, node, detail::dist_to_mask(bound.base, node),
                 static_cast<double>(n_g) * bound.r_j);
    }
  }
  return rep;
}

// Retention across consecutive snapshots. Two layers:
//   1. positivity: a node whose positive temperature exceeded eps cannot drop
//      to zero (exact for the scheme); same for the negative part.
//   2. quantitative: v+(x,t) >= e^{-(t-s)} v+(x,s) - tol at nodes where J*v
//      is nonnegative at both snapshot ends (the phase is undisturbed there);
//      mirrored for v- where J*v <= 0. tol = 1e-8 + 2 dt ||v(s)||_inf.
inline CheckReport check_retention(const Trajectory& traj, double eps = -1.0) {
  if (eps < 0.0) eps = traj.support_eps;
  CheckReport rep;
  rep.check = "retention";
  const double dt = traj.config.dt;

  for (std::size_t s = 0; s + 1 < traj.snapshots.size(); ++s) {
    double ts = traj.snap_times[s], tt = traj.snap_times[s + 1];
    double decay = std::exp(-(tt - ts));
    Field vs = apply_graph(traj.snapshots[s], traj.config.graph);
    Field vt = apply_graph(traj.snapshots[s + 1], traj.config.graph);
    Field cs = convolve(traj.kernel, vs);
    Field ct = convolve(traj.kernel, vt);
    double tol = 1e-8 + 2.0 * dt * linf_norm(vs);

    for (index_t node = 0; node < vs.grid.node_count(); ++node) {
      ++rep.points_checked;
      double a = vs[node], b = vt[node];
      double ap = a > 0.0 ? a : 0.0, bp = b > 0.0 ? b : 0.0;
      double am = a < 0.0 ? -a : 0.0, bm = b < 0.0 ? -b : 0.0;
      if (ap > eps && bp <= 0.0 && bp < decay * ap - tol) rep.flag(tt, node, bp, decay * ap - tol);
      if (am > eps && bm <= 0.0 && bm < decay * am - tol) rep.flag(tt, node, -bm, -(decay * am - tol));
      if (cs[node] >= 0.0 && ct[node] >= 0.0 && bp < decay * ap - tol)
        rep.flag(tt, node, bp, decay * ap - tol);
      if (cs[node] <= 0.0 && ct[node] <= 0.0 && bm < decay * am - tol)
        rep.flag(tt, node, -bm, -(decay * am - tol));
    }
  }
  return rep;
}

struct ContractionSeries {
  std::vector<double> times;
  std::vector<double> l1;       // ||u1(t) - u2(t)||_1
  std::vector<double> pos_gap;  // integral of (u1(t) - u2(t))+
};

inline ContractionSeries monitor_contraction(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid) || a.snap_times.size() != b.snap_times.size())
    throw std::invalid_argument("contraction monitor requires aligned trajectories");
  ContractionSeries s;
  for (std::size_t k = 0; k < a.snap_times.size(); ++k) {
    if (std::fabs(a.snap_times[k] - b.snap_times[k]) > 1e-12)
      throw std::invalid_argument("contraction monitor requires aligned trajectories");
    s.times.push_back(a.snap_times[k]);
    s.l1.push_back(l1_distance(a.snapshots[k], b.snapshots[k]));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.snapshots[k].values.size(); ++i) {
      double d = a.snapshots[k].values[i] - b.snapshots[k].values[i];
      if (d > 0.0) acc += d;
    }
    s.pos_gap.push_back(a.grid.cell_volume() * acc);
  }
  return s;
}

inline CheckReport check_contraction(const Trajectory& a, const Trajectory& b,
                                     double slack = 1e-10) {
  ContractionSeries s = monitor_contraction(a, b);
  CheckReport rep;
  rep.check = "l1_contraction";
  for (std::size_t k = 1; k < s.times.size(); ++k) {
    ++rep.points_checked;
    if (s.l1[k] > s.l1[k - 1] + slack) rep.flag(s.times[k], -1, s.l1[k], s.l1[k - 1] + slack);
    if (s.pos_gap[k] > s.pos_gap[k - 1] + slack)
      rep.flag(s.times[k], -1, s.pos_gap[k], s.pos_gap[k - 1] + slack);
    if (s.l1[k] > s.l1[0] + slack) rep.flag(s.times[k], -1, s.l1[k], s.l1[0] + slack);
  }
  return rep;
}

inline CheckReport check_conservation(const Trajectory& traj, double rel_tol = 1e-11) {
  CheckReport rep;
  rep.check = "conservation";
  double m0 = traj.rows.front().mass;
  double scale = std::max(1.0, std::fabs(m0));
  for (const DiagRow& r : traj.rows) {
    ++rep.points_checked;
    if (std::fabs(r.mass - m0) > rel_tol * scale)
      rep.flag(r.t, -1, std::fabs(r.mass - m0), rel_tol * scale);
  }
  return rep;
}

inline CheckReport check_linf_bound(const Trajectory& traj, double tol = 1e-12) {
  CheckReport rep;
  rep.check = "linf_bound";
  double b0 = traj.rows.front().linf;
  for (const DiagRow& r : traj.rows) {
    ++rep.points_checked;
    if (r.linf > b0 + tol) rep.flag(r.t, -1, r.linf, b0 + tol);
  }
  return rep;
}

// Stepwise subcaloric inequality (chi_{k+1} - chi_k)/dt <= J*chi_k - chi_k
// + C dt for chi in {G(u)+, G(u)-, |G(u)|}. C = 0 is exact for this scheme;
// tol absorbs roundoff only. Needs per-step snapshots.
inline CheckReport check_subcaloric(const Trajectory& traj, double c = 0.0, double tol = -1.0) {
  if (traj.config.snapshot_stride != 1)
    throw std::invalid_argument("subcaloric check needs per-step snapshots");
  CheckReport rep;
  rep.check = "subcaloric";
  const double dt = traj.config.dt;
  if (tol < 0.0) tol = 1e-12 * (1.0 + traj.rows.front().linf);

  for (std::size_t s = 0; s + 1 < traj.snapshots.size(); ++s) {
    Field va = apply_graph(traj.snapshots[s], traj.config.graph);
    Field vb = apply_graph(traj.snapshots[s + 1], traj.config.graph);
    Field pa = positive_part(va), ma = negative_part(va);
    Field pb = positive_part(vb), mb = negative_part(vb);
    Field cp = convolve(traj.kernel, pa);
    Field cm = convolve(traj.kernel, ma);
    double t = traj.snap_times[s + 1];
    for (index_t i = 0; i < va.grid.node_count(); ++i) {
      ++rep.points_checked;
      double bp = cp[i] - pa[i] + c * dt + tol;
      double bm = cm[i] - ma[i] + c * dt + tol;
      if ((pb[i] - pa[i]) / dt > bp) rep.flag(t, i, (pb[i] - pa[i]) / dt, bp);
      if ((mb[i] - ma[i]) / dt > bm) rep.flag(t, i, (mb[i] - ma[i]) / dt, bm);
      double abs_rate = (pb[i] + mb[i] - pa[i] - ma[i]) / dt;
      if (abs_rate > bp + bm) rep.flag(t, i, abs_rate, bp + bm);
    }
  }
  return rep;
}

// Nodewise sandwich -U-(t) <= u(t) <= U+(t) against the one-phase envelopes
// run from the split data f+ and f-; exact for the scheme up to roundoff.
inline CheckReport check_comparison_sandwich(const Trajectory& traj, const Trajectory& up,
                                             const Trajectory& um, double tol = 1e-10) {
  if (!(traj.grid == up.grid) || !(traj.grid == um.grid) ||
      traj.snap_times.size() != up.snap_times.size() ||
      traj.snap_times.size() != um.snap_times.size())
    throw std::invalid_argument("comparison sandwich requires aligned trajectories");
  CheckReport rep;
  rep.check = "comparison_sandwich";
  for (std::size_t k = 0; k < traj.snap_times.size(); ++k) {
    const Field& u = traj.snapshots[k];
    const Field& hi = up.snapshots[k];
    const Field& lo = um.snapshots[k];
    for (index_t i = 0; i < u.grid.node_count(); ++i) {
      ++rep.points_checked;
      if (u[i] > hi[i] + tol) rep.flag(traj.snap_times[k], i, u[i], hi[i] + tol);
      if (u[i] < -lo[i] - tol) rep.flag(traj.snap_times[k], i, u[i], -lo[i] - tol);
    }
  }
  return rep;
}

// Half-width of a centered box large enough that the support guard cannot
// trip before t_end: initial radius, plus the growth envelope, plus one
// kernel radius of guard margin and one of headroom.
inline double required_halfwidth(const Field& f, const DiscreteKernel& kernel, double t_end,
                                 const GraphSpec& graph = GraphSpec::canonical(),
                                 double eps = -1.0) {
  if (eps < 0.0) eps = default_support_eps(f);
  SupportMask m = support_mask(f, eps);
  double r0 = m.empty() ? 0.0 : m.max_radius();
  SupportBound b = support_bound(f, kernel, graph, eps);
  if (b.stationary) return r0 + kernel.radius + 2.0 * f.grid.h;
  double n = static_cast<double>(b.n_of(t_end));
  return r0 + (n + 1.0) * kernel.radius + 2.0 * f.grid.h;
}

}  // namespace nlstefan

#endif

#ifndef NLSTEFAN_GRAPH_HPP
#define NLSTEFAN_GRAPH_HPP

// Enthalpy-temperature graphs: the canonical two-phase graph
// sign(u)(|u|-1)_+, its one-phase restriction, the general piecewise-linear
// family with mushy interval [e1, e2] and per-phase slopes, and the Lipschitz
// regularization indexed by n.

#include <cmath>
#include <stdexcept>

#include "nlstefan/grid.hpp"

namespace nlstefan {

// sign(s)(|s|-1)_+
inline double gamma(double s) {
  double a = std::fabs(s) - 1.0;
  if (a <= 0.0) return 0.0;
  return s < 0.0 ? -a : a;
}

// (s-1)_+, the one-phase branch; valid for nonnegative enthalpy.
inline double gamma_one_phase(double s) {
  double a = s - 1.0;
  return a > 0.0 ? a : 0.0;
}

struct GraphParams {
  double e1 = -1.0;  // mushy interval lower end, e1 < 0
  double e2 = 1.0;   // mushy interval upper end, e2 > 0
  double c1 = 1.0;   // slope below e1
  double c2 = 1.0;   // slope above e2

  void validate() const {
    if (!(e1 < 0.0) || !(e2 > 0.0))
      throw std::invalid_argument("graph params: mushy interval must straddle 0 (e1 < 0 < e2)");
    if (!(c1 > 0.0) || !(c2 > 0.0))
      throw std::invalid_argument("graph params: slopes must be positive");
  }
};

inline double gamma_general(double u, const GraphParams& p) {
  if (u < p.e1) return p.c1 * (u - p.e1);
  if (u > p.e2) return p.c2 * (u - p.e2);
  return 0.0;
}

// Lipschitz regularization: affine outer branches shifted by 1, a strictly
// increasing middle branch of slope 1/(n+1). The three branches meet at
// +-(n+1)/n with common value +-1/n, and sup |gamma_n - gamma| = 1/(n+1).
inline double gamma_n(double s, int n) {
  if (n < 1) throw std::invalid_argument("gamma_n: n must be a positive integer");
  double thr = (static_cast<double>(n) + 1.0) / static_cast<double>(n);
  if (s < -thr) return s + 1.0;
  if (s > thr) return s - 1.0;
  return s / (static_cast<double>(n) + 1.0);
}

// Per-phase affine change of units that carries gamma_general onto the
// canonical graph: enthalpy is shifted so each phase boundary lands at +-1
// (the mushy interval is mapped affinely onto [-1, 1]); temperature is
// divided by the phase slope.
struct UnitChange {
  GraphParams p;

  double to_canonical(double u) const {
    if (u > p.e2) return (u - p.e2) + 1.0;
    if (u < p.e1) return (u - p.e1) - 1.0;
    return -1.0 + 2.0 * (u - p.e1) / (p.e2 - p.e1);
  }
  double from_canonical(double s) const {
    if (s > 1.0) return p.e2 + (s - 1.0);
    if (s < -1.0) return p.e1 + (s + 1.0);
    return p.e1 + (s + 1.0) * (p.e2 - p.e1) / 2.0;
  }
  // gamma_general(u, p) == temperature_scale(to_canonical(u)) * gamma(to_canonical(u))
  double temperature_scale(double s) const { return s >= 0.0 ? p.c2 : p.c1; }
};

inline UnitChange normalize_units(const GraphParams& p) {
  p.validate();
  return UnitChange{p};
}

// Runtime-selected graph used by the evolution code.
struct GraphSpec {
  enum class Kind { canonical, one_phase, general, regularized };
  Kind kind = Kind::canonical;
  GraphParams params{};  // general only
  int n = 1;             // regularized only

  double operator()(double s) const {
    switch (kind) {
      case Kind::canonical: return gamma(s);
      case Kind::one_phase: return gamma_one_phase(s);
      case Kind::general: return gamma_general(s, params);
      case Kind::regularized: return gamma_n(s, n);
    }
    return 0.0;
  }

  void validate() const {
    if (kind == Kind::general) params.validate();
    if (kind == Kind::regularized && n < 1)
      throw std::invalid_argument("graph spec: regularization index must be >= 1");
  }

  static GraphSpec canonical() { return GraphSpec{}; }
  static GraphSpec one_phase() { return GraphSpec{Kind::one_phase, {}, 1}; }
  static GraphSpec general(const GraphParams& p) { return GraphSpec{Kind::general, p, 1}; }
  static GraphSpec regularized(int n) { return GraphSpec{Kind::regularized, {}, n}; }
};

inline Field apply_graph(const Field& f, const GraphSpec& g) {
  Field out(f.grid);
  for (size_t i = 0; i < f.values.size(); ++i) out.values[i] = g(f.values[i]);
  return out;
}

}  // namespace nlstefan

#endif

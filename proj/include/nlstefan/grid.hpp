#ifndef NLSTEFAN_GRID_HPP
#define NLSTEFAN_GRID_HPP

// Uniform grids on axis-aligned boxes in one or two dimensions, dense nodal
// fields, and the integral / distance / support primitives everything else
// builds on.
//
// Conventions pinned here and relied on throughout:
//   * integrals and norms are plain node sums scaled by h^dim, accumulated in
//     ascending node index, so results are bit-reproducible;
//   * support masks use a strict threshold |value| > eps;
//   * fields are zero outside their box (consumers that reach past the
//     boundary read zeros).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlstefan {

using index_t = std::int64_t;

struct Grid {
  int dim = 1;
  std::array<index_t, 2> shape{0, 1};  // nodes per axis; shape[1] == 1 in 1D
  double h = 1.0;                      // spacing, shared by both axes
  std::array<double, 2> origin{0.0, 0.0};  // coordinate of node (0[,0])

  static Grid make_1d(index_t n, double h, double origin0) {
    Grid g;
    g.dim = 1;
    g.shape = {n, 1};
    g.h = h;
    g.origin = {origin0, 0.0};
    g.validate();
    return g;
  }

  static Grid make_2d(index_t nx, index_t ny, double h, double ox, double oy) {
    Grid g;
    g.dim = 2;
    g.shape = {nx, ny};
    g.h = h;
    g.origin = {ox, oy};
    g.validate();
    return g;
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid: dim must be 1 or 2");
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid: spacing must be positive");
    if (shape[0] < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
    if (dim == 2 && shape[1] < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
    if (dim == 1 && shape[1] != 1) throw std::invalid_argument("grid: 1D grids must have shape[1] == 1");
  }

  index_t node_count() const { return shape[0] * shape[1]; }

  double cell_volume() const { return dim == 1 ? h : h * h; }

  index_t flat(index_t ix, index_t iy = 0) const { return ix * shape[1] + iy; }
  index_t ix_of(index_t node) const { return node / shape[1]; }
  index_t iy_of(index_t node) const { return node % shape[1]; }

  double coord(index_t node, int axis) const {
    index_t i = axis == 0 ? ix_of(node) : iy_of(node);
    return origin[axis] + static_cast<double>(i) * h;
  }

  // Euclidean norm of the node's coordinate vector.
  double radius(index_t node) const {
    double x = coord(node, 0);
    if (dim == 1) return std::fabs(x);
    double y = coord(node, 1);
    return std::hypot(x, y);
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && shape == o.shape && h == o.h && origin == o.origin;
  }
};

struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), values(static_cast<size_t>(g.node_count()), 0.0) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<index_t>(values.size()) != g.node_count())
      throw std::invalid_argument("field: value count does not match grid");
  }

  double& operator[](index_t i) { return values[static_cast<size_t>(i)]; }
  double operator[](index_t i) const { return values[static_cast<size_t>(i)]; }
  index_t size() const { return static_cast<index_t>(values.size()); }
};

inline void require_same_grid(const Field& a, const Field& b, const char* what) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

// h^dim-weighted node sum, ascending index.
inline double integral(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return f.grid.cell_volume() * s;
}

inline double l1_norm(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += std::fabs(v);
  return f.grid.cell_volume() * s;
}

inline double l1_distance(const Field& a, const Field& b) {
  require_same_grid(a, b, "l1_distance");
  double s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) s += std::fabs(a.values[i] - b.values[i]);
  return a.grid.cell_volume() * s;
}

inline double linf_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::fabs(v));
  return m;
}

inline double min_value(const Field& f) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : f.values) m = std::min(m, v);
  return m;
}

inline double max_value(const Field& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : f.values) m = std::max(m, v);
  return m;
}

inline Field positive_part(const Field& f) {
  Field out(f.grid);
  for (size_t i = 0; i < f.values.size(); ++i) out.values[i] = f.values[i] > 0.0 ? f.values[i] : 0.0;
  return out;
}

inline Field negative_part(const Field& f) {  // nonnegative: (-f)_+
  Field out(f.grid);
  for (size_t i = 0; i < f.values.size(); ++i) out.values[i] = f.values[i] < 0.0 ? -f.values[i] : 0.0;
  return out;
}

// a + s*b
inline Field axpy(const Field& a, double s, const Field& b) {
  require_same_grid(a, b, "axpy");
  Field out(a.grid);
  for (size_t i = 0; i < a.values.size(); ++i) out.values[i] = a.values[i] + s * b.values[i];
  return out;
}

// Default support threshold: proportional to the field's sup norm, floored at
// the scale of 1 so mushy-range data keeps a sane threshold.
inline double default_support_eps(const Field& f) {
  return 1e-10 * std::max(1.0, linf_norm(f));
}

struct SupportMask {
  Grid grid;
  std::vector<std::uint8_t> bits;

  SupportMask() = default;
  explicit SupportMask(const Grid& g) : grid(g), bits(static_cast<size_t>(g.node_count()), 0) {}

  bool contains(index_t node) const { return bits[static_cast<size_t>(node)] != 0; }
  void set(index_t node) { bits[static_cast<size_t>(node)] = 1; }

  index_t count() const {
    index_t c = 0;
    for (auto b : bits) c += b;
    return c;
  }
  bool empty() const { return count() == 0; }

  std::vector<index_t> nodes() const {
    std::vector<index_t> out;
    for (size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) out.push_back(static_cast<index_t>(i));
    return out;
  }

  // Largest Euclidean coordinate norm over member nodes; 0 for the empty set.
  double max_radius() const {
    double r = 0.0;
    for (size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) r = std::max(r, grid.radius(static_cast<index_t>(i)));
    return r;
  }
};

inline SupportMask support_mask(const Field& f, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("support_mask: eps must be positive");
  SupportMask m(f.grid);
  for (size_t i = 0; i < f.values.size(); ++i)
    if (std::fabs(f.values[i]) > eps) m.bits[i] = 1;
  return m;
}

inline SupportMask support_mask(const Field& f) { return support_mask(f, default_support_eps(f)); }

// Dilation by the closed ball of the given radius (in coordinate length).
// The node radius is rounded up, so the dilated set always contains the true
// continuum ball; containment checks built on this stay conservative.
inline SupportMask dilate(const SupportMask& m, double radius_len) {
  if (radius_len < 0.0) throw std::invalid_argument("dilate: radius must be nonnegative");
  index_t rn = static_cast<index_t>(std::ceil(radius_len / m.grid.h - 1e-12));
  if (rn < 0) rn = 0;
  SupportMask out(m.grid);
  const index_t nx = m.grid.shape[0], ny = m.grid.shape[1];
  if (m.grid.dim == 1) {
    for (index_t i = 0; i < nx; ++i) {
      if (!m.bits[static_cast<size_t>(i)]) continue;
      index_t lo = std::max<index_t>(0, i - rn), hi = std::min(nx - 1, i + rn);
      for (index_t j = lo; j <= hi; ++j) out.bits[static_cast<size_t>(j)] = 1;
    }
  } else {
    const index_t r2 = rn * rn;
    for (index_t ix = 0; ix < nx; ++ix)
      for (index_t iy = 0; iy < ny; ++iy) {
        if (!m.bits[static_cast<size_t>(m.grid.flat(ix, iy))]) continue;
        index_t xlo = std::max<index_t>(0, ix - rn), xhi = std::min(nx - 1, ix + rn);
        for (index_t jx = xlo; jx <= xhi; ++jx) {
          index_t dx = jx - ix;
          index_t span2 = r2 - dx * dx;
          if (span2 < 0) continue;
          index_t span = static_cast<index_t>(std::floor(std::sqrt(static_cast<double>(span2)) + 1e-9));
          index_t ylo = std::max<index_t>(0, iy - span), yhi = std::min(ny - 1, iy + span);
          for (index_t jy = ylo; jy <= yhi; ++jy) out.bits[static_cast<size_t>(out.grid.flat(jx, jy))] = 1;
        }
      }
  }
  return out;
}

inline bool is_subset(const SupportMask& a, const SupportMask& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("is_subset: masks live on different grids");
  for (size_t i = 0; i < a.bits.size(); ++i)
    if (a.bits[i] && !b.bits[i]) return false;
  return true;
}

// Minimal Euclidean distance between node coordinates of two sets; +inf if
// either set is empty. Each mask supplies its own coordinates, so the sets
// may live on different grids.
inline double set_distance(const SupportMask& a, const SupportMask& b) {
  std::vector<index_t> na = a.nodes(), nb = b.nodes();
  if (na.empty() || nb.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (index_t i : na) {
    double ax = a.grid.coord(i, 0), ay = a.grid.dim == 2 ? a.grid.coord(i, 1) : 0.0;
    for (index_t j : nb) {
      double dx = ax - b.grid.coord(j, 0);
      double dy = ay - (b.grid.dim == 2 ? b.grid.coord(j, 1) : 0.0);
      double d2 = dx * dx + dy * dy;
      if (d2 < best * best) best = std::sqrt(d2);
    }
  }
  return best;
}

}  // namespace nlstefan

#endif

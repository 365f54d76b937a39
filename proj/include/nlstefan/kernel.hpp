#ifndef NLSTEFAN_KERNEL_HPP
#define NLSTEFAN_KERNEL_HPP

// Discrete convolution kernels sampled from compactly supported, radially
// nonincreasing profiles, and the zero-extension convolution built on them.
//
// Weights are profile samples at offset*h, renormalized so h^dim * sum(w) = 1
// to machine epsilon. The h^dim factor lives in the convolution sum, not in
// the stored weights, so max(w) is the discrete stand-in for sup J.

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "nlstefan/grid.hpp"

namespace nlstefan {

enum class KernelProfile { tent, poly_bump };

inline const char* profile_name(KernelProfile p) {
  return p == KernelProfile::tent ? "tent" : "poly-bump";
}

inline double profile_value(KernelProfile p, double r, double radius) {
  double s = 1.0 - r / radius;
  if (p == KernelProfile::tent) return s > 0.0 ? s : 0.0;
  double q = 1.0 - (r / radius) * (r / radius);
  return q > 0.0 ? q * q : 0.0;
}

struct DiscreteKernel {
  int dim = 1;
  double h = 1.0;
  double radius = 1.0;  // support radius R_J in coordinate length
  KernelProfile profile = KernelProfile::tent;
  index_t m = 0;               // max offset per axis with a stored weight
  std::vector<double> w;       // 1D: 2m+1 entries; 2D: (2m+1)^2 row-major

  double weight(index_t kx, index_t ky = 0) const {
    if (kx < -m || kx > m || ky < -m || ky > m) return 0.0;
    if (dim == 1) return w[static_cast<size_t>(kx + m)];
    return w[static_cast<size_t>((kx + m) * (2 * m + 1) + (ky + m))];
  }

  double cell_volume() const { return dim == 1 ? h : h * h; }
};

inline DiscreteKernel build_kernel(KernelProfile profile, double radius, int dim, double h) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("build_kernel: dim must be 1 or 2");
  if (!(h > 0.0)) throw std::invalid_argument("build_kernel: spacing must be positive");
  if (!(radius >= 2.0 * h))
    throw std::invalid_argument("kernel under-resolved: support radius must be at least 2h");

  DiscreteKernel k;
  k.dim = dim;
  k.h = h;
  k.radius = radius;
  k.profile = profile;
  index_t m = static_cast<index_t>(std::floor(radius / h + 1e-9));
  // Drop all-zero outer rings (the tent vanishes exactly at r = R_J).
  auto ring_nonzero = [&](index_t mm) {
    if (dim == 1) return profile_value(profile, mm * h, radius) > 0.0;
    for (index_t kx = -mm; kx <= mm; ++kx)
      for (index_t ky = -mm; ky <= mm; ++ky) {
        if (std::max(std::llabs(kx), std::llabs(ky)) != mm) continue;
        if (profile_value(profile, std::hypot(kx * h, ky * h), radius) > 0.0) return true;
      }
    return false;
  };
  while (m > 0 && !ring_nonzero(m)) --m;
  k.m = m;

  if (dim == 1) {
    k.w.resize(static_cast<size_t>(2 * m + 1));
    for (index_t kx = -m; kx <= m; ++kx)
      k.w[static_cast<size_t>(kx + m)] = profile_value(profile, std::fabs(kx * h), radius);
  } else {
    k.w.resize(static_cast<size_t>((2 * m + 1) * (2 * m + 1)));
    for (index_t kx = -m; kx <= m; ++kx)
      for (index_t ky = -m; ky <= m; ++ky)
        k.w[static_cast<size_t>((kx + m) * (2 * m + 1) + (ky + m))] =
            profile_value(profile, std::hypot(kx * h, ky * h), radius);
  }

  double s = 0.0;
  for (double v : k.w) s += v;
  s *= k.cell_volume();
  if (!(s > 0.0)) throw std::invalid_argument("kernel under-resolved: no interior samples");
  for (double& v : k.w) v /= s;
  return k;
}

inline double kernel_sup(const DiscreteKernel& k) {
  double m = 0.0;
  for (double v : k.w) m = std::max(m, v);
  return m;
}

// Max sampled weight over offsets within the given coordinate radius.
// Offset zero is always inside, so the result is the center weight for any
// radially nonincreasing profile.
inline double kernel_sup_ball(const DiscreteKernel& k, double radius) {
  if (radius < 0.0) throw std::invalid_argument("kernel_sup_ball: radius must be nonnegative");
  double cap = radius * (1.0 + 1e-12) + 1e-300;
  double best = 0.0;
  for (index_t kx = -k.m; kx <= k.m; ++kx) {
    if (k.dim == 1) {
      if (std::fabs(kx * k.h) <= cap) best = std::max(best, k.weight(kx));
    } else {
      for (index_t ky = -k.m; ky <= k.m; ++ky)
        if (std::hypot(kx * k.h, ky * k.h) <= cap) best = std::max(best, k.weight(kx, ky));
    }
  }
  return best;
}

namespace detail {

// Chunked parallel loop over [0, n). Work is split by index range only, so
// results never depend on the thread count.
template <class Fn>
inline void parallel_nodes(index_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2048) {
    fn(index_t{0}, n);
    return;
  }
  int t = std::min<int>(threads, 64);
  std::vector<std::thread> pool;
  index_t chunk = (n + t - 1) / t;
  for (int c = 0; c < t; ++c) {
    index_t lo = c * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// out_i = h^dim * sum_k w(k) * v_{i-k}, zero extension outside the box,
// ascending k within each node's sum.
inline Field convolve(const DiscreteKernel& k, const Field& v, int threads = 1) {
  if (k.dim != v.grid.dim) throw std::invalid_argument("convolve: kernel/field dimension mismatch");
  if (k.h != v.grid.h) throw std::invalid_argument("convolve: kernel/field spacing mismatch");
  Field out(v.grid);
  const double vol = k.cell_volume();
  const index_t m = k.m;

  if (k.dim == 1) {
    const index_t n = v.grid.shape[0];
    detail::parallel_nodes(n, threads, [&](index_t lo, index_t hi) {
      for (index_t i = lo; i < hi; ++i) {
        index_t klo = std::max(-m, i - (n - 1));
        index_t khi = std::min(m, i);
        double acc = 0.0;
        for (index_t kk = klo; kk <= khi; ++kk)
          acc += k.w[static_cast<size_t>(kk + m)] * v.values[static_cast<size_t>(i - kk)];
        out.values[static_cast<size_t>(i)] = vol * acc;
      }
    });
  } else {
    const index_t nx = v.grid.shape[0], ny = v.grid.shape[1];
    const index_t side = 2 * m + 1;
    detail::parallel_nodes(nx, threads, [&](index_t xlo, index_t xhi) {
      for (index_t ix = xlo; ix < xhi; ++ix) {
        index_t kxlo = std::max(-m, ix - (nx - 1)), kxhi = std::min(m, ix);
        for (index_t iy = 0; iy < ny; ++iy) {
          index_t kylo = std::max(-m, iy - (ny - 1)), kyhi = std::min(m, iy);
          double acc = 0.0;
          for (index_t kx = kxlo; kx <= kxhi; ++kx) {
            const double* wrow = &k.w[static_cast<size_t>((kx + m) * side + m)];
            const double* vrow = &v.values[static_cast<size_t>((ix - kx) * ny + iy)];
            for (index_t ky = kylo; ky <= kyhi; ++ky) acc += wrow[ky] * vrow[-ky];
          }
          out.values[static_cast<size_t>(ix * ny + iy)] = vol * acc;
        }
      }
    });
  }
  return out;
}

// Convolution evaluated at a single node, same summation order as convolve.
inline double convolve_at(const DiscreteKernel& k, const Field& v, index_t node) {
  const index_t m = k.m;
  double acc = 0.0;
  if (k.dim == 1) {
    const index_t n = v.grid.shape[0], i = node;
    index_t klo = std::max(-m, i - (n - 1)), khi = std::min(m, i);
    for (index_t kk = klo; kk <= khi; ++kk)
      acc += k.w[static_cast<size_t>(kk + m)] * v.values[static_cast<size_t>(i - kk)];
  } else {
    const index_t nx = v.grid.shape[0], ny = v.grid.shape[1];
    const index_t ix = v.grid.ix_of(node), iy = v.grid.iy_of(node), side = 2 * m + 1;
    index_t kxlo = std::max(-m, ix - (nx - 1)), kxhi = std::min(m, ix);
    index_t kylo = std::max(-m, iy - (ny - 1)), kyhi = std::min(m, iy);
    for (index_t kx = kxlo; kx <= kxhi; ++kx) {
      const double* wrow = &k.w[static_cast<size_t>((kx + m) * side + m)];
      const double* vrow = &v.values[static_cast<size_t>((ix - kx) * ny + iy)];
      for (index_t ky = kylo; ky <= kyhi; ++ky) acc += wrow[ky] * vrow[-ky];
    }
  }
  return k.cell_volume() * acc;
}

}  // namespace nlstefan

#endif

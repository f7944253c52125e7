#pragma once

// Dimension formulas for common-fixed-point systems, plus the graph-directed
// approximation of the attractor: the N x N matrices C_n^(s) whose Perron root
// crosses 1 at s_n, with s_n increasing to the root of
//     sum_i prod_j (1 - lambda_{i,j}^s) = N - 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfsdim/core.hpp"
#include "cfsdim/entropy.hpp"
#include "cfsdim/error.hpp"

namespace cfsdim {

struct DimensionReport {
  double dimension = 0.0;  // capped to [0,1] for measures/attractors on the line
  double raw = 0.0;        // uncapped root or ratio
  std::string method;
  double tolerance = 0.0;
  std::vector<std::string> flags;
  std::map<std::string, double> diagnostics;

  bool has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }
};

struct BisectionResult {
  double root = 0.0;
  int iterations = 0;
  double lo = 0.0, hi = 0.0;
};

/// Root of a monotone function with f(lo), f(hi) of opposite signs.
inline BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
                              int max_iter = 400) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return {lo, 0, lo, lo};
  if (fhi == 0.0) return {hi, 0, hi, hi};
  if ((flo > 0.0) == (fhi > 0.0)) throw Error(ErrorCode::RootOutsideBracket, "bisection bracket has no sign change");
  BisectionResult r;
  for (r.iterations = 0; r.iterations < max_iter && hi - lo > tol; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  r.root = 0.5 * (lo + hi);
  r.lo = lo;
  r.hi = hi;
  return r;
}

/// Unique s with sum r_i^s = 1.
inline double similarity_dimension(const std::vector<double>& ratios, double tol = 1e-13) {
  const auto f = [&](double s) {
    double sum = 0.0;
    for (double r : ratios) sum += std::pow(r, s);
    return sum - 1.0;
  };
  double hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  return bisect(f, 0.0, hi, tol).root;
}

inline double similarity_dimension(const CFSystem& sys, double tol = 1e-13) {
  std::vector<double> all;
  for (const auto& g : sys.ratios()) all.insert(all.end(), g.begin(), g.end());
  return similarity_dimension(all, tol);
}

/// min{1, (h_p + Phi(p)) / chi(p)}; a point mass reports 0 with the "degenerate" flag.
/// True when some group lists the same ratio twice, i.e. two symbols name one map.
/// The formulas then count that map twice and overstate the dimension of the set.
inline bool has_coincident_maps(const CFSystem& sys) {
  for (std::size_t i = 0; i < sys.group_count(); ++i) {
    const std::size_t n = sys.group_size(i);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (sys.ratio({static_cast<int>(i), static_cast<int>(a)}) == sys.ratio({static_cast<int>(i), static_cast<int>(b)}))
          return true;
  }
  return false;
}

inline DimensionReport measure_dimension(const CFSystem& sys, const ProbVector& p, double tol = kDefaultTolerance) {
  DimensionReport rep;
  rep.method = "entropy-over-lyapunov";
  rep.tolerance = tol;
  const PrunedSystem pruned = prune_zeros(sys, p);
  if (pruned.all_mass_on_one_group) {
    rep.flags.push_back("degenerate");
    return rep;
  }
  const double h = shannon_entropy(p);
  const double chi = lyapunov(sys, p);
  const PhiResult phi = phi_series(sys, p, tol);
  rep.raw = (h + phi.value) / chi;
  rep.dimension = std::min(1.0, rep.raw);
  rep.diagnostics = {{"entropy", h},
                     {"lyapunov", chi},
                     {"phi", phi.value},
                     {"phi_tail_bound", phi.tail_bound},
                     {"phi_terms", static_cast<double>(phi.terms_used)},
                     {"rw_entropy", h + phi.value},
                     {"similarity_bound", h / chi}};
  if (has_coincident_maps(sys)) rep.flags.push_back("coincident-maps");
  return rep;
}

/// F(s) = sum_i prod_j (1 - lambda_{i,j}^s): increasing from 0 to N.
inline double attractor_equation(const CFSystem& sys, double s) {
  double sum = 0.0;
  for (const auto& g : sys.ratios()) {
    double prod = 1.0;
    for (double r : g) prod *= 1.0 - std::pow(r, s);
    sum += prod;
  }
  return sum;
}

inline DimensionReport attractor_dimension(const CFSystem& sys, double tol = 1e-13) {
  const double target = static_cast<double>(sys.group_count()) - 1.0;
  const auto f = [&](double s) { return attractor_equation(sys, s) - target; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  const BisectionResult r = bisect(f, 0.0, hi, tol);
  DimensionReport rep;
  rep.method = "common-fixed-point-equation";
  rep.tolerance = tol;
  rep.raw = r.root;
  rep.dimension = std::min(1.0, r.root);
  rep.diagnostics = {{"bracket_lo", r.lo},
                     {"bracket_hi", r.hi},
                     {"iterations", static_cast<double>(r.iterations)},
                     {"similarity_dimension", similarity_dimension(sys)}};
  if (has_coincident_maps(sys)) rep.flags.push_back("coincident-maps");
  return rep;
}

/// Complete homogeneous symmetric polynomials h_0..h_max_degree of x.
inline std::vector<double> complete_homogeneous(const std::vector<double>& x, int max_degree) {
  std::vector<double> h(static_cast<std::size_t>(max_degree) + 1, 0.0);
  h[0] = 1.0;
  for (double xi : x)
    for (std::size_t m = 1; m < h.size(); ++m) h[m] += xi * h[m - 1];
  return h;
}

inline constexpr int kInfiniteDepth = 0;

/// N x N matrix with zero diagonal; entry (i,k), i != k, is the total s-weight of the
/// nonempty multisets of size <= depth drawn from group k.
struct GDMatrix {
  std::size_t size = 0;
  std::vector<double> entries;  // row-major
  double s = 0.0;
  int depth = kInfiniteDepth;

  double operator()(std::size_t i, std::size_t k) const { return entries[i * size + k]; }
};

inline double group_weight(const std::vector<double>& ratios, double s, int depth) {
  std::vector<double> x;
  for (double r : ratios) x.push_back(std::pow(r, s));
  if (depth == kInfiniteDepth) {
    double prod = 1.0;
    for (double xi : x) prod /= 1.0 - xi;
    return prod - 1.0;
  }
  const auto h = complete_homogeneous(x, depth);
  double sum = 0.0;
  for (std::size_t m = 1; m < h.size(); ++m) sum += h[m];
  return sum;
}

inline GDMatrix gd_matrix(const CFSystem& sys, double s, int depth) {
  GDMatrix m;
  m.size = sys.group_count();
  m.s = s;
  m.depth = depth;
  m.entries.assign(m.size * m.size, 0.0);
  for (std::size_t k = 0; k < m.size; ++k) {
    const double w = group_weight(sys.ratios()[k], s, depth);
    for (std::size_t i = 0; i < m.size; ++i)
      if (i != k) m.entries[i * m.size + k] = w;
  }
  return m;
}

/// Perron root of a nonnegative irreducible matrix by power iteration on M + c Id, with c the
/// largest row sum. The shift makes periodic matrices primitive; scaling it with M keeps the
/// iteration contracting when the entries are huge. Stops when the Collatz-Wielandt bounds
/// agree to the relative tolerance.
inline double spectral_radius(const std::vector<double>& a, std::size_t n, double tol = 1e-13,
                              int max_iter = 1'000'000) {
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < n; ++k) row += a[i * n + k];
    shift = std::max(shift, row);
  }
  if (shift == 0.0) return 0.0;
  std::vector<double> v(n, 1.0), w(n);
  for (int it = 0; it < max_iter; ++it) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = shift * v[i];
      for (std::size_t k = 0; k < n; ++k) acc += a[i * n + k] * v[k];
      w[i] = acc;
      const double ratio = acc / v[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      norm = std::max(norm, acc);
    }
    if (hi - lo <= tol * hi) return 0.5 * (lo + hi) - shift;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  throw Error(ErrorCode::NonConvergence, "power iteration did not converge");
}

inline double spectral_radius(const GDMatrix& m, double tol = 1e-13) { return spectral_radius(m.entries, m.size, tol); }

/// s_n with rho(C_n^(s_n)) = 1. depth == kInfiniteDepth gives the limiting root.
inline double gd_dimension(const CFSystem& sys, int depth, double tol = 1e-12) {
  const auto f = [&](double s) { return spectral_radius(gd_matrix(sys, s, depth)) - 1.0; };
  const double lo = depth == kInfiniteDepth ? 1e-9 : 0.0;
  double hi = similarity_dimension(sys) + 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  if (f(lo) <= 0.0) return lo;
  return bisect(f, lo, hi, tol).root;
}

/// det of the n x n matrix with -1 on the diagonal and x_j - 1 elsewhere in column j:
///   (n-1)(-1)^{n+1} prod x + (-1)^n sum_k prod_{l != k} x_l.
inline double special_det(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::ShapeMismatch, "special_det needs at least two entries");
  double prod = 1.0;
  for (double v : x) prod *= v;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double p = 1.0;
    for (std::size_t l = 0; l < n; ++l)
      if (l != k) p *= x[l];
    sum += p;
  }
  const double sign_n = n % 2 == 0 ? 1.0 : -1.0;
  return -sign_n * static_cast<double>(n - 1) * prod + sign_n * sum;
}

struct VertexMatrix {
  std::size_t size = 0;
  std::vector<double> entries;  // row-major
  std::vector<int> vertex_group;
  std::vector<double> vertex_weight;
};

/// B_n^(s): vertices are the nonempty multisets of size <= depth inside one group; the
/// edge u -> v carries lambda_v^s whenever u and v belong to different groups.
inline VertexMatrix bn_matrix(const CFSystem& sys, double s, int depth, std::uint64_t budget = 4096) {
  VertexMatrix b;
  for (std::size_t g = 0; g < sys.group_count(); ++g) {
    std::vector<double> x;
    for (double r : sys.ratios()[g]) x.push_back(std::pow(r, s));
    // multisets as nondecreasing member sequences
    std::function<void(std::size_t, int, double)> walk = [&](std::size_t from, int left, double weight) {
      for (std::size_t j = from; j < x.size(); ++j) {
        const double w = weight * x[j];
        b.vertex_group.push_back(static_cast<int>(g));
        b.vertex_weight.push_back(w);
        if (b.vertex_group.size() > budget) throw Error(ErrorCode::BudgetExceeded, "B_n has too many vertices");
        if (left > 1) walk(j, left - 1, w);
      }
    };
    walk(0, depth, 1.0);
  }
  b.size = b.vertex_group.size();
  b.entries.assign(b.size * b.size, 0.0);
  for (std::size_t u = 0; u < b.size; ++u)
    for (std::size_t v = 0; v < b.size; ++v)
      if (b.vertex_group[u] != b.vertex_group[v]) b.entries[u * b.size + v] = b.vertex_weight[v];
  return b;
}

struct RadiusPair {
  double rho_b = 0.0;
  double rho_c = 0.0;
  std::size_t vertices = 0;
};

inline RadiusPair bn_matrix_check(const CFSystem& sys, double s, int depth, std::uint64_t budget = 4096) {
  const VertexMatrix b = bn_matrix(sys, s, depth, budget);
  return {spectral_radius(b.entries, b.size), spectral_radius(gd_matrix(sys, s, depth)), b.size};
}

}  // namespace cfsdim

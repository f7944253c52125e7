#pragma once

// The generalised 4-corner set: four diagonal affine maps of the unit square,
//   F1 = (g11 x,          l11 y),          F2 = (g12 x,          l21 y + 1 - l21),
//   F3 = (g21 x + 1 - g21, l12 y),          F4 = (g22 x + 1 - g22, l22 y + 1 - l22).
// Its x-projection groups {F1,F2} at 0 and {F3,F4} at 1; the y-projection groups
// {F1,F3} at 0 and {F2,F4} at 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cfsdim/core.hpp"
#include "cfsdim/dimension.hpp"
#include "cfsdim/entropy.hpp"

namespace cfsdim {

using Matrix2 = std::array<std::array<double, 2>, 2>;
using FourCornerProb = std::array<double, 4>;

struct FourCornerSystem {
  Matrix2 gamma{};   // gamma[i][j] = x-ratio gamma_{i+1,j+1}
  Matrix2 lambda{};  // lambda[i][j] = y-ratio lambda_{i+1,j+1}

  bool operator==(const FourCornerSystem&) const = default;
};

struct DiagonalMap2D {
  double sx = 1.0, sy = 1.0, tx = 0.0, ty = 0.0;

  std::pair<double, double> operator()(double x, double y) const { return {sx * x + tx, sy * y + ty}; }
};

inline std::array<DiagonalMap2D, 4> corner_maps(const FourCornerSystem& sys) {
  const auto& g = sys.gamma;
  const auto& l = sys.lambda;
  return {{{g[0][0], l[0][0], 0.0, 0.0},
           {g[0][1], l[1][0], 0.0, 1.0 - l[1][0]},
           {g[1][0], l[0][1], 1.0 - g[1][0], 0.0},
           {g[1][1], l[1][1], 1.0 - g[1][1], 1.0 - l[1][1]}}};
}

/// Per-map (x-ratio, y-ratio), in map order F1..F4.
inline std::array<std::pair<double, double>, 4> corner_ratios(const FourCornerSystem& sys) {
  std::array<std::pair<double, double>, 4> out;
  const auto maps = corner_maps(sys);
  for (std::size_t i = 0; i < 4; ++i) out[i] = {maps[i].sx, maps[i].sy};
  return out;
}

struct FourCornerConditions {
  std::vector<std::string> separation_violations;  // positivity and the rectangular open set sums
  std::vector<std::string> domination_violations;  // lambda_{.} <= gamma_{.} pairing

  bool separation_ok() const { return separation_violations.empty(); }
  bool domination_ok() const { return domination_violations.empty(); }
};

inline FourCornerConditions validate_4c(const FourCornerSystem& sys) {
  FourCornerConditions c;
  const auto& g = sys.gamma;
  const auto& l = sys.lambda;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const std::string idx = std::to_string(i + 1) + "," + std::to_string(j + 1);
      if (!(g[i][j] > 0.0 && g[i][j] < 1.0)) c.separation_violations.push_back("gamma_" + idx + " in (0,1)");
      if (!(l[i][j] > 0.0 && l[i][j] < 1.0)) c.separation_violations.push_back("lambda_" + idx + " in (0,1)");
    }
  const auto sum_le_one = [&](double a, double b, const std::string& what) {
    if (a + b > 1.0) c.separation_violations.push_back(what + " <= 1");
  };
  sum_le_one(g[0][0], g[1][0], "gamma_1,1 + gamma_2,1");
  sum_le_one(g[0][1], g[1][1], "gamma_1,2 + gamma_2,2");
  sum_le_one(l[0][0], l[1][0], "lambda_1,1 + lambda_2,1");
  sum_le_one(l[0][1], l[1][1], "lambda_1,2 + lambda_2,2");
  if (std::min(g[0][1] + g[1][0], l[0][1] + l[1][0]) > 1.0)
    c.separation_violations.push_back("min(gamma_1,2 + gamma_2,1, lambda_1,2 + lambda_2,1) <= 1");
  if (std::min(g[0][0] + g[1][1], l[0][0] + l[1][1]) > 1.0)
    c.separation_violations.push_back("min(gamma_1,1 + gamma_2,2, lambda_1,1 + lambda_2,2) <= 1");

  const auto dominated = [&](double lam, double gam, const std::string& what) {
    if (lam > gam) c.domination_violations.push_back(what);
  };
  dominated(l[0][0], g[0][0], "lambda_1,1 <= gamma_1,1");
  dominated(l[1][1], g[1][1], "lambda_2,2 <= gamma_2,2");
  dominated(l[0][1], g[1][0], "lambda_1,2 <= gamma_2,1");
  dominated(l[1][0], g[0][1], "lambda_2,1 <= gamma_1,2");
  return c;
}

namespace detail {

// (t1 + t4) + (t2 + t3): unchanged by the 2 <-> 3 swap that exchanges the axes, so duality is exact in floating point.
inline double sum4(const std::array<double, 4>& t) { return (t[0] + t[3]) + (t[1] + t[2]); }

}  // namespace detail

inline std::pair<double, double> chis(const FourCornerSystem& sys, const FourCornerProb& p) {
  const auto r = corner_ratios(sys);
  std::array<double, 4> tx{}, ty{};
  for (std::size_t i = 0; i < 4; ++i) {
    if (p[i] <= 0.0) continue;
    tx[i] = -p[i] * std::log(r[i].first);
    ty[i] = -p[i] * std::log(r[i].second);
  }
  return {detail::sum4(tx), detail::sum4(ty)};
}

inline double entropy4(const FourCornerProb& p) {
  std::array<double, 4> t{};
  for (std::size_t i = 0; i < 4; ++i)
    if (p[i] > 0.0) t[i] = -p[i] * std::log(p[i]);
  return detail::sum4(t);
}

struct PhiXY {
  double phi_x = 0.0, phi_y = 0.0;
  double tail_x = 0.0, tail_y = 0.0;
  bool degenerate_x = false, degenerate_y = false;  // one projection is a point mass
};

namespace detail {

/// sum_k sum_q C(k,q) outside (a^{q+1} b^{k-q} + b^{q+1} a^{k-q}) log((q+1)/(k+1)),
/// with each binomial weight evaluated directly in log space.
inline double pair_phi_series(double a, double b, double outside, double tol, double& tail) {
  tail = 0.0;
  if (a <= 0.0 || b <= 0.0 || outside <= 0.0) return 0.0;
  const double rho = a + b;
  long long K = 0;
  while (phi_group_tail_bound(rho, outside, K) >= tol) ++K;
  const double la = std::log(a), lb = std::log(b);
  double sum = 0.0;
  for (long long k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    const double lk = std::lgamma(kk + 1.0);
    const double log_k1 = std::log(kk + 1.0);
    for (long long q = 0; q < k; ++q) {  // q == k contributes log 1 = 0
      const double qq = static_cast<double>(q);
      const double lbin = lk - std::lgamma(qq + 1.0) - std::lgamma(kk - qq + 1.0);
      const double w = std::exp(lbin + (qq + 1.0) * la + (kk - qq) * lb) + std::exp(lbin + (qq + 1.0) * lb + (kk - qq) * la);
      sum += w * (std::log(qq + 1.0) - log_k1);
    }
  }
  tail = phi_group_tail_bound(rho, outside, K);
  return outside * sum;
}

}  // namespace detail

/// Phi_x and Phi_y from the explicit two-by-two series.
inline PhiXY phi_xy(const FourCornerProb& p, double tol = kDefaultTolerance) {
  PhiXY r;
  double t1 = 0.0, t2 = 0.0;
  r.phi_x = detail::pair_phi_series(p[0], p[1], p[2] + p[3], tol / 2, t1) +
            detail::pair_phi_series(p[2], p[3], p[0] + p[1], tol / 2, t2);
  r.tail_x = t1 + t2;
  r.phi_y = detail::pair_phi_series(p[0], p[2], p[1] + p[3], tol / 2, t1) +
            detail::pair_phi_series(p[1], p[3], p[0] + p[2], tol / 2, t2);
  r.tail_y = t1 + t2;
  r.degenerate_x = p[0] + p[1] <= 0.0 || p[2] + p[3] <= 0.0;
  r.degenerate_y = p[0] + p[2] <= 0.0 || p[1] + p[3] <= 0.0;
  return r;
}

/// The 1-D common-fixed-point systems obtained by projecting onto each axis.
inline CFSystem x_projection(const FourCornerSystem& sys) {
  return CFSystem(std::vector<double>{0.0, 1.0},
                  std::vector<std::vector<double>>{{sys.gamma[0][0], sys.gamma[0][1]}, {sys.gamma[1][0], sys.gamma[1][1]}});
}

inline CFSystem y_projection(const FourCornerSystem& sys) {
  return CFSystem(std::vector<double>{0.0, 1.0},
                  std::vector<std::vector<double>>{{sys.lambda[0][0], sys.lambda[0][1]}, {sys.lambda[1][0], sys.lambda[1][1]}});
}

inline ProbVector x_grouping(const FourCornerProb& p) { return ProbVector({{p[0], p[1]}, {p[2], p[3]}}); }
inline ProbVector y_grouping(const FourCornerProb& p) { return ProbVector({{p[0], p[2]}, {p[1], p[3]}}); }

inline DimensionReport measure_dimension_4c(const FourCornerSystem& sys, const FourCornerProb& p,
                                            double tol = kDefaultTolerance) {
  DimensionReport rep;
  rep.method = "four-corner-cases";
  rep.tolerance = tol;
  int positive = 0;
  for (double x : p) positive += x > 0.0 ? 1 : 0;
  if (positive <= 1) {
    rep.flags.push_back("degenerate");
    return rep;
  }
  const double h = entropy4(p);
  const auto [cx, cy] = chis(sys, p);
  const PhiXY phi = phi_xy(p, tol);
  rep.diagnostics = {{"entropy", h}, {"chi_x", cx}, {"chi_y", cy}, {"phi_x", phi.phi_x}, {"phi_y", phi.phi_y},
                     {"phi_x_tail_bound", phi.tail_x}, {"phi_y_tail_bound", phi.tail_y}};

  // Support on a vertical (horizontal) segment: one-dimensional measure of the other axis.
  if (phi.degenerate_x || phi.degenerate_y) {
    rep.flags.push_back("degenerate");
    const double num = phi.degenerate_x ? h + phi.phi_y : h + phi.phi_x;
    const double chi = phi.degenerate_x ? cy : cx;
    rep.raw = num / chi;
    rep.dimension = std::min(1.0, rep.raw);
    rep.diagnostics["case"] = 0.0;
    return rep;
  }

  const double ex = h + phi.phi_x, ey = h + phi.phi_y;
  struct Case {
    bool applies;
    double value;
  };
  const std::array<Case, 4> cases{{
      {cy >= cx && cx >= ex, ex / cx - phi.phi_x / cy},
      {cy >= cx && ex >= cx, 1.0 + (h - cx) / cy},
      {cx >= cy && cy >= ey, ey / cy - phi.phi_y / cx},
      {cx >= cy && ey >= cy, 1.0 + (h - cy) / cx},
  }};
  int chosen = -1;
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (!cases[k].applies) continue;
    if (chosen < 0) {
      chosen = k;
      lo = hi = cases[k].value;
    }
    lo = std::min(lo, cases[k].value);
    hi = std::max(hi, cases[k].value);
  }
  if (chosen < 0) {
    std::ostringstream msg;
    msg << "no case applies: h=" << h << " chi_x=" << cx << " chi_y=" << cy << " phi_x=" << phi.phi_x
        << " phi_y=" << phi.phi_y;
    throw Error(ErrorCode::NoCaseApplies, msg.str());
  }
  rep.raw = rep.dimension = cases[static_cast<std::size_t>(chosen)].value;
  rep.diagnostics["case"] = chosen + 1;
  rep.diagnostics["boundary_discrepancy"] = hi - lo;
  return rep;
}

/// sum_i gamma_{i,i} lambda_{i,i}^{s-1} + gamma_{i,3-i} lambda_{3-i,i}^{s-1} - 1, decreasing in s.
inline double natural_equation(const FourCornerSystem& sys, double s) {
  double sum = 0.0;
  for (const auto& [gx, ly] : corner_ratios(sys)) sum += gx * std::pow(ly, s - 1.0);
  return sum - 1.0;
}

struct NaturalMeasure {
  FourCornerProb p{};
  double s = 0.0;
};

inline NaturalMeasure natural_p(const FourCornerSystem& sys, double tol = 1e-15) {
  const auto f = [&](double s) { return natural_equation(sys, s); };
  double lo = 1.0, hi = 2.0;
  if (f(lo) < 0.0 || f(hi) > 0.0) {
    lo = 0.5;
    hi = 3.0;
    if (f(lo) < 0.0 || f(hi) > 0.0)
      throw Error(ErrorCode::RootOutsideBracket, "natural exponent lies outside [0.5, 3]");
  }
  NaturalMeasure out;
  out.s = bisect(f, lo, hi, tol).root;
  const auto r = corner_ratios(sys);
  for (std::size_t i = 0; i < 4; ++i) out.p[i] = r[i].first * std::pow(r[i].second, out.s - 1.0);
  return out;
}

/// The four-term logarithmic expression whose positivity, via the Jensen bound on Phi_x,
/// places the natural measure in the "1 + (h - chi_x)/chi_y" case.
inline double suff_value(const FourCornerSystem& sys, double s) {
  const auto r = corner_ratios(sys);
  std::array<double, 4> p{}, y{};
  for (std::size_t i = 0; i < 4; ++i) {
    y[i] = std::pow(r[i].second, s - 1.0);
    p[i] = r[i].first * y[i];
  }
  return p[0] * std::log((1.0 - p[1]) / y[0]) + p[1] * std::log((1.0 - p[0]) / y[1]) +
         p[2] * std::log((1.0 - p[3]) / y[2]) + p[3] * std::log((1.0 - p[2]) / y[3]);
}

struct SuffCheck {
  double value = 0.0;
  bool holds = false;
  double s = 0.0;
};

inline SuffCheck suff_check(const FourCornerSystem& sys) {
  const NaturalMeasure nat = natural_p(sys);
  const double v = suff_value(sys, nat.s);
  return {v, v > 0.0, nat.s};
}

inline DimensionReport set_dimension_4c(const FourCornerSystem& sys) {
  const FourCornerConditions cond = validate_4c(sys);
  if (!cond.separation_ok()) {
    std::string what;
    for (const auto& v : cond.separation_violations) what += (what.empty() ? "" : "; ") + v;
    throw Error(ErrorCode::ConditionsNotMet, what);
  }
  const NaturalMeasure nat = natural_p(sys);
  const double suff = suff_value(sys, nat.s);
  DimensionReport rep;
  rep.method = "natural-measure-exponent";
  rep.tolerance = 1e-15;
  rep.raw = rep.dimension = nat.s;
  rep.diagnostics = {{"separation_conditions", 1.0},
                     {"domination_conditions", cond.domination_ok() ? 1.0 : 0.0},
                     {"suff_value", suff},
                     {"suff_holds", suff > 0.0 ? 1.0 : 0.0}};
  for (std::size_t i = 0; i < 4; ++i) rep.diagnostics["p" + std::to_string(i + 1)] = nat.p[i];
  rep.flags.push_back(cond.domination_ok() && suff > 0.0 ? "certified" : "upper-bound-only");
  return rep;
}

/// Random iteration: after `burn_in` discarded steps, calls fn(x, y) for each point.
inline void chaos_game(const FourCornerSystem& sys, std::uint64_t points, std::uint64_t seed,
                       const FourCornerProb& weights, const std::function<void(double, double)>& fn,
                       std::uint64_t burn_in = 100) {
  const auto maps = corner_maps(sys);
  std::vector<double> cumulative(4);
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  auto rng = detail::chunk_stream(seed, 0x4c4f4f50u);
  double x = 0.5, y = 0.5;
  for (std::uint64_t i = 0; i < burn_in + points; ++i) {
    std::tie(x, y) = maps[detail::draw_index(cumulative, rng)](x, y);
    if (i >= burn_in) fn(x, y);
  }
}

inline std::string cylinders_svg(const FourCornerSystem& sys, int depth, int size_px = 512) {
  const auto maps = corner_maps(sys);
  std::vector<DiagonalMap2D> level{DiagonalMap2D{}};
  for (int d = 0; d < depth; ++d) {
    std::vector<DiagonalMap2D> next;
    next.reserve(level.size() * 4);
    for (const auto& outer : level)
      for (const auto& inner : maps)
        next.push_back({outer.sx * inner.sx, outer.sy * inner.sy, outer.sx * inner.tx + outer.tx,
                        outer.sy * inner.ty + outer.ty});
    level = std::move(next);
  }
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size_px << "\" height=\"" << size_px
      << "\" viewBox=\"0 0 1 1\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\" fill=\"white\" stroke=\"black\" stroke-width=\"0.002\"/>\n";
  char buf[256];
  for (const auto& m : level) {
    // SVG y grows downwards
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.9f\" y=\"%.9f\" width=\"%.9f\" height=\"%.9f\" fill=\"#4060a0\" fill-opacity=\"0.6\"/>\n",
                  m.tx, 1.0 - (m.ty + m.sy), m.sx, m.sy);
    svg << buf;
  }
  svg << "</svg>\n";
  return svg.str();
}

/// Binary PPM (P6) raster of a chaos-game point cloud with uniform map choice.
inline std::string attractor_ppm(const FourCornerSystem& sys, std::uint64_t points, std::uint64_t seed,
                                 int width = 512, int height = 512, std::uint64_t burn_in = 100) {
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 255);
  chaos_game(
      sys, points, seed, {0.25, 0.25, 0.25, 0.25},
      [&](double x, double y) {
        const int px = std::clamp(static_cast<int>(x * width), 0, width - 1);
        const int py = std::clamp(static_cast<int>((1.0 - y) * height), 0, height - 1);
        const std::size_t at = (static_cast<std::size_t>(py) * static_cast<std::size_t>(width) + static_cast<std::size_t>(px)) * 3;
        pixels[at] = pixels[at + 1] = pixels[at + 2] = 0;
      },
      burn_in);
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace cfsdim

#pragma once

// Empirical dimension estimates used as cross-checks: dyadic box counts of 1-D
// attractors from cylinder covers, chaos-game box counts for the 4-corner set,
// and the growth of dyadic entropies of self-similar measures.
//
// Grids are anchored at 0 after translating the attractor into [0,1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "cfsdim/core.hpp"
#include "cfsdim/entropy.hpp"
#include "cfsdim/error.hpp"
#include "cfsdim/fourcorner.hpp"

namespace cfsdim {

struct ScalingFit {
  std::vector<int> scales;             // box exponents m
  std::vector<double> counts;          // N_m, or H_m in bits for entropy fits
  std::vector<double> lower_counts;    // 1-D covers only
  double slope = 0.0;
  double upper_slope = 0.0;            // fit of counts alone
  double lower_slope = 0.0;            // fit of lower_counts alone
  double intercept = 0.0;
  double r2 = 0.0;
  double stderr_ = 0.0;
  std::pair<int, int> window{0, 0};
};

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0, stderr_ = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw Error(ErrorCode::ShapeMismatch, "a fit needs at least two scales");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.stderr_ = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return f;
}

/// Default window: drop the two coarsest and two finest scales when at least three remain.
inline std::pair<int, int> default_window(int m_lo, int m_hi) {
  if (m_hi - m_lo >= 6) return {m_lo + 2, m_hi - 2};
  return {m_lo, m_hi};
}

namespace detail {

/// Fits log2-counts (or entropies already in bits) over the window.
inline void fit_window(ScalingFit& fit, bool take_log) {
  std::vector<double> x, up, lo, mid;
  for (std::size_t k = 0; k < fit.scales.size(); ++k) {
    if (fit.scales[k] < fit.window.first || fit.scales[k] > fit.window.second) continue;
    x.push_back(fit.scales[k]);
    const double u = take_log ? std::log2(fit.counts[k]) : fit.counts[k];
    up.push_back(u);
    if (!fit.lower_counts.empty()) {
      const double l = take_log ? std::log2(fit.lower_counts[k]) : fit.lower_counts[k];
      lo.push_back(l);
      mid.push_back(0.5 * (u + l));
    }
  }
  const LineFit f = least_squares(x, mid.empty() ? up : mid);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.r2 = f.r2;
  fit.stderr_ = f.stderr_;
  fit.upper_slope = least_squares(x, up).slope;
  fit.lower_slope = lo.empty() ? fit.upper_slope : least_squares(x, lo).slope;
}

/// The system conjugated onto [0,1]: fixed points u_i = (t_i - t_min)/(t_max - t_min).
struct UnitSystem {
  double offset = 0.0, width = 1.0;
  std::vector<double> ratio, shift;  // per flat symbol: y -> ratio*y + shift
  std::vector<int> group, member;
};

inline UnitSystem unit_system(const CFSystem& sys) {
  UnitSystem u;
  u.offset = sys.min_fixed_point();
  u.width = sys.max_fixed_point() - u.offset;
  if (!(u.width > 0.0)) throw Error(ErrorCode::TooFewGroups, "attractor is a single point");
  for (const Symbol& s : sys.symbols()) {
    const double r = sys.ratio(s);
    const double t = (sys.fixed_point(static_cast<std::size_t>(s.group)) - u.offset) / u.width;
    u.ratio.push_back(r);
    u.shift.push_back(t * (1.0 - r));
    u.group.push_back(s.group);
    u.member.push_back(s.member);
  }
  return u;
}

}  // namespace detail

struct DyadicCover {
  int m = 0;
  double offset = 0.0, width = 1.0;
  std::vector<bool> upper, lower;
  std::uint64_t upper_count = 0, lower_count = 0, cylinders = 0;

  std::uint64_t box_of(double x) const {
    const double y = (x - offset) / width;
    const double cells = std::ldexp(1.0, m);
    return static_cast<std::uint64_t>(std::clamp(std::floor(y * cells), 0.0, cells - 1.0));
  }

  bool covers(double x) const { return upper[box_of(x)]; }
};

/// Covers the attractor by cylinder intervals of normalised length < 2^-m. Only words
/// whose members are nondecreasing inside every block are visited: the others repeat a map.
inline DyadicCover cover_boxes_1d(const CFSystem& sys, int m, std::uint64_t budget = 100'000'000) {
  if (m < 1 || m > 30) throw Error(ErrorCode::ShapeMismatch, "box exponent must lie in [1, 30]");
  const detail::UnitSystem u = detail::unit_system(sys);
  DyadicCover c;
  c.m = m;
  c.offset = u.offset;
  c.width = u.width;
  const std::uint64_t cells = std::uint64_t{1} << m;
  c.upper.assign(cells, false);
  c.lower.assign(cells, false);
  const double scale = std::ldexp(1.0, m);
  const double target = std::ldexp(1.0, -m);
  const auto cell = [&](double y) {
    return static_cast<std::uint64_t>(std::clamp(std::floor(y * scale), 0.0, scale - 1.0));
  };

  struct Frame {
    double ratio, shift;
    int last;  // flat index of the last symbol, -1 at the root
  };
  std::vector<Frame> stack{{1.0, 0.0, -1}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.ratio < target) {
      if (++c.cylinders > budget) throw Error(ErrorCode::BudgetExceeded, "cylinder cover exceeds the budget");
      const std::uint64_t a = cell(f.shift), b = cell(f.shift + f.ratio);
      for (std::uint64_t k = a; k <= b; ++k) c.upper[k] = true;
      c.lower[a] = true;
      continue;
    }
    for (std::size_t s = 0; s < u.ratio.size(); ++s) {
      if (f.last >= 0 && u.group[s] == u.group[static_cast<std::size_t>(f.last)] &&
          u.member[s] < u.member[static_cast<std::size_t>(f.last)])
        continue;
      stack.push_back({f.ratio * u.ratio[s], f.ratio * u.shift[s] + f.shift, static_cast<int>(s)});
    }
  }
  c.upper_count = static_cast<std::uint64_t>(std::count(c.upper.begin(), c.upper.end(), true));
  c.lower_count = static_cast<std::uint64_t>(std::count(c.lower.begin(), c.lower.end(), true));
  return c;
}

inline ScalingFit box_dimension_1d(const CFSystem& sys, int m_lo, int m_hi, std::uint64_t budget = 100'000'000) {
  if (m_lo < 1 || m_hi < m_lo + 1) throw Error(ErrorCode::ShapeMismatch, "need 1 <= m_lo < m_hi");
  ScalingFit fit;
  for (int m = m_lo; m <= m_hi; ++m) {
    const DyadicCover c = cover_boxes_1d(sys, m, budget);
    fit.scales.push_back(m);
    fit.counts.push_back(static_cast<double>(c.upper_count));
    fit.lower_counts.push_back(static_cast<double>(c.lower_count));
  }
  fit.window = default_window(m_lo, m_hi);
  detail::fit_window(fit, true);
  return fit;
}

namespace detail {

inline std::uint64_t interleave(std::uint64_t x, std::uint64_t y, int bits) {
  std::uint64_t z = 0;
  for (int b = bits - 1; b >= 0; --b) z = (z << 2) | (((x >> b) & 1u) << 1) | ((y >> b) & 1u);
  return z;
}

/// Distinct values of sorted keys after dropping `shift` low bits.
inline std::uint64_t distinct_prefixes(const std::vector<std::uint64_t>& sorted, int shift) {
  std::uint64_t n = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k)
    if (k == 0 || (sorted[k] >> shift) != (sorted[k - 1] >> shift)) ++n;
  return n;
}

}  // namespace detail

struct BoxCount2DOptions {
  std::uint64_t points = 4'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool natural_weights = true;  // sample with the natural measure when it exists, else uniformly
};

/// Chaos-game box counts on 2^m x 2^m grids. A finite cloud misses light boxes, so the
/// estimate is biased downwards at fine scales.
inline ScalingFit box_dimension_2d(const FourCornerSystem& sys, int m_lo, int m_hi, const BoxCount2DOptions& opt) {
  if (m_lo < 1 || m_hi < m_lo + 1 || m_hi > 26) throw Error(ErrorCode::ShapeMismatch, "need 1 <= m_lo < m_hi <= 26");
  if (opt.points == 0) throw Error(ErrorCode::ShapeMismatch, "points must be positive");
  FourCornerProb w{0.25, 0.25, 0.25, 0.25};
  if (opt.natural_weights) {
    try {
      w = natural_p(sys).p;
    } catch (const Error&) {
    }
  }
  const auto maps = corner_maps(sys);
  std::vector<double> cumulative(4);
  std::partial_sum(w.begin(), w.end(), cumulative.begin());
  const double cells = std::ldexp(1.0, m_hi);
  const auto cell = [&](double v) {
    return static_cast<std::uint64_t>(std::clamp(std::floor(v * cells), 0.0, cells - 1.0));
  };
  const std::uint64_t chunks = std::min(detail::kMonteCarloChunks, opt.points);
  std::vector<std::uint64_t> keys(opt.points);
  detail::run_chunks(chunks, opt.threads, [&](std::uint64_t c) {
    auto rng = detail::chunk_stream(opt.seed, c);
    const std::uint64_t begin = opt.points * c / chunks, end = opt.points * (c + 1) / chunks;
    double x = 0.5, y = 0.5;
    for (int k = 0; k < 100; ++k) std::tie(x, y) = maps[detail::draw_index(cumulative, rng)](x, y);
    for (std::uint64_t i = begin; i < end; ++i) {
      std::tie(x, y) = maps[detail::draw_index(cumulative, rng)](x, y);
      keys[i] = detail::interleave(cell(x), cell(y), m_hi);
    }
  });
  std::sort(keys.begin(), keys.end());
  ScalingFit fit;
  for (int m = m_lo; m <= m_hi; ++m) {
    fit.scales.push_back(m);
    fit.counts.push_back(static_cast<double>(detail::distinct_prefixes(keys, 2 * (m_hi - m))));
  }
  fit.window = default_window(m_lo, m_hi);
  detail::fit_window(fit, true);
  return fit;
}

struct EntropySlopeOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Empirical H(mu, D_m) in bits against m; the slope estimates dim mu.
inline ScalingFit entropy_slope(const CFSystem& sys, const ProbVector& p, int m_lo, int m_hi,
                                const EntropySlopeOptions& opt) {
  if (m_lo < 1 || m_hi < m_lo + 1 || m_hi > 40) throw Error(ErrorCode::ShapeMismatch, "need 1 <= m_lo < m_hi <= 40");
  if (opt.samples == 0) throw Error(ErrorCode::ShapeMismatch, "samples must be positive");
  require_valid(sys, p);
  if (prune_zeros(sys, p).all_mass_on_one_group)
    throw Error(ErrorCode::DegenerateMeasure, "measure is a point mass");
  const detail::UnitSystem u = detail::unit_system(sys);
  const std::vector<double> flat = p.flat();
  std::vector<double> cumulative(flat.size());
  std::partial_sum(flat.begin(), flat.end(), cumulative.begin());
  const double target = std::ldexp(1.0, -m_hi);
  const double cells = std::ldexp(1.0, m_hi);

  const std::uint64_t chunks = std::min(detail::kMonteCarloChunks, opt.samples);
  std::vector<std::uint64_t> keys(opt.samples);
  detail::run_chunks(chunks, opt.threads, [&](std::uint64_t c) {
    auto rng = detail::chunk_stream(opt.seed, c);
    const std::uint64_t begin = opt.samples * c / chunks, end = opt.samples * (c + 1) / chunks;
    for (std::uint64_t i = begin; i < end; ++i) {
      double ratio = 1.0, shift = 0.0;
      while (ratio >= target) {
        const std::size_t s = detail::draw_index(cumulative, rng);
        shift += ratio * u.shift[s];
        ratio *= u.ratio[s];
      }
      keys[i] = static_cast<std::uint64_t>(std::clamp(std::floor(shift * cells), 0.0, cells - 1.0));
    }
  });
  std::sort(keys.begin(), keys.end());
  const double n = static_cast<double>(opt.samples);
  ScalingFit fit;
  for (int m = m_lo; m <= m_hi; ++m) {
    const int shift = m_hi - m;
    double h = 0.0;
    std::size_t start = 0;
    for (std::size_t k = 1; k <= keys.size(); ++k) {
      if (k == keys.size() || (keys[k] >> shift) != (keys[start] >> shift)) {
        const double q = static_cast<double>(k - start) / n;
        h -= q * std::log2(q);
        start = k;
      }
    }
    fit.scales.push_back(m);
    fit.counts.push_back(h);
  }
  fit.window = default_window(m_lo, m_hi);
  detail::fit_window(fit, false);
  return fit;
}

}  // namespace cfsdim

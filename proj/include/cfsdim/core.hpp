#pragma once

// Domain model for self-similar systems on the line whose maps are grouped by
// a shared fixed point:  f_{i,j}(x) = lambda_{i,j} x + t_i (1 - lambda_{i,j}).

#include <cmath>
#include <compare>
#include <initializer_list>
#include <cstddef>
#include <optional>
#include <algorithm>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cfsdim/error.hpp"

namespace cfsdim {

using Rational = boost::multiprecision::cpp_rational;

enum class NumberMode { Float, Rational };

/// Zero-based (group, member) pair. Serialized one-based.
struct Symbol {
  int group = 0;
  int member = 0;

  auto operator<=>(const Symbol&) const = default;
};

/// x -> ratio * x + intercept.
template <class T>
struct AffineMap1D {
  T ratio{1};
  T intercept{0};

  T operator()(const T& x) const { return ratio * x + intercept; }

  bool operator==(const AffineMap1D&) const = default;
};

/// (outer o inner)(x) = outer(inner(x)).
template <class T>
AffineMap1D<T> compose(const AffineMap1D<T>& outer, const AffineMap1D<T>& inner) {
  return {outer.ratio * inner.ratio, outer.ratio * inner.intercept + outer.intercept};
}

template <class T>
inline T to_number(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>) {
    return q;
  } else {
    return static_cast<T>(q);
  }
}

class CFSystem {
 public:
  CFSystem() = default;

  CFSystem(std::vector<double> fixed_points, std::vector<std::vector<double>> ratios)
      : mode_(NumberMode::Float), fixed_points_(std::move(fixed_points)), ratios_(std::move(ratios)) {
    build_offsets();
  }

  /// Braced literals of doubles select float mode.
  CFSystem(std::initializer_list<double> fixed_points, std::initializer_list<std::initializer_list<double>> ratios)
      : mode_(NumberMode::Float), fixed_points_(fixed_points) {
    for (const auto& g : ratios) ratios_.emplace_back(g);
    build_offsets();
  }

  CFSystem(std::vector<Rational> fixed_points, std::vector<std::vector<Rational>> ratios)
      : mode_(NumberMode::Rational),
        exact_fixed_points_(std::move(fixed_points)),
        exact_ratios_(std::move(ratios)) {
    for (const auto& t : exact_fixed_points_) fixed_points_.push_back(static_cast<double>(t));
    for (const auto& group : exact_ratios_) {
      auto& row = ratios_.emplace_back();
      for (const auto& r : group) row.push_back(static_cast<double>(r));
    }
    build_offsets();
  }

  NumberMode mode() const { return mode_; }
  bool is_exact() const { return mode_ == NumberMode::Rational; }

  std::size_t group_count() const { return fixed_points_.size(); }
  std::size_t group_size(std::size_t group) const { return ratios_.at(group).size(); }
  std::size_t symbol_count() const { return offsets_.empty() ? 0 : offsets_.back(); }

  double fixed_point(std::size_t group) const { return fixed_points_[group]; }
  double ratio(Symbol s) const { return ratios_[s.group][s.member]; }

  const std::vector<double>& fixed_points() const { return fixed_points_; }
  const std::vector<std::vector<double>>& ratios() const { return ratios_; }
  const std::vector<Rational>& exact_fixed_points() const { return exact_fixed_points_; }
  const std::vector<std::vector<Rational>>& exact_ratios() const { return exact_ratios_; }

  /// Fixed point / ratio as T. Float-mode values convert to Rational exactly.
  template <class T>
  T fixed_point_as(std::size_t group) const {
    if constexpr (std::is_same_v<T, Rational>) {
      return is_exact() ? exact_fixed_points_[group] : Rational(fixed_points_[group]);
    } else {
      return static_cast<T>(fixed_points_[group]);
    }
  }

  template <class T>
  T ratio_as(Symbol s) const {
    if constexpr (std::is_same_v<T, Rational>) {
      return is_exact() ? exact_ratios_[s.group][s.member] : Rational(ratios_[s.group][s.member]);
    } else {
      return static_cast<T>(ratios_[s.group][s.member]);
    }
  }

  std::size_t flat_index(Symbol s) const { return offsets_[s.group] + static_cast<std::size_t>(s.member); }

  Symbol symbol_at(std::size_t flat) const {
    std::size_t g = 0;
    while (offsets_[g + 1] <= flat) ++g;
    return {static_cast<int>(g), static_cast<int>(flat - offsets_[g])};
  }

  std::vector<Symbol> symbols() const {
    std::vector<Symbol> out;
    for (std::size_t g = 0; g < group_count(); ++g)
      for (std::size_t j = 0; j < group_size(g); ++j) out.push_back({static_cast<int>(g), static_cast<int>(j)});
    return out;
  }

  bool contains(Symbol s) const {
    return s.group >= 0 && static_cast<std::size_t>(s.group) < group_count() && s.member >= 0 &&
           static_cast<std::size_t>(s.member) < group_size(static_cast<std::size_t>(s.group));
  }

  double max_ratio() const {
    double m = 0.0;
    for (const auto& g : ratios_)
      for (double r : g) m = std::max(m, r);
    return m;
  }

  double min_fixed_point() const {
    double m = fixed_points_.front();
    for (double t : fixed_points_) m = std::min(m, t);
    return m;
  }

  double max_fixed_point() const {
    double m = fixed_points_.front();
    for (double t : fixed_points_) m = std::max(m, t);
    return m;
  }

  bool operator==(const CFSystem& other) const {
    return mode_ == other.mode_ && fixed_points_ == other.fixed_points_ && ratios_ == other.ratios_ &&
           exact_fixed_points_ == other.exact_fixed_points_ && exact_ratios_ == other.exact_ratios_;
  }

 private:
  void build_offsets() {
    offsets_.assign(1, 0);
    for (const auto& g : ratios_) offsets_.push_back(offsets_.back() + g.size());
  }

  NumberMode mode_ = NumberMode::Float;
  std::vector<double> fixed_points_;
  std::vector<std::vector<double>> ratios_;
  std::vector<Rational> exact_fixed_points_;
  std::vector<std::vector<Rational>> exact_ratios_;
  std::vector<std::size_t> offsets_;
};

/// Ragged weights p_{i,j}, aligned with a CFSystem.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<std::vector<double>> weights) : weights_(std::move(weights)) {}

  static ProbVector uniform(const CFSystem& sys) {
    const double w = 1.0 / static_cast<double>(sys.symbol_count());
    std::vector<std::vector<double>> weights;
    for (std::size_t g = 0; g < sys.group_count(); ++g) weights.emplace_back(sys.group_size(g), w);
    return ProbVector(std::move(weights));
  }

  const std::vector<std::vector<double>>& weights() const { return weights_; }
  double weight(Symbol s) const { return weights_[s.group][s.member]; }

  double group_mass(std::size_t group) const {
    double m = 0.0;
    for (double w : weights_[group]) m += w;
    return m;
  }

  /// Mass outside a group, summed directly so that it stays accurate when the group holds nearly all mass.
  double mass_outside(std::size_t group) const {
    double m = 0.0;
    for (std::size_t g = 0; g < weights_.size(); ++g)
      if (g != group) m += group_mass(g);
    return m;
  }

  std::vector<double> flat() const {
    std::vector<double> out;
    for (const auto& g : weights_) out.insert(out.end(), g.begin(), g.end());
    return out;
  }

  bool operator==(const ProbVector&) const = default;

 private:
  std::vector<std::vector<double>> weights_;
};

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

inline std::vector<ValidationIssue> validate_system(const CFSystem& sys) {
  std::vector<ValidationIssue> issues;
  if (sys.group_count() < 2)
    issues.push_back({ErrorCode::TooFewGroups, "a system needs at least two distinct fixed points"});
  if (sys.ratios().size() != sys.fixed_points().size())
    issues.push_back({ErrorCode::ShapeMismatch, "ratios and fixed_points have different lengths"});
  for (std::size_t g = 0; g < sys.ratios().size(); ++g) {
    if (sys.ratios()[g].empty())
      issues.push_back({ErrorCode::EmptyGroup, "group " + std::to_string(g + 1) + " has no maps"});
    for (std::size_t j = 0; j < sys.ratios()[g].size(); ++j) {
      bool ok;
      if (sys.is_exact()) {
        const Rational& r = sys.exact_ratios()[g][j];
        ok = r > 0 && r < 1;
      } else {
        const double r = sys.ratios()[g][j];
        ok = std::isfinite(r) && r > 0.0 && r < 1.0;
      }
      if (!ok)
        issues.push_back({ErrorCode::RatioOutOfRange, "ratio (" + std::to_string(g + 1) + "," +
                                                          std::to_string(j + 1) + ") must lie in (0,1)"});
    }
  }
  for (std::size_t a = 0; a < sys.fixed_points().size(); ++a) {
    if (!std::isfinite(sys.fixed_points()[a]))
      issues.push_back({ErrorCode::ShapeMismatch, "fixed point " + std::to_string(a + 1) + " is not finite"});
    for (std::size_t b = a + 1; b < sys.fixed_points().size(); ++b) {
      const bool same = sys.is_exact() ? sys.exact_fixed_points()[a] == sys.exact_fixed_points()[b]
                                       : sys.fixed_points()[a] == sys.fixed_points()[b];
      if (same)
        issues.push_back({ErrorCode::DuplicateFixedPoint, "groups " + std::to_string(a + 1) + " and " +
                                                              std::to_string(b + 1) + " share a fixed point"});
    }
  }
  return issues;
}

inline std::vector<ValidationIssue> validate_probabilities(const CFSystem& sys, const ProbVector& p) {
  std::vector<ValidationIssue> issues;
  const auto& w = p.weights();
  bool shape_ok = w.size() == sys.group_count();
  for (std::size_t g = 0; shape_ok && g < w.size(); ++g) shape_ok = w[g].size() == sys.group_size(g);
  if (!shape_ok) {
    issues.push_back({ErrorCode::ShapeMismatch, "probabilities do not match the system shape"});
    return issues;
  }
  double total = 0.0;
  for (const auto& g : w)
    for (double x : g) {
      if (!(x >= 0.0) || !std::isfinite(x))
        issues.push_back({ErrorCode::InvalidProbability, "probabilities must be finite and nonnegative"});
      total += x;
    }
  if (std::abs(total - 1.0) > 1e-12)
    issues.push_back({ErrorCode::InvalidProbability, "probabilities sum to " + std::to_string(total)});
  return issues;
}

inline void require_valid(const CFSystem& sys) {
  auto issues = validate_system(sys);
  if (!issues.empty()) throw Error(issues.front().code, issues.front().message);
}

inline void require_valid(const CFSystem& sys, const ProbVector& p) {
  require_valid(sys);
  auto issues = validate_probabilities(sys, p);
  if (!issues.empty()) throw Error(issues.front().code, issues.front().message);
}

template <class T = double>
AffineMap1D<T> map_of(const CFSystem& sys, Symbol s) {
  const T ratio = sys.ratio_as<T>(s);
  return {ratio, sys.fixed_point_as<T>(static_cast<std::size_t>(s.group)) * (T(1) - ratio)};
}

struct PrunedSystem {
  CFSystem system;
  ProbVector probabilities;
  std::vector<Symbol> origin;  // original symbol of each retained (group, member), flattened
  std::vector<std::size_t> group_origin;
  bool all_mass_on_one_group = false;
};

/// Drops zero-weight symbols and the groups they empty.
inline PrunedSystem prune_zeros(const CFSystem& sys, const ProbVector& p) {
  PrunedSystem out;
  std::vector<double> t;
  std::vector<std::vector<double>> ratios;
  std::vector<Rational> exact_t;
  std::vector<std::vector<Rational>> exact_ratios;
  std::vector<std::vector<double>> weights;
  for (std::size_t g = 0; g < sys.group_count(); ++g) {
    std::vector<double> r_row, w_row;
    std::vector<Rational> q_row;
    for (std::size_t j = 0; j < sys.group_size(g); ++j) {
      const Symbol s{static_cast<int>(g), static_cast<int>(j)};
      if (p.weight(s) > 0.0) {
        r_row.push_back(sys.ratio(s));
        if (sys.is_exact()) q_row.push_back(sys.exact_ratios()[g][j]);
        w_row.push_back(p.weight(s));
        out.origin.push_back(s);
      }
    }
    if (r_row.empty()) continue;
    out.group_origin.push_back(g);
    t.push_back(sys.fixed_point(g));
    ratios.push_back(std::move(r_row));
    weights.push_back(std::move(w_row));
    if (sys.is_exact()) {
      exact_t.push_back(sys.exact_fixed_points()[g]);
      exact_ratios.push_back(std::move(q_row));
    }
  }
  out.system = sys.is_exact() ? CFSystem(std::move(exact_t), std::move(exact_ratios))
                              : CFSystem(std::move(t), std::move(ratios));
  out.probabilities = ProbVector(std::move(weights));
  out.all_mass_on_one_group = out.system.group_count() == 1;
  return out;
}

}  // namespace cfsdim

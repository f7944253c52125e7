#pragma once

// Finite-depth probe of exponential separation for common-fixed-point systems.
// Words of equal length with equal contraction either share a block signature
// (identical maps) or should have projections at least 2^{-bn} apart. A finite
// depth never certifies the asymptotic condition; the probe only reports what
// it saw.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfsdim/core.hpp"
#include "cfsdim/symbolic.hpp"

namespace cfsdim {

inline constexpr double kProductMergeTolerance = 1e-12;
inline constexpr double kFloatGapThreshold = 1e-12;

struct CollisionBucket {
  double log_ratio = 0.0;
  std::optional<Rational> exact_ratio;
  std::vector<BlockSignature> signatures;
};

enum class SeparationStatus { Consistent, Violated, Indeterminate, NoPairs };

inline std::string to_string(SeparationStatus s) {
  switch (s) {
    case SeparationStatus::Consistent: return "consistent-up-to-n";
    case SeparationStatus::Violated: return "violated-with-witness";
    case SeparationStatus::Indeterminate: return "indeterminate";
    case SeparationStatus::NoPairs: return "no-equal-contraction-pairs";
  }
  return "unknown";
}

struct SeparationWitness {
  BlockSignature first, second;
  Word first_word, second_word;
};

struct SeparationReport {
  int depth = 0;
  std::uint64_t class_count = 0;
  std::size_t bucket_count = 0;
  std::uint64_t pairs_compared = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  std::optional<Rational> exact_min_gap;  // rational mode
  bool exact_zero = false;
  std::optional<SeparationWitness> witness;
  double implied_b = -std::numeric_limits<double>::infinity();
  NumberMode mode = NumberMode::Float;
  SeparationStatus status = SeparationStatus::NoPairs;
  bool identity_holds = true;  // equal ratio and equal intercept always meant equal maps
};

/// Signatures of length n grouped by equal contraction ratio.
inline std::vector<CollisionBucket> collision_buckets(const CFSystem& sys, int depth,
                                                      std::uint64_t budget = 10'000'000) {
  std::vector<CollisionBucket> out;
  if (sys.is_exact()) {
    std::map<Rational, std::size_t> index;
    for_each_signature(
        sys, depth,
        [&](const BlockSignature& sig) {
          Rational prod(1);
          for (const auto& b : sig.blocks)
            for (std::size_t j = 0; j < b.counts.size(); ++j)
              for (int c = 0; c < b.counts[j]; ++c) prod *= sys.exact_ratios()[static_cast<std::size_t>(b.group)][j];
          auto [it, inserted] = index.try_emplace(prod, out.size());
          if (inserted) {
            CollisionBucket bucket;
            bucket.log_ratio = std::log(static_cast<double>(prod));
            bucket.exact_ratio = prod;
            out.push_back(std::move(bucket));
          }
          out[it->second].signatures.push_back(sig);
        },
        budget);
    return out;
  }

  // Generic case: equal contraction iff equal count vectors. Then merge count classes
  // whose products agree to the relative threshold (multiplicative relations).
  std::map<std::vector<int>, std::size_t> index;
  std::vector<CollisionBucket> by_counts;
  for_each_signature(
      sys, depth,
      [&](const BlockSignature& sig) {
        const auto counts = count_vector(sys, sig);
        auto [it, inserted] = index.try_emplace(counts, by_counts.size());
        if (inserted) {
          CollisionBucket bucket;
          double lr = 0.0;
          for (std::size_t s = 0; s < counts.size(); ++s)
            if (counts[s] > 0) lr += counts[s] * std::log(sys.ratio(sys.symbol_at(s)));
          bucket.log_ratio = lr;
          by_counts.push_back(std::move(bucket));
        }
        by_counts[it->second].signatures.push_back(sig);
      },
      budget);
  std::sort(by_counts.begin(), by_counts.end(),
            [](const CollisionBucket& a, const CollisionBucket& b) { return a.log_ratio < b.log_ratio; });
  for (auto& b : by_counts) {
    if (!out.empty() && std::abs(b.log_ratio - out.back().log_ratio) <= kProductMergeTolerance) {
      auto& dst = out.back().signatures;
      dst.insert(dst.end(), std::make_move_iterator(b.signatures.begin()), std::make_move_iterator(b.signatures.end()));
    } else {
      out.push_back(std::move(b));
    }
  }
  return out;
}

namespace detail {

template <class T>
void scan_bucket(const CFSystem& sys, const CollisionBucket& bucket, SeparationReport& rep, T& best_gap, bool& have_best) {
  struct Entry {
    T position;
    std::size_t index;
  };
  std::vector<Entry> entries;
  entries.reserve(bucket.signatures.size());
  for (std::size_t k = 0; k < bucket.signatures.size(); ++k)
    entries.push_back({project<T>(sys, representative(bucket.signatures[k])), k});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.position < b.position; });
  rep.pairs_compared += entries.size() * (entries.size() - 1) / 2;
  for (std::size_t k = 1; k < entries.size(); ++k) {
    const T gap = entries[k].position - entries[k - 1].position;
    if (!have_best || gap < best_gap) {
      best_gap = gap;
      have_best = true;
      const auto& a = bucket.signatures[entries[k - 1].index];
      const auto& b = bucket.signatures[entries[k].index];
      rep.witness = SeparationWitness{a, b, representative(a), representative(b)};
    }
    if (gap == T(0)) {
      // equal ratio and equal intercept: the two composed maps must coincide
      const auto fa = compose_word<T>(sys, representative(bucket.signatures[entries[k - 1].index]));
      const auto fb = compose_word<T>(sys, representative(bucket.signatures[entries[k].index]));
      if constexpr (std::is_same_v<T, Rational>) {
        rep.identity_holds = rep.identity_holds && fa == fb;
      } else {
        rep.identity_holds = rep.identity_holds && std::abs(fa.ratio - fb.ratio) <= 1e-12 * fa.ratio;
      }
    }
  }
}

}  // namespace detail

/// Minimal projection gap between distinct signatures of equal contraction at one depth.
inline SeparationReport min_gap(const CFSystem& sys, int depth, std::uint64_t budget = 10'000'000) {
  SeparationReport rep;
  rep.depth = depth;
  rep.mode = sys.mode();
  const auto buckets = collision_buckets(sys, depth, budget);
  rep.bucket_count = buckets.size();
  for (const auto& b : buckets) rep.class_count += b.signatures.size();

  if (sys.is_exact()) {
    Rational best;
    bool have = false;
    for (const auto& b : buckets)
      if (b.signatures.size() > 1) detail::scan_bucket<Rational>(sys, b, rep, best, have);
    if (!have) return rep;
    rep.exact_min_gap = best;
    rep.min_gap = static_cast<double>(best);
    rep.exact_zero = best == 0;
    rep.status = rep.exact_zero ? SeparationStatus::Violated : SeparationStatus::Consistent;
  } else {
    double best = 0.0;
    bool have = false;
    for (const auto& b : buckets)
      if (b.signatures.size() > 1) detail::scan_bucket<double>(sys, b, rep, best, have);
    if (!have) return rep;
    rep.min_gap = best;
    double scale = 0.0;
    for (double t : sys.fixed_points()) scale = std::max(scale, std::abs(t));
    rep.status = best <= kFloatGapThreshold * std::max(1.0, scale) ? SeparationStatus::Indeterminate
                                                                    : SeparationStatus::Consistent;
  }
  if (rep.min_gap > 0.0) rep.implied_b = -std::log2(rep.min_gap) / depth;
  return rep;
}

struct EscProbe {
  std::vector<SeparationReport> rows;
  SeparationStatus verdict = SeparationStatus::NoPairs;
  double b_hat = -std::numeric_limits<double>::infinity();
};

/// min_gap for n = 2..n_max; b_hat is the largest implied exponent seen.
inline EscProbe esc_probe(const CFSystem& sys, int n_max, std::uint64_t budget = 10'000'000) {
  EscProbe probe;
  bool indeterminate = false, violated = false, any = false;
  for (int n = 2; n <= n_max; ++n) {
    probe.rows.push_back(min_gap(sys, n, budget));
    const auto& r = probe.rows.back();
    violated = violated || r.status == SeparationStatus::Violated;
    indeterminate = indeterminate || r.status == SeparationStatus::Indeterminate;
    if (r.status == SeparationStatus::Consistent) {
      any = true;
      probe.b_hat = std::max(probe.b_hat, r.implied_b);
    }
  }
  if (violated)
    probe.verdict = SeparationStatus::Violated;
  else if (indeterminate)
    probe.verdict = SeparationStatus::Indeterminate;
  else if (any)
    probe.verdict = SeparationStatus::Consistent;
  return probe;
}

}  // namespace cfsdim

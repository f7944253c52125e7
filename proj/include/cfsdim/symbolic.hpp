#pragma once

// Finite words over the symbol set, their block decomposition, and the natural
// projection of finite words.
//
// A block is a maximal run of symbols from one group. Maps inside a group
// commute, so a word's composed map depends only on its sequence of blocks and
// the per-member counts inside each block: two words with equal BlockSignature
// are exact overlaps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "cfsdim/core.hpp"
#include "cfsdim/error.hpp"

namespace cfsdim {

using Word = std::vector<Symbol>;

inline constexpr std::uint64_t kDefaultBudget = 100'000'000;

struct Block {
  int group = 0;
  std::vector<int> counts;  // indexed by member, length n_group

  int length() const {
    int n = 0;
    for (int c : counts) n += c;
    return n;
  }

  bool operator==(const Block&) const = default;
};

struct BlockSignature {
  std::vector<Block> blocks;

  std::size_t block_count() const { return blocks.size(); }

  int length() const {
    int n = 0;
    for (const auto& b : blocks) n += b.length();
    return n;
  }

  bool operator==(const BlockSignature&) const = default;
};

struct BlockSignatureHash {
  std::size_t operator()(const BlockSignature& sig) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (const auto& b : sig.blocks) {
      mix(static_cast<std::uint64_t>(b.group) + 1000003ull);
      for (int c : b.counts) mix(static_cast<std::uint64_t>(c));
    }
    return static_cast<std::size_t>(h);
  }
};

inline BlockSignature decompose(const CFSystem& sys, const Word& w) {
  BlockSignature sig;
  for (const Symbol& s : w) {
    if (sig.blocks.empty() || sig.blocks.back().group != s.group) {
      sig.blocks.push_back({s.group, std::vector<int>(sys.group_size(static_cast<std::size_t>(s.group)), 0)});
    }
    ++sig.blocks.back().counts[static_cast<std::size_t>(s.member)];
  }
  return sig;
}

inline bool same_block_structure(const CFSystem& sys, const Word& a, const Word& b) {
  return decompose(sys, a) == decompose(sys, b);
}

/// One canonical word per signature: inside each block, members in increasing order.
inline Word representative(const BlockSignature& sig) {
  Word w;
  for (const auto& b : sig.blocks)
    for (std::size_t j = 0; j < b.counts.size(); ++j)
      for (int c = 0; c < b.counts[j]; ++c) w.push_back({b.group, static_cast<int>(j)});
  return w;
}

/// f_{w_1} o f_{w_2} o ... o f_{w_n}.
template <class T = double>
AffineMap1D<T> compose_word(const CFSystem& sys, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::EmptyWord, "cannot compose an empty word");
  AffineMap1D<T> acc = map_of<T>(sys, w.front());
  for (std::size_t k = 1; k < w.size(); ++k) acc = compose(acc, map_of<T>(sys, w[k]));
  return acc;
}

/// Pi(w) = f_w(0) evaluated through the block expansion
///   t_{b_1} + sum_l lambda_{b_1}...lambda_{b_l} (t_{b_{l+1}} - t_{b_l}),
/// where the point 0 plays the role of t_{b_{B+1}}.
template <class T = double>
T project(const CFSystem& sys, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::EmptyWord, "cannot project an empty word");
  const BlockSignature sig = decompose(sys, w);
  std::vector<T> block_ratio;
  std::size_t pos = 0;
  for (const auto& b : sig.blocks) {
    T r(1);
    for (int k = 0; k < b.length(); ++k) r *= sys.ratio_as<T>(w[pos++]);
    block_ratio.push_back(r);
  }
  const auto t_of = [&](std::size_t l) { return sys.fixed_point_as<T>(static_cast<std::size_t>(sig.blocks[l].group)); };
  T value = t_of(0);
  T prefix(1);
  for (std::size_t l = 0; l < sig.blocks.size(); ++l) {
    prefix *= block_ratio[l];
    const T next = l + 1 < sig.blocks.size() ? t_of(l + 1) : T(0);
    value += prefix * (next - t_of(l));
  }
  return value;
}

/// Occurrences of each symbol, flattened in system order.
inline std::vector<int> count_vector(const CFSystem& sys, const Word& w) {
  std::vector<int> counts(sys.symbol_count(), 0);
  for (const Symbol& s : w) ++counts[sys.flat_index(s)];
  return counts;
}

inline std::vector<int> count_vector(const CFSystem& sys, const BlockSignature& sig) {
  std::vector<int> counts(sys.symbol_count(), 0);
  for (const auto& b : sig.blocks)
    for (std::size_t j = 0; j < b.counts.size(); ++j)
      counts[sys.flat_index({b.group, static_cast<int>(j)})] += b.counts[j];
  return counts;
}

inline double log_multinomial(const std::vector<int>& counts) {
  int total = 0;
  double out = 0.0;
  for (int c : counts) {
    total += c;
    out -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return out + std::lgamma(static_cast<double>(total) + 1.0);
}

/// log of sum_{w in class} p_w  =  log p_w + sum_blocks log multinomial(block).
inline double log_class_weight(const BlockSignature& sig, const ProbVector& p) {
  double out = 0.0;
  for (const auto& b : sig.blocks) {
    for (std::size_t j = 0; j < b.counts.size(); ++j) {
      if (b.counts[j] == 0) continue;
      const double w = p.weight({b.group, static_cast<int>(j)});
      if (w <= 0.0) return -std::numeric_limits<double>::infinity();
      out += b.counts[j] * std::log(w);
    }
    out += log_multinomial(b.counts);
  }
  return out;
}

inline double class_weight(const BlockSignature& sig, const ProbVector& p) { return std::exp(log_class_weight(sig, p)); }

inline Rational class_weight_exact(const BlockSignature& sig, const std::vector<std::vector<Rational>>& p) {
  using boost::multiprecision::cpp_int;
  Rational out(1);
  for (const auto& b : sig.blocks) {
    cpp_int numer(1);
    int total = 0;
    for (std::size_t j = 0; j < b.counts.size(); ++j) {
      for (int c = 1; c <= b.counts[j]; ++c) {
        out *= p[static_cast<std::size_t>(b.group)][j];
        numer *= ++total;
        numer /= c;  // running product stays integral: it is a product of binomials
      }
    }
    out *= Rational(numer);
  }
  return out;
}

inline std::uint64_t checked_power(std::uint64_t base, int exponent, std::uint64_t budget) {
  std::uint64_t v = 1;
  for (int k = 0; k < exponent; ++k) {
    if (base != 0 && v > budget / base) return budget + 1;
    v *= base;
  }
  return v;
}

/// Lexicographic odometer over Sigma_n.
class WordEnumerator {
 public:
  WordEnumerator(const CFSystem& sys, int length, std::uint64_t budget = kDefaultBudget)
      : symbols_(sys.symbols()), digits_(static_cast<std::size_t>(length), 0) {
    if (checked_power(symbols_.size(), length, budget) > budget)
      throw Error(ErrorCode::BudgetExceeded, "word enumeration exceeds the configured budget");
  }

  /// Writes the next word into `out`; false when exhausted.
  bool next(Word& out) {
    if (done_) return false;
    out.resize(digits_.size());
    for (std::size_t k = 0; k < digits_.size(); ++k) out[k] = symbols_[digits_[k]];
    std::size_t k = digits_.size();
    while (k > 0) {
      --k;
      if (++digits_[k] < symbols_.size()) return true;
      digits_[k] = 0;
    }
    done_ = true;
    return true;
  }

 private:
  std::vector<Symbol> symbols_;
  std::vector<std::size_t> digits_;
  bool done_ = false;
};

inline std::vector<Word> enumerate_words(const CFSystem& sys, int length, std::uint64_t budget = kDefaultBudget) {
  std::vector<Word> out;
  WordEnumerator it(sys, length, budget);
  Word w;
  while (it.next(w)) out.push_back(w);
  return out;
}

namespace detail {

inline void for_each_count_vector(int members, int total, std::vector<int>& counts, std::size_t pos,
                                  const std::function<void()>& fn) {
  if (pos + 1 == static_cast<std::size_t>(members)) {
    counts[pos] = total;
    fn();
    return;
  }
  for (int c = total; c >= 0; --c) {
    counts[pos] = c;
    for_each_count_vector(members, total - c, counts, pos + 1, fn);
  }
}

inline void signature_walk(const CFSystem& sys, int remaining, int previous_group, BlockSignature& current,
                           const std::function<void(const BlockSignature&)>& fn, std::uint64_t& visited,
                           std::uint64_t budget) {
  if (remaining == 0) {
    if (++visited > budget) throw Error(ErrorCode::BudgetExceeded, "signature enumeration exceeds the budget");
    fn(current);
    return;
  }
  for (std::size_t g = 0; g < sys.group_count(); ++g) {
    if (static_cast<int>(g) == previous_group) continue;
    const int members = static_cast<int>(sys.group_size(g));
    for (int len = 1; len <= remaining; ++len) {
      std::vector<int> counts(static_cast<std::size_t>(members), 0);
      for_each_count_vector(members, len, counts, 0, [&] {
        current.blocks.push_back({static_cast<int>(g), counts});
        signature_walk(sys, remaining - len, static_cast<int>(g), current, fn, visited, budget);
        current.blocks.pop_back();
      });
    }
  }
}

}  // namespace detail

/// Visits every BlockSignature realized by some word of the given length, once each.
inline std::uint64_t for_each_signature(const CFSystem& sys, int length,
                                        const std::function<void(const BlockSignature&)>& fn,
                                        std::uint64_t budget = kDefaultBudget) {
  BlockSignature current;
  std::uint64_t visited = 0;
  detail::signature_walk(sys, length, -1, current, fn, visited, budget);
  return visited;
}

inline std::vector<BlockSignature> enumerate_signatures(const CFSystem& sys, int length,
                                                        std::uint64_t budget = kDefaultBudget) {
  std::vector<BlockSignature> out;
  for_each_signature(sys, length, [&](const BlockSignature& s) { out.push_back(s); }, budget);
  return out;
}

}  // namespace cfsdim

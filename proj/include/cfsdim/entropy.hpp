#pragma once

// Entropy, Lyapunov exponent and the overlap correction Phi(p).
//
// Phi(p) = sum_{l,m} sum_{k>=0} sum_{q=0}^{k} C(k,q) p_{l,m}^{q+1} (rho_l - p_{l,m})^{k-q}
//            (1 - rho_l) log((q+1)/(k+1)),          rho_l = sum_j p_{l,j}.
//
// Equivalently Phi(p) = E[log(Y / (k-1))] for an i.i.d. symbol stream whose first
// symbol X_1 opens a run inside its group, k is the first exit time from that
// group and Y counts the occurrences of X_1 before the exit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cfsdim/core.hpp"
#include "cfsdim/symbolic.hpp"

namespace cfsdim {

inline constexpr double kDefaultTolerance = 1e-10;

struct PhiResult {
  double value = 0.0;       // nats
  double tail_bound = 0.0;  // series: truncation bound; Monte-Carlo: 0
  double stderr_ = 0.0;     // Monte-Carlo only
  long long terms_used = 0; // outer truncation index K (largest over groups) or sample count
  std::string method;
};

struct RWEntropyResult {
  double value = 0.0;  // nats per step
  std::string method;
  int depth = 0;
  std::vector<double> entropies;   // H_1 .. H_n
  std::vector<double> increments;  // H_2 - H_1, ..., H_n - H_{n-1}
};

inline double shannon_entropy(const ProbVector& p) {
  double h = 0.0;
  for (const auto& g : p.weights())
    for (double x : g)
      if (x > 0.0) h -= x * std::log(x);
  return h;
}

inline double lyapunov(const CFSystem& sys, const ProbVector& p) {
  double chi = 0.0;
  for (std::size_t g = 0; g < sys.group_count(); ++g)
    for (std::size_t j = 0; j < sys.group_size(g); ++j) {
      const Symbol s{static_cast<int>(g), static_cast<int>(j)};
      if (p.weight(s) > 0.0) chi -= p.weight(s) * std::log(sys.ratio(s));
    }
  return chi;
}

namespace detail {

/// E[log((Q+1)/(k+1))] for Q ~ Binomial(k, success). Walks outward from the mode
/// with the multiplicative pmf recurrence, so no factorial ever overflows.
inline double binomial_log_ratio_mean(long long k, double success) {
  if (k == 0) return 0.0;
  if (success >= 1.0) return 0.0;
  const double kk = static_cast<double>(k);
  const double log_k1 = std::log(kk + 1.0);
  if (success <= 0.0) return -log_k1;
  const double odds = success / (1.0 - success);
  long long mode = static_cast<long long>(std::floor((kk + 1.0) * success));
  mode = std::clamp(mode, 0LL, k);
  const double md = static_cast<double>(mode);
  const double log_pmf_mode = std::lgamma(kk + 1.0) - std::lgamma(md + 1.0) - std::lgamma(kk - md + 1.0) +
                              md * std::log(success) + (kk - md) * std::log1p(-success);
  const double pmf_mode = std::exp(log_pmf_mode);
  constexpr double cutoff = 1e-30;

  double sum = pmf_mode * (std::log(md + 1.0) - log_k1);
  double pmf = pmf_mode;
  for (long long q = mode; q < k; ++q) {
    pmf *= static_cast<double>(k - q) / static_cast<double>(q + 1) * odds;
    if (pmf < cutoff) break;
    sum += pmf * (std::log(static_cast<double>(q + 2)) - log_k1);
  }
  pmf = pmf_mode;
  for (long long q = mode; q > 0; --q) {
    pmf *= static_cast<double>(q) / static_cast<double>(k - q + 1) / odds;
    if (pmf < cutoff) break;
    sum += pmf * (std::log(static_cast<double>(q)) - log_k1);
  }
  return sum;
}

/// Upper bound on the group-l contribution of all outer terms with index > K.
inline double phi_group_tail_bound(double rho, double outside, long long K) {
  const double kk = static_cast<double>(K);
  return std::pow(rho, kk + 1.0) / outside * (std::log(kk + 2.0) + 1.0 / (outside * (kk + 2.0)));
}

inline void require_nondegenerate(const PrunedSystem& pruned) {
  if (pruned.all_mass_on_one_group)
    throw Error(ErrorCode::DegenerateMeasure, "all probability mass sits in one group; the measure is a point mass");
}

/// Phi contribution of one group with weights `members`, mass outside the group `outside`.
inline double phi_group_series(const std::vector<double>& members, double outside, double tol, long long& K_used,
                               double& tail) {
  K_used = 0;
  tail = 0.0;
  if (members.size() < 2) return 0.0;
  double rho = 0.0;
  for (double a : members) rho += a;
  constexpr long long k_cap = 50'000'000;
  long long K = 0;
  while (phi_group_tail_bound(rho, outside, K) >= tol) {
    K = K < 64 ? K + 1 : K + K / 8;
    if (K > k_cap) throw Error(ErrorCode::NonConvergence, "Phi series needs more than 5e7 terms; group mass too close to 1");
  }
  // refine back down to the smallest admissible K
  long long lo = K / 2, hi = K;
  while (lo + 1 < hi) {
    const long long mid = (lo + hi) / 2;
    (phi_group_tail_bound(rho, outside, mid) < tol ? hi : lo) = mid;
  }
  K = phi_group_tail_bound(rho, outside, lo) < tol ? lo : hi;

  double total = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const double a = members[m];
    double rest = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j)
      if (j != m) rest += members[j];
    const double success = a / (a + rest);
    double rho_pow = 1.0;
    double partial = 0.0;
    for (long long k = 1; k <= K; ++k) {
      rho_pow *= rho;
      if (rho_pow == 0.0) break;
      partial += rho_pow * binomial_log_ratio_mean(k, success);
    }
    total += a * outside * partial;
  }
  K_used = K;
  tail = phi_group_tail_bound(rho, outside, K);
  return total;
}

}  // namespace detail

/// Truncated Phi series with |value - Phi| <= tail_bound <= tol.
inline PhiResult phi_series(const CFSystem& sys, const ProbVector& p, double tol = kDefaultTolerance) {
  const PrunedSystem pruned = prune_zeros(sys, p);
  detail::require_nondegenerate(pruned);
  PhiResult out;
  out.method = "series";
  const double per_group_tol = tol / static_cast<double>(pruned.system.group_count());
  for (std::size_t g = 0; g < pruned.system.group_count(); ++g) {
    long long K = 0;
    double tail = 0.0;
    out.value += detail::phi_group_series(pruned.probabilities.weights()[g], pruned.probabilities.mass_outside(g),
                                          per_group_tol, K, tail);
    out.tail_bound += tail;
    out.terms_used = std::max(out.terms_used, K);
  }
  return out;
}

/// Jensen lower bound  sum p_{l,m} log(p_{l,m} + mass outside group l).
inline double phi_lower_bound(const CFSystem& sys, const ProbVector& p) {
  double out = 0.0;
  for (std::size_t g = 0; g < sys.group_count(); ++g) {
    const double outside = p.mass_outside(g);
    for (double a : p.weights()[g])
      if (a > 0.0) out += a * std::log(a + outside);
  }
  return out;
}

struct MonteCarloOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::uint64_t max_run_length = 1'000'000;
};

namespace detail {

inline constexpr std::uint64_t kMonteCarloChunks = 64;

/// Independent stream for (seed, chunk). Chunking is fixed, so results do not depend on the thread count.
inline std::mt19937_64 chunk_stream(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), 0x43465344u};
  return std::mt19937_64(seq);
}

inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t draw_index(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  const double u = unit_uniform(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

template <class Fn>
void run_chunks(std::uint64_t chunks, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t c = t; c < chunks; c += threads) fn(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Monte-Carlo estimate of Phi from the run-length representation. Deterministic given the seed.
inline PhiResult phi_monte_carlo(const CFSystem& sys, const ProbVector& p, const MonteCarloOptions& opt) {
  if (opt.samples == 0) throw Error(ErrorCode::InvalidProbability, "samples must be positive");
  const PrunedSystem pruned = prune_zeros(sys, p);
  detail::require_nondegenerate(pruned);
  const std::vector<double> flat = pruned.probabilities.flat();
  std::vector<double> cumulative(flat.size());
  std::partial_sum(flat.begin(), flat.end(), cumulative.begin());
  std::vector<int> group_of(flat.size());
  for (std::size_t s = 0; s < flat.size(); ++s) group_of[s] = pruned.system.symbol_at(s).group;

  const std::uint64_t chunks = std::min(detail::kMonteCarloChunks, opt.samples);
  std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
  detail::run_chunks(chunks, opt.threads, [&](std::uint64_t c) {
    auto rng = detail::chunk_stream(opt.seed, c);
    const std::uint64_t begin = opt.samples * c / chunks, end = opt.samples * (c + 1) / chunks;
    double sum = 0.0, sq = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::size_t first = detail::draw_index(cumulative, rng);
      std::uint64_t run = 1, hits = 1;
      for (;;) {
        const std::size_t next = detail::draw_index(cumulative, rng);
        if (group_of[next] != group_of[first]) break;
        ++run;
        if (next == first) ++hits;
        if (run > opt.max_run_length)
          throw Error(ErrorCode::RunTooLong, "a Monte-Carlo run stayed inside one group for over " +
                                                 std::to_string(opt.max_run_length) + " steps");
      }
      const double v = std::log(static_cast<double>(hits) / static_cast<double>(run));
      sum += v;
      sq += v * v;
    }
    sums[c] = sum;
    squares[c] = sq;
  });
  double sum = 0.0, sq = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sq += squares[c];
  }
  const double n = static_cast<double>(opt.samples);
  PhiResult out;
  out.method = "monte-carlo";
  out.value = sum / n;
  out.terms_used = static_cast<long long>(opt.samples);
  const double var = opt.samples > 1 ? std::max(0.0, (sq - n * out.value * out.value) / (n - 1.0)) : 0.0;
  out.stderr_ = std::sqrt(var / n);
  return out;
}

/// h_RW = h_p + Phi(p); zero when all mass sits in one group (the maps then generate an abelian semigroup).
inline RWEntropyResult rw_entropy_closed(const CFSystem& sys, const ProbVector& p, double tol = kDefaultTolerance) {
  RWEntropyResult out;
  out.method = "closed-form";
  if (prune_zeros(sys, p).all_mass_on_one_group) return out;
  out.value = shannon_entropy(p) + phi_series(sys, p, tol).value;
  return out;
}

/// H_n of the distribution of composed maps, computed by a dynamic programme over the
/// open block (group, member counts). Uses log W(class) = log p_w + sum_blocks log multinomial,
/// so H_n = n h_p - E[sum over blocks of log multinomial(block)].
inline RWEntropyResult rw_entropy_bruteforce(const CFSystem& sys, const ProbVector& p, int depth,
                                             std::uint64_t budget = kDefaultBudget) {
  if (depth < 1) throw Error(ErrorCode::BudgetExceeded, "depth must be at least 1");
  const PrunedSystem pruned = prune_zeros(sys, p);
  const CFSystem& s = pruned.system;
  const ProbVector& q = pruned.probabilities;
  const double h = shannon_entropy(q);

  using State = std::pair<int, std::vector<int>>;
  std::map<State, double> dist;
  dist[{-1, {}}] = 1.0;
  double closed = 0.0;
  RWEntropyResult out;
  out.method = "brute-force";
  out.depth = depth;
  const auto symbols = s.symbols();
  for (int t = 1; t <= depth; ++t) {
    std::map<State, double> next;
    for (const auto& [state, mass] : dist) {
      const double closing = state.first < 0 ? 0.0 : log_multinomial(state.second);
      for (const Symbol& sym : symbols) {
        const double w = mass * q.weight(sym);
        if (sym.group == state.first) {
          State ns = state;
          ++ns.second[static_cast<std::size_t>(sym.member)];
          next[ns] += w;
        } else {
          closed += w * closing;
          State ns{sym.group, std::vector<int>(s.group_size(static_cast<std::size_t>(sym.group)), 0)};
          ns.second[static_cast<std::size_t>(sym.member)] = 1;
          next[ns] += w;
        }
      }
    }
    dist = std::move(next);
    if (dist.size() > budget) throw Error(ErrorCode::BudgetExceeded, "block-state table exceeds the budget");
    double open = 0.0;
    for (const auto& [state, mass] : dist) open += mass * log_multinomial(state.second);
    out.entropies.push_back(t * h - closed - open);
  }
  for (std::size_t k = 1; k < out.entropies.size(); ++k)
    out.increments.push_back(out.entropies[k] - out.entropies[k - 1]);
  out.value = out.entropies.back() / depth;
  return out;
}

}  // namespace cfsdim

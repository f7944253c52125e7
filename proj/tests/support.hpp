#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cfsdim/core.hpp"

namespace cfsdim::testkit {

/// Random system with the given group sizes, fixed points spread over [0, 1], ratios in [lo, hi].
inline CFSystem random_system(std::mt19937_64& rng, const std::vector<int>& shape, double lo = 0.05,
                              double hi = 0.6) {
  std::uniform_real_distribution<double> ratio(lo, hi), jitter(-0.2, 0.2);
  std::vector<double> t;
  std::vector<std::vector<double>> r;
  for (std::size_t g = 0; g < shape.size(); ++g) {
    t.push_back(static_cast<double>(g) + jitter(rng));
    auto& row = r.emplace_back();
    for (int j = 0; j < shape[g]; ++j) row.push_back(ratio(rng));
  }
  return CFSystem(t, r);
}

inline std::vector<int> random_shape(std::mt19937_64& rng, int max_groups = 3, int max_members = 3) {
  std::uniform_int_distribution<int> groups(2, max_groups), members(1, max_members);
  std::vector<int> shape(static_cast<std::size_t>(groups(rng)));
  for (int& n : shape) n = members(rng);
  return shape;
}

/// Dirichlet(1,...,1) weights, optionally bounded away from zero.
inline ProbVector random_probabilities(std::mt19937_64& rng, const CFSystem& sys, double floor = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::vector<std::vector<double>> w;
  double total = 0.0;
  for (std::size_t g = 0; g < sys.group_count(); ++g) {
    auto& row = w.emplace_back();
    for (std::size_t j = 0; j < sys.group_size(g); ++j) {
      row.push_back(e(rng) + floor);
      total += row.back();
    }
  }
  for (auto& row : w)
    for (double& x : row) x /= total;
  return ProbVector(w);
}

}  // namespace cfsdim::testkit

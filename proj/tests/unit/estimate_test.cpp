#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cfsdim/estimate.hpp"
#include "support.hpp"

using namespace cfsdim;

namespace {

CFSystem half_cantor() { return CFSystem({0.0, 1.0}, {{0.25}, {0.25}}); }
CFSystem full_interval() { return CFSystem({0.0, 1.0}, {{0.5}, {0.5}}); }

FourCornerSystem corners(double g, double l) { return {{{{g, g}, {g, g}}}, {{{l, l}, {l, l}}}}; }

}  // namespace

TEST(LeastSquares, ExactLine) {
  const LineFit f = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-13);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_NEAR(f.stderr_, 0.0, 1e-7);
}

TEST(LeastSquares, NoisyLineStderr) {
  const LineFit f = least_squares({0, 1, 2, 3}, {0, 1.1, 1.9, 3.0});
  EXPECT_NEAR(f.slope, 0.98, 1e-12);
  EXPECT_GT(f.stderr_, 0.0);
  EXPECT_LT(f.r2, 1.0);
}

TEST(DefaultWindow, DropsTwoEachEnd) {
  EXPECT_EQ(default_window(4, 20), (std::pair<int, int>{6, 18}));
  EXPECT_EQ(default_window(4, 8), (std::pair<int, int>{4, 8}));
}

TEST(Cover1d, FullIntervalIsEveryBox) {
  for (int m = 1; m <= 12; ++m) {
    const DyadicCover c = cover_boxes_1d(full_interval(), m);
    EXPECT_EQ(c.upper_count, std::uint64_t{1} << m);
    EXPECT_GE(c.upper_count, c.lower_count);
  }
}

TEST(Cover1d, HalfCantorCountsDoubleEveryTwoScales) {
  // at m = 2k the level-k cylinders are exactly the dyadic boxes that meet the set
  for (int k = 2; k <= 8; ++k) {
    const DyadicCover c = cover_boxes_1d(half_cantor(), 2 * k);
    EXPECT_EQ(c.lower_count, std::uint64_t{1} << k);
    EXPECT_LE(c.upper_count, 3 * c.lower_count);
  }
}

TEST(Cover1d, UpperDominatesLower) {
  const CFSystem sys({0.0, 1.0}, {{0.3, 0.2}, {0.25}});
  for (int m = 2; m <= 16; ++m) {
    const DyadicCover c = cover_boxes_1d(sys, m);
    EXPECT_GE(c.upper_count, c.lower_count);
  }
}

TEST(Cover1d, RandomCodingsLandInMarkedBoxes) {
  std::mt19937_64 rng(19);
  const CFSystem sys({-1.0, 0.5, 2.0}, {{0.3, 0.2}, {0.25}, {0.35}});
  const auto flat = sys.symbols();
  std::uniform_int_distribution<std::size_t> pick(0, flat.size() - 1);
  const DyadicCover c = cover_boxes_1d(sys, 14);
  int misses = 0;
  for (int k = 0; k < 100000; ++k) {
    Word w;
    for (int d = 0; d < 40; ++d) w.push_back(flat[pick(rng)]);
    if (!c.covers(project<double>(sys, w))) ++misses;
  }
  EXPECT_EQ(misses, 0);
}

TEST(Cover1d, BadExponentAndBudget) {
  EXPECT_THROW(cover_boxes_1d(half_cantor(), 0), Error);
  try {
    cover_boxes_1d(CFSystem({0.0, 1.0}, {{0.3, 0.2}, {0.25}}), 20, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
}

TEST(BoxDimension1d, HalfCantor) {
  const ScalingFit f = box_dimension_1d(half_cantor(), 8, 18);
  EXPECT_NEAR(f.slope, 0.5, 0.02);
  EXPECT_LE(f.lower_slope, f.slope + 1e-12);
  EXPECT_GE(f.upper_slope, f.slope - 1e-12);
  EXPECT_GT(f.r2, 0.95);  // counts step every second scale
  EXPECT_EQ(f.window, (std::pair<int, int>{10, 16}));
}

TEST(BoxDimension1d, FullInterval) {
  EXPECT_NEAR(box_dimension_1d(full_interval(), 4, 16).slope, 1.0, 0.01);
}

TEST(BoxDimension1d, GenericOverlapNearAttractorDimension) {
  const CFSystem sys({0.0, 1.0}, {{0.3, 0.2}, {0.25}});
  EXPECT_NEAR(box_dimension_1d(sys, 4, 20).slope, attractor_dimension(sys).dimension, 0.05);
}

TEST(BoxDimension1d, TranslatedSystemSameSlope) {
  const CFSystem a({0.0, 1.0}, {{0.3, 0.2}, {0.25}});
  const CFSystem b({-3.0, 5.0}, {{0.3, 0.2}, {0.25}});
  EXPECT_NEAR(box_dimension_1d(a, 4, 16).slope, box_dimension_1d(b, 4, 16).slope, 1e-12);
}

TEST(BoxDimension1d, WindowStability) {
  const std::vector<CFSystem> osc{half_cantor(), CFSystem({0.0, 1.0}, {{1.0 / 3}, {1.0 / 3}}),
                                  CFSystem({0.0, 0.5, 1.0}, {{0.2}, {0.25}, {0.2}})};
  for (const auto& sys : osc) {
    const ScalingFit small = box_dimension_1d(sys, 4, 18), large = box_dimension_1d(sys, 4, 20);
    EXPECT_LT(std::abs(small.slope - large.slope), 3 * std::max(small.stderr_, large.stderr_))
        << small.slope << " " << large.slope;
  }
}

TEST(BoxDimension2d, FullSquare) {
  BoxCount2DOptions o;
  o.points = 1'000'000;
  EXPECT_NEAR(box_dimension_2d(corners(0.5, 0.5), 2, 8, o).slope, 2.0, 0.02);
}

TEST(BoxDimension2d, QuarterCopiesIsOne) {
  BoxCount2DOptions o;
  o.points = 1'000'000;
  EXPECT_NEAR(box_dimension_2d(corners(0.25, 0.25), 2, 12, o).slope, 1.0, 0.03);
}

TEST(BoxDimension2d, ThreadCountDoesNotChangeResult) {
  const FourCornerSystem s{{{{0.8, 0.1}, {0.1, 0.8}}}, {{{0.45, 0.09}, {0.09, 0.45}}}};
  BoxCount2DOptions a;
  a.points = 200'000;
  a.seed = 4;
  BoxCount2DOptions b = a;
  b.threads = 4;
  const ScalingFit fa = box_dimension_2d(s, 2, 10, a), fb = box_dimension_2d(s, 2, 10, b);
  EXPECT_EQ(fa.counts, fb.counts);
  EXPECT_EQ(fa.slope, fb.slope);
}

TEST(BoxDimension2d, CountsNondecreasing) {
  const FourCornerSystem s{{{{0.8, 0.1}, {0.1, 0.8}}}, {{{0.45, 0.09}, {0.09, 0.45}}}};
  BoxCount2DOptions o;
  o.points = 200'000;
  const ScalingFit f = box_dimension_2d(s, 1, 12, o);
  for (std::size_t k = 1; k < f.counts.size(); ++k) EXPECT_GE(f.counts[k], f.counts[k - 1]);
}

TEST(EntropySlope, LebesgueIsOne) {
  EntropySlopeOptions o;
  o.samples = 400'000;
  const auto sys = full_interval();
  EXPECT_NEAR(entropy_slope(sys, ProbVector::uniform(sys), 2, 12, o).slope, 1.0, 0.02);
}

TEST(EntropySlope, UniformCantorHalf) {
  EntropySlopeOptions o;
  o.samples = 400'000;
  const auto sys = half_cantor();
  EXPECT_NEAR(entropy_slope(sys, ProbVector::uniform(sys), 2, 16, o).slope, 0.5, 0.02);
}

TEST(EntropySlope, OverlappingExampleNearMeasureDimension) {
  const CFSystem sys({0.0, 1.0}, {{0.3, 0.2}, {0.25}});
  const auto p = ProbVector::uniform(sys);
  EntropySlopeOptions o;
  o.samples = 1'000'000;
  o.seed = 3;
  EXPECT_NEAR(entropy_slope(sys, p, 4, 20, o).slope, measure_dimension(sys, p).dimension, 0.1);
}

TEST(EntropySlope, DeterministicAcrossThreads) {
  const CFSystem sys({0.0, 1.0}, {{0.3, 0.2}, {0.25}});
  EntropySlopeOptions a;
  a.samples = 100'000;
  a.seed = 12;
  EntropySlopeOptions b = a;
  b.threads = 3;
  const auto p = ProbVector::uniform(sys);
  EXPECT_EQ(entropy_slope(sys, p, 2, 14, a).counts, entropy_slope(sys, p, 2, 14, b).counts);
}

TEST(EntropySlope, PointMassRejected) {
  const CFSystem sys({0.0, 1.0}, {{0.3, 0.2}, {0.25}});
  EntropySlopeOptions o;
  EXPECT_THROW(entropy_slope(sys, ProbVector({{0.5, 0.5}, {0.0}}), 2, 10, o), Error);
}

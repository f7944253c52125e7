#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <regex>

#include "cfsdim/fourcorner.hpp"
#include "support.hpp"

using namespace cfsdim;

namespace {

// mpmath values, tests/oracles/fourcorner_oracles.py
constexpr double kS = 1.6430167066350220952;
constexpr FourCornerProb kP{0.47874013695557108765, 0.021259863044428912355, 0.021259863044428912355,
                            0.47874013695557108765};
constexpr double kSuff = 0.50917998139865129138;
constexpr double kH = 0.86901809687326353184;
constexpr double kChiX = 0.31156083608422861116;
constexpr double kChiY = 0.86694055541149270353;
constexpr double kPhiNatural = -0.0361939533975026457;
constexpr double kChiXUniform = 1.2628643221541277199;
constexpr double kChiYUniform = 1.6032266524348217979;
constexpr double kPhiXUniform = -0.21727499923703612092;

FourCornerSystem demo_point() { return {{{{0.8, 0.1}, {0.1, 0.8}}}, {{{0.45, 0.09}, {0.09, 0.45}}}}; }

FourCornerSystem all(double g, double l) { return {{{{g, g}, {g, g}}}, {{{l, l}, {l, l}}}}; }

FourCornerSystem dual(const FourCornerSystem& s) { return {s.lambda, s.gamma}; }

FourCornerProb dual(const FourCornerProb& p) { return {p[0], p[2], p[1], p[3]}; }

FourCornerProb random_p(std::mt19937_64& rng, double floor = 0.02) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  FourCornerProb p{u(rng), u(rng), u(rng), u(rng)};
  const double s = p[0] + p[1] + p[2] + p[3];
  for (double& x : p) x /= s;
  return p;
}

double generic_phi(const CFSystem& sys, const ProbVector& p) { return phi_series(sys, p).value; }

}  // namespace

TEST(Validate4c, DemoPointPassesBothSets) {
  const auto c = validate_4c(demo_point());
  EXPECT_TRUE(c.separation_ok());
  EXPECT_TRUE(c.domination_ok());
}

TEST(Validate4c, LargeEntriesBreakSums) {
  const auto c = validate_4c(all(0.6, 0.6));
  EXPECT_FALSE(c.separation_ok());
  EXPECT_FALSE(c.separation_violations.empty());
}

TEST(Validate4c, SymmetricQuarterOk) {
  const auto c = validate_4c(all(0.25, 0.25));
  EXPECT_TRUE(c.separation_ok());
  EXPECT_TRUE(c.domination_ok());
}

TEST(Validate4c, DominationReportedSeparately) {
  const FourCornerSystem s{{{{0.3, 0.3}, {0.3, 0.3}}}, {{{0.45, 0.3}, {0.3, 0.45}}}};
  const auto c = validate_4c(s);
  EXPECT_TRUE(c.separation_ok());
  EXPECT_FALSE(c.domination_ok());
  EXPECT_EQ(c.domination_violations.size(), 2u);
}

TEST(Validate4c, NonPositiveEntry) {
  auto s = all(0.25, 0.25);
  s.lambda[1][0] = 0.0;
  EXPECT_FALSE(validate_4c(s).separation_ok());
}

TEST(CornerMaps, ImagesOfTheSquareSitAtCorners) {
  const auto m = corner_maps(demo_point());
  // F1: [0,.8]x[0,.45]; F2: [0,.1]x[.91,1]; F3: [.9,1]x[0,.09]; F4: [.2,1]x[.55,1]
  EXPECT_DOUBLE_EQ(m[0](1, 1).first, 0.8);
  EXPECT_DOUBLE_EQ(m[0](1, 1).second, 0.45);
  EXPECT_DOUBLE_EQ(m[1](0, 0).second, 0.91);
  EXPECT_DOUBLE_EQ(m[1](1, 1).first, 0.1);
  EXPECT_DOUBLE_EQ(m[2](0, 0).first, 0.9);
  EXPECT_DOUBLE_EQ(m[2](1, 1).second, 0.09);
  EXPECT_NEAR(m[3](0, 0).first, 0.2, 1e-15);
  EXPECT_NEAR(m[3](0, 0).second, 0.55, 1e-15);
  EXPECT_DOUBLE_EQ(m[3](1, 1).first, 1.0);
}

TEST(Chis, HalvesGiveLogTwo) {
  const auto [cx, cy] = chis(all(0.5, 0.5), {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(cx, std::log(2.0), 1e-15);
  EXPECT_NEAR(cy, std::log(2.0), 1e-15);
}

TEST(Chis, DiracPicksFirstRatios) {
  const auto [cx, cy] = chis(demo_point(), {1, 0, 0, 0});
  EXPECT_DOUBLE_EQ(cx, -std::log(0.8));
  EXPECT_DOUBLE_EQ(cy, -std::log(0.45));
}

TEST(Chis, YPairsSecondMapWithLambda21) {
  FourCornerSystem s = all(0.25, 0.25);
  s.lambda[1][0] = 0.1;  // lambda_{2,1}
  s.lambda[0][1] = 0.2;  // lambda_{1,2}
  EXPECT_DOUBLE_EQ(chis(s, {0, 1, 0, 0}).second, -std::log(0.1));
  EXPECT_DOUBLE_EQ(chis(s, {0, 0, 1, 0}).second, -std::log(0.2));
}

TEST(Chis, DemoPointUniform) {
  const auto [cx, cy] = chis(demo_point(), {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(cx, kChiXUniform, 1e-14);
  EXPECT_NEAR(cy, kChiYUniform, 1e-14);
}

TEST(PhiXY, DiracIsZeroAndDegenerate) {
  const PhiXY r = phi_xy({1, 0, 0, 0});
  EXPECT_EQ(r.phi_x, 0.0);
  EXPECT_EQ(r.phi_y, 0.0);
  EXPECT_TRUE(r.degenerate_x);
  EXPECT_TRUE(r.degenerate_y);
}

TEST(PhiXY, UniformMatchesOracle) {
  const PhiXY r = phi_xy({0.25, 0.25, 0.25, 0.25}, 1e-13);
  EXPECT_NEAR(r.phi_x, kPhiXUniform, 1e-12);
  EXPECT_NEAR(r.phi_y, kPhiXUniform, 1e-12);
}

TEST(PhiXY, UniformMatchesMonteCarlo) {
  const CFSystem x = x_projection(demo_point());
  MonteCarloOptions opt;
  opt.samples = 1'000'000;
  opt.seed = 5;
  const PhiResult mc = phi_monte_carlo(x, x_grouping({0.25, 0.25, 0.25, 0.25}), opt);
  EXPECT_LE(std::abs(mc.value - phi_xy({0.25, 0.25, 0.25, 0.25}).phi_x), 4 * mc.stderr_);
}

TEST(PhiXY, NaturalMeasureMatchesOracle) {
  const PhiXY r = phi_xy(kP);
  EXPECT_NEAR(r.phi_x, kPhiNatural, 1e-12);
  EXPECT_NEAR(r.phi_y, kPhiNatural, 1e-12);
}

TEST(PhiXY, CollapsedGroupAgreesWithGeneric) {
  const FourCornerProb p{0.0, 0.3, 0.4, 0.3};
  const auto sys = x_projection(demo_point());
  EXPECT_NEAR(phi_xy(p).phi_x, generic_phi(sys, x_grouping(p)), 1e-12);
  EXPECT_NEAR(phi_xy(p).phi_y, generic_phi(y_projection(demo_point()), y_grouping(p)), 1e-12);
}

TEST(PhiXY, GroupingsAreHardWired) {
  // x: {1,2} at 0 and {3,4} at 1; y: {1,3} at 0 and {2,4} at 1
  const auto sx = x_projection(demo_point());
  EXPECT_EQ(sx.fixed_point(0), 0.0);
  EXPECT_EQ(sx.fixed_point(1), 1.0);
  EXPECT_EQ(x_grouping({0.1, 0.2, 0.3, 0.4}).flat(), (std::vector<double>{0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(y_grouping({0.1, 0.2, 0.3, 0.4}).flat(), (std::vector<double>{0.1, 0.3, 0.2, 0.4}));
  const auto sy = y_projection(demo_point());
  EXPECT_EQ(sy.ratio({0, 1}), 0.09);  // lambda_{1,2}, map F3
  EXPECT_EQ(sy.ratio({1, 0}), 0.09);  // lambda_{2,1}, map F2
}

TEST(PhiXY, GroupingConsistencyRandom) {
  std::mt19937_64 rng(404);
  const auto sys = demo_point();
  for (int k = 0; k < 50; ++k) {
    const auto p = random_p(rng);
    const PhiXY r = phi_xy(p, 1e-13);
    const PhiResult gx = phi_series(x_projection(sys), x_grouping(p), 1e-13);
    const PhiResult gy = phi_series(y_projection(sys), y_grouping(p), 1e-13);
    EXPECT_LE(std::abs(r.phi_x - gx.value), 1e-10 + r.tail_x + gx.tail_bound);
    EXPECT_LE(std::abs(r.phi_y - gy.value), 1e-10 + r.tail_y + gy.tail_bound);
  }
}

TEST(Duality, SwapsCoordinatesExactly) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  for (int k = 0; k < 20; ++k) {
    FourCornerSystem s;
    for (auto& row : s.gamma) for (double& v : row) v = u(rng);
    for (auto& row : s.lambda) for (double& v : row) v = u(rng);
    const auto p = random_p(rng);
    const auto [cx, cy] = chis(s, p);
    const auto [dx, dy] = chis(dual(s), dual(p));
    EXPECT_EQ(cx, dy);
    EXPECT_EQ(cy, dx);
    const PhiXY a = phi_xy(p), b = phi_xy(dual(p));
    EXPECT_EQ(a.phi_x, b.phi_y);
    EXPECT_EQ(a.phi_y, b.phi_x);
    const auto ma = measure_dimension_4c(s, p), mb = measure_dimension_4c(dual(s), dual(p));
    EXPECT_NEAR(ma.dimension, mb.dimension, 1e-14);
  }
}

TEST(MeasureDimension4c, EqualRatiosBoundaryCasesAgree) {
  const auto rep = measure_dimension_4c(all(0.3, 0.3), {0.25, 0.25, 0.25, 0.25});
  EXPECT_LE(rep.diagnostics.at("boundary_discrepancy"), 1e-9);
  // ex = log 4 - 0.217 > chi = log(10/3): "1 + (h - chi)/chi" = h / chi
  EXPECT_NEAR(rep.dimension, std::log(4.0) / std::log(1 / 0.3), 1e-12);
}

TEST(MeasureDimension4c, DemoPointNaturalMeasureIsS) {
  const auto rep = measure_dimension_4c(demo_point(), kP);
  EXPECT_EQ(rep.diagnostics.at("case"), 2.0);
  EXPECT_NEAR(rep.diagnostics.at("entropy"), kH, 1e-13);
  EXPECT_NEAR(rep.diagnostics.at("chi_x"), kChiX, 1e-13);
  EXPECT_NEAR(rep.diagnostics.at("chi_y"), kChiY, 1e-13);
  EXPECT_NEAR(rep.dimension, 1.0 + (kH - kChiX) / kChiY, 1e-12);
  EXPECT_NEAR(rep.dimension, kS, 1e-9);
}

TEST(MeasureDimension4c, DiracIsZero) {
  const auto rep = measure_dimension_4c(demo_point(), {1, 0, 0, 0});
  EXPECT_EQ(rep.dimension, 0.0);
  EXPECT_TRUE(rep.has_flag("degenerate"));
}

TEST(MeasureDimension4c, SegmentSupportUsesOneAxis) {
  // p on F1, F2 only: the measure lives on the y-axis segment
  const FourCornerProb p{0.5, 0.5, 0, 0};
  const auto rep = measure_dimension_4c(all(0.25, 0.25), p);
  EXPECT_TRUE(rep.has_flag("degenerate"));
  EXPECT_NEAR(rep.dimension, 0.5, 1e-15);
}

TEST(MeasureDimension4c, ContinuousAcrossChiCrossing) {
  const FourCornerSystem s{{{{0.5, 0.2}, {0.2, 0.3}}}, {{{0.3, 0.2}, {0.2, 0.5}}}};
  ASSERT_TRUE(validate_4c(s).separation_ok());
  const FourCornerProb a{0.7, 0.1, 0.1, 0.1}, b{0.1, 0.1, 0.1, 0.7};
  auto at = [&](double t) {
    FourCornerProb p;
    for (int i = 0; i < 4; ++i) p[i] = (1 - t) * a[i] + t * b[i];
    return p;
  };
  auto gap = [&](double t) {
    const auto [cx, cy] = chis(s, at(t));
    return cy - cx;
  };
  ASSERT_GT(gap(0.0), 0.0);
  ASSERT_LT(gap(1.0), 0.0);
  const double tc = bisect(gap, 0.0, 1.0, 1e-15).root;
  const auto left = measure_dimension_4c(s, at(tc - 1e-10));
  const auto right = measure_dimension_4c(s, at(tc + 1e-10));
  EXPECT_NE(left.diagnostics.at("case"), right.diagnostics.at("case"));
  EXPECT_LE(std::abs(left.dimension - right.dimension), 1e-8);
  // and a coarse walk has no jumps beyond the local slope
  double prev = measure_dimension_4c(s, at(0.0)).dimension;
  for (int k = 1; k <= 400; ++k) {
    const double cur = measure_dimension_4c(s, at(k / 400.0)).dimension;
    EXPECT_LE(std::abs(cur - prev), 0.02);
    prev = cur;
  }
}

TEST(MeasureDimension4c, AlwaysDispatches) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.05, 0.49);
  for (int k = 0; k < 200; ++k) {
    FourCornerSystem s;
    for (auto& row : s.gamma) for (double& v : row) v = u(rng);
    for (auto& row : s.lambda) for (double& v : row) v = u(rng);
    const auto rep = measure_dimension_4c(s, random_p(rng));
    EXPECT_GE(rep.dimension, 0.0);
    EXPECT_LE(rep.dimension, 2.0);
  }
}

TEST(NaturalP, SymmetricQuarterIsOne) {
  const auto nat = natural_p(all(0.25, 0.25));
  EXPECT_NEAR(nat.s, 1.0, 1e-14);
  for (double x : nat.p) EXPECT_NEAR(x, 0.25, 1e-14);
}

TEST(NaturalP, DemoPoint) {
  const auto nat = natural_p(demo_point());
  EXPECT_NEAR(nat.s, kS, 1e-13);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(nat.p[i], kP[i], 1e-13);
  EXPECT_NEAR(nat.p[0] + nat.p[1] + nat.p[2] + nat.p[3], 1.0, 1e-12);
  EXPECT_LE(std::abs(natural_equation(demo_point(), nat.s)), 1e-12);
}

TEST(NaturalP, GammaEqualsPairedLambdaIsSimilarityDimension) {
  // gamma_{ij} equal to the y-ratio of the same map: sum r^s = 1
  const FourCornerSystem s{{{{0.4, 0.3}, {0.2, 0.35}}}, {{{0.4, 0.2}, {0.3, 0.35}}}};
  const auto nat = natural_p(s);
  const auto r = corner_ratios(s);
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    ASSERT_EQ(r[i].first, r[i].second);
    EXPECT_NEAR(nat.p[i], std::pow(r[i].first, nat.s), 1e-14);
    sum += std::pow(r[i].first, nat.s);
  }
  EXPECT_NEAR(sum, 1.0, 1e-13);
  const CFSystem flat({0.0, 1.0}, {{0.4, 0.3, 0.2, 0.35}});
  EXPECT_NEAR(nat.s, similarity_dimension(flat), 1e-12);
}

TEST(NaturalP, RandomSystemsSatisfyEquation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.49);
  for (int k = 0; k < 50; ++k) {
    FourCornerSystem s;
    for (auto& row : s.gamma) for (double& v : row) v = u(rng);
    for (auto& row : s.lambda) for (double& v : row) v = u(rng);
    NaturalMeasure nat;
    try {
      nat = natural_p(s);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::RootOutsideBracket);
      continue;
    }
    EXPECT_LE(std::abs(natural_equation(s, nat.s)), 1e-12);
  }
}

TEST(NaturalP, OutsideBracketThrows) {
  // tiny maps: sum gamma is far below 1 at s = 0.5
  try {
    natural_p(all(0.01, 0.9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RootOutsideBracket);
  }
}

TEST(Suff, DemoPointHolds) {
  const SuffCheck c = suff_check(demo_point());
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.value, kSuff, 1e-12);
}

TEST(Suff, UnitLogArgumentsGiveZero) {
  // gamma 1/3, lambda 3/4: s = 2, p uniform, (1 - 1/4) / (3/4) = 1 in every term
  const SuffCheck c = suff_check(all(1.0 / 3.0, 0.75));
  EXPECT_NEAR(c.s, 2.0, 1e-14);
  EXPECT_NEAR(c.value, 0.0, 1e-15);
  EXPECT_FALSE(suff_value(all(1.0 / 3.0, 0.75), 2.0) > 0.0);
}

TEST(Suff, ImpliesCase2ViaJensen) {
  // positive suff forces h + Phi_x >= chi_x for the natural measure
  const auto nat = natural_p(demo_point());
  const auto rep = measure_dimension_4c(demo_point(), nat.p);
  EXPECT_GE(rep.diagnostics.at("entropy") + rep.diagnostics.at("phi_x"), rep.diagnostics.at("chi_x"));
}

TEST(SetDimension4c, DemoPointCertified) {
  const auto rep = set_dimension_4c(demo_point());
  EXPECT_NEAR(rep.dimension, kS, 1e-13);
  EXPECT_TRUE(rep.has_flag("certified"));
  EXPECT_EQ(rep.diagnostics.at("suff_holds"), 1.0);
}

TEST(SetDimension4c, SymmetricQuarter) {
  const auto rep = set_dimension_4c(all(0.25, 0.25));
  EXPECT_NEAR(rep.dimension, 1.0, 1e-14);
}

TEST(SetDimension4c, DominationFailureIsUpperBoundOnly) {
  const FourCornerSystem s{{{{0.3, 0.3}, {0.3, 0.3}}}, {{{0.45, 0.3}, {0.3, 0.45}}}};
  const auto rep = set_dimension_4c(s);
  EXPECT_TRUE(rep.has_flag("upper-bound-only"));
  EXPECT_LE(std::abs(natural_equation(s, rep.dimension)), 1e-12);
}

TEST(SetDimension4c, BrokenSumsThrow) {
  try {
    set_dimension_4c(all(0.6, 0.6));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConditionsNotMet);
  }
}

TEST(Render, DepthOneHasFourCornerRects) {
  const std::string svg = cylinders_svg(demo_point(), 1);
  const std::regex rect("<rect x=\"([0-9.]+)\" y=\"([0-9.]+)\" width=\"([0-9.]+)\" height=\"([0-9.]+)\" fill=\"#");
  std::vector<std::array<double, 4>> found;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator(); ++it)
    found.push_back({std::stod((*it)[1]), std::stod((*it)[2]), std::stod((*it)[3]), std::stod((*it)[4])});
  ASSERT_EQ(found.size(), 4u);
  // F1 = [0,0.8] x [0,0.45], drawn with the y axis flipped
  EXPECT_NEAR(found[0][0], 0.0, 1e-9);
  EXPECT_NEAR(found[0][1], 0.55, 1e-9);
  EXPECT_NEAR(found[0][2], 0.8, 1e-9);
  EXPECT_NEAR(found[0][3], 0.45, 1e-9);
  EXPECT_NEAR(found[3][0], 0.2, 1e-9);
  EXPECT_NEAR(found[3][1], 0.0, 1e-9);
}

TEST(Render, DepthTwoHasSixteen) {
  const std::string svg = cylinders_svg(demo_point(), 2);
  std::size_t n = 0;
  for (std::size_t at = svg.find("fill=\"#"); at != std::string::npos; at = svg.find("fill=\"#", at + 1)) ++n;
  EXPECT_EQ(n, 16u);
}

TEST(Render, ChaosGameStaysInSquare) {
  std::uint64_t outside = 0, count = 0;
  chaos_game(demo_point(), 1'000'000, 3, {0.25, 0.25, 0.25, 0.25}, [&](double x, double y) {
    ++count;
    if (x < 0 || x > 1 || y < 0 || y > 1) ++outside;
  });
  EXPECT_EQ(count, 1'000'000u);
  EXPECT_EQ(outside, 0u);
}

TEST(Render, PpmDeterministicAndSized) {
  const std::string a = attractor_ppm(demo_point(), 20000, 8, 64, 32);
  const std::string b = attractor_ppm(demo_point(), 20000, 8, 64, 32);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("P6\n64 32\n255\n", 0), 0u);
  EXPECT_EQ(a.size(), std::string("P6\n64 32\n255\n").size() + 64 * 32 * 3);
  EXPECT_NE(a, attractor_ppm(demo_point(), 20000, 9, 64, 32));
}

TEST(Render, WriteFailureIsIoError) {
  try {
    write_file("/nonexistent-dir/x.svg", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

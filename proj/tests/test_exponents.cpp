#include <gtest/gtest.h>

#include <random>

#include "restrlab/errors.hpp"
#include "restrlab/exponents.hpp"

using namespace restrlab;

namespace {

// Independent evaluation of the critical point from its defining formulas.
struct Reference {
  double inv_p0, inv_s0, h, p1;
};
Reference reference(double m1, double m2) {
  const double M = std::max(m1, m2), m = std::min(m1, m2);
  return {(M + m) / (4 * M + 2 * m), (3 * M + m - m * M) / (4 * M + 2 * m), 1.0 / (1.0 / m1 + 1.0 / m2),
          (4 * M + 2) / (M + 2)};
}

}  // namespace

TEST(Exponents, SquareCaseOnBisectrix) {
  const auto e = exponent_data(2, 2);
  ASSERT_TRUE(e.exact.has_value());
  EXPECT_EQ(e.exact->h, Rational(1));
  EXPECT_EQ(e.exact->inv_p0, Rational(1, 3));
  EXPECT_EQ(e.exact->inv_s0, Rational(1, 3));
  EXPECT_EQ(e.exact->p1, Rational(5, 2));
}

TEST(Exponents, HeightTendsToTwo) {
  EXPECT_NEAR(exponent_data(2, 1e6).h, 2.0, 1e-5);
}

TEST(Exponents, MatchesReferenceFormulas) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(2.0, 12.0);
  for (int i = 0; i < 200; ++i) {
    const double m1 = u(rng), m2 = u(rng);
    const auto e = exponent_data(m1, m2);
    const auto r = reference(m1, m2);
    EXPECT_NEAR(e.inv_p0, r.inv_p0, 1e-12);
    EXPECT_NEAR(e.inv_s0, r.inv_s0, 1e-12);
    EXPECT_NEAR(e.h, r.h, 1e-12);
    EXPECT_NEAR(e.p1, r.p1, 1e-12);
    EXPECT_TRUE(critical_point_consistent(m1, m2));
  }
}

TEST(Exponents, CriticalPointAboveBisectrixForDegenerateCase) {
  for (double m1 : {2.5, 3.0, 4.0, 7.0})
    for (double m2 : {2.5, 3.0, 6.0}) {
      const auto e = exponent_data(m1, m2);
      ASSERT_TRUE(e.exact.has_value());
      EXPECT_GT(e.exact->inv_p0, e.exact->inv_s0) << m1 << "," << m2;
    }
}

TEST(Exponents, RejectsFlatOrder) { EXPECT_THROW(exponent_data(1.5, 2), InvalidArgument); }

TEST(Region, ProbeSet) {
  EXPECT_EQ(region_classify(3, 2), Figure::Fig2);
  EXPECT_EQ(region_classify(6, 2), Figure::Fig4);
  EXPECT_EQ(region_classify(8, 4), Figure::Fig5);
}

TEST(Region, P1ReachesTenThirdsAtSeven) {
  const auto e = exponent_data(7, 2);
  ASSERT_TRUE(e.exact.has_value());
  EXPECT_EQ(e.exact->p1, Rational(10, 3));
  EXPECT_LT(exponent_data(6.5, 2).p1, 10.0 / 3.0);
}

TEST(Region, ClassificationIsTotalAndSymmetric) {
  for (double m1 = 2; m1 <= 14; m1 += 0.5)
    for (double m2 = 2; m2 <= 14; m2 += 0.5) EXPECT_EQ(region_classify(m1, m2), region_classify(m2, m1));
}

TEST(Admissible, ReferencePoints) {
  const auto ok = admissible(2, 2, 0.0, 0.25);
  EXPECT_TRUE(ok.admissible);
  EXPECT_TRUE(ok.failed.empty());

  const auto bad = admissible(2, 2, 0.0, 0.5);
  EXPECT_FALSE(bad.admissible);
  ASSERT_FALSE(bad.failed.empty());
  EXPECT_EQ(bad.failed.front(), "p>max(10/3,h+1)");

  for (double m1 : {2.0, 3.0, 5.0}) EXPECT_TRUE(admissible(m1, 4, 1.0, 0.0).admissible);
}

TEST(Admissible, AdmissibleImpliesNoFailures) {
  for (double is = 0; is <= 1.0; is += 0.05)
    for (double ip = 0; ip <= 0.5; ip += 0.02) {
      const auto v = admissible(3, 5, is, ip);
      if (v.admissible) EXPECT_TRUE(v.failed.empty());
    }
}

TEST(ChooseQ, FourFourWindow) {
  const auto c = choose_q(4, 4, 1.8);
  EXPECT_NEAR(c.lo, 7.0 * (1 / 1.8 - 0.5), 1e-12);  // 0.3889
  EXPECT_NEAR(c.hi, 3.0 / 3.6, 1e-12);              // 0.8333
  EXPECT_NEAR(c.q, 18.0 / 7.0, 1e-12);
  EXPECT_GE(c.q, 2.0);
}

TEST(ChooseQ, InfeasibleWhenPTooSmall) {
  EXPECT_THROW(choose_q(4, 4, 1.5), InfeasibleWindow);
  EXPECT_THROW(choose_q(2, 2, 2.0), InfeasibleWindow);
}

TEST(ChooseR, FourFourMidpoint) {
  const auto c = choose_r(4, 4, 1.8);
  EXPECT_NEAR(c.J_lo, 0.4, 1e-12);
  EXPECT_NEAR(c.J_hi, 1.0, 1e-12);
  EXPECT_NEAR(c.inv_r, 0.7, 1e-12);
  EXPECT_TRUE(c.checks.all());
}

TEST(ChooseR, SquareCaseTakesInfiniteR) {
  const auto c = choose_r(2, 4, 1.9);
  EXPECT_TRUE(c.r_infinite);
  EXPECT_GE(2 * p_star(1.9) / c.q, 1.0);
}

TEST(ChooseR, RandomDrawsAlwaysFeasible) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> um(2.05, 10.0), ut(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double m1 = um(rng), m2 = um(rng);
    const double h = m1 * m2 / (m1 + m2);
    const double lo = std::max({5.0 / 3.0, reduction_p0(m1, m2), (h + 1) / 2});
    const double hi = std::min(2.0, h + 1);
    if (!(lo < hi)) continue;
    const double p = lo + (hi - lo) * (0.01 + 0.98 * ut(rng));
    RChoice c;
    ASSERT_NO_THROW(c = choose_r(m1, m2, p)) << m1 << " " << m2 << " " << p;
    EXPECT_TRUE(c.checks.all()) << m1 << " " << m2 << " " << p;
  }
}

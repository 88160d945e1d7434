#include <gtest/gtest.h>

#include <cmath>

#include "restrlab/errors.hpp"
#include "restrlab/summation.hpp"

using namespace restrlab;

TEST(JIntegral, HalfAtMinusOneMinusOne) {
  EXPECT_NEAR(J_closed_form(-1, -1, 0), 0.5, 1e-15);
  EXPECT_NEAR(J_numeric(-1, -1, 0), 0.5, 1e-6);
}

TEST(JIntegral, NumericMatchesClosedForm) {
  for (double a : {-1.0, -2.5})
    for (double b : {-0.5, 0.3, 0.9})
      for (int l : {-12, -3, 0, 4, 15}) {
        if (a + b >= 0) continue;
        const double c = J_closed_form(a, b, l);
        EXPECT_NEAR(J_numeric(a, b, l) / c, 1.0, 1e-6) << a << " " << b << " " << l;
      }
}

TEST(JIntegral, BoundIsOneAtZeroShift) {
  EXPECT_EQ(J_bound(-1, 0.5, 0), 1.0);
  EXPECT_DOUBLE_EQ(J_bound(-1, 0.5, 3), std::pow(2.0, -3.0));
  EXPECT_DOUBLE_EQ(J_bound(-1, 0.5, -4), 4 * std::pow(2.0, 2.0));
}

TEST(JIntegral, StableAtNegativeShifts) {
  const double r10 = J_closed_form(-1, 0.5, -10) / J_bound(-1, 0.5, -10);
  const double r5 = J_closed_form(-1, 0.5, -5) / J_bound(-1, 0.5, -5);
  EXPECT_LE(r10, 2 * r5);
}

TEST(JIntegral, SteepInnerWeightLeavesSingleIntegral) {
  // |b| J(a, b, 0) -> -1/a as b -> -infinity.
  for (double a : {-0.5, -1.0, -3.0}) EXPECT_NEAR(1e4 * J_closed_form(a, -1e4, 0), -1 / a, 1e-3 / std::abs(a));
}

TEST(JIntegral, CheckPasses) {
  const Report r = J_integral_check({});
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.summary["max_ratio"].get<double>(), r.summary["cap"].get<double>());
}

TEST(JIntegral, RejectsHypothesisViolation) {
  JConfig c;
  c.a = 0.5;
  EXPECT_THROW(J_integral_check(c), HypothesisViolation);
}

TEST(AbstractSum, UnitScalesSharp) {
  SumSpec s;  // mu 1/4, nu 1, omega 1/2, n 0, c = (1, 1)
  const auto v = abstract_sum(s);
  EXPECT_GE(v.ratio, 1 - 1e-6);
  EXPECT_LE(v.ratio, abstract_sum_cap(s));
  EXPECT_LT(v.tail, 1e-6);
}

TEST(AbstractSum, HomogeneousWhenMuVanishes) {
  SumSpec s;
  s.mu = 0;
  s.a = 0.3;
  s.b = 2.0;
  const double r = abstract_sum(s).ratio;
  for (double lam : {1e-3, 7.0, 1e3}) {
    SumSpec t = s;
    t.a *= lam;
    t.b *= lam;
    EXPECT_NEAR(abstract_sum(t).ratio / r, 1.0, 1e-12);
  }
}

TEST(AbstractSum, SymmetricUnderSwap) {
  for (const auto& base : default_sum_sets()) {
    SumSpec s = base;
    s.a = 0.02;
    s.b = 5.0;
    SumSpec t = s;
    std::swap(t.a, t.b);
    std::swap(t.c1, t.c2);
    EXPECT_NEAR(abstract_sum(s).ratio / abstract_sum(t).ratio, 1.0, 1e-10);
  }
}

TEST(AbstractSum, PartialSumsIncrease) {
  SumSpec s;
  s.a = 0.1;
  double prev = 0;
  for (int K : {40, 80, 160, 320}) {
    s.K_max = K;
    const double r = abstract_sum(s).ratio;
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(AbstractSum, HypothesisGuard) {
  SumSpec s;
  s.mu = 1.0;
  s.nu = 0.5;
  s.omega = 0.25;  // (c1 v c2) mu = 1 >= nu + omega
  EXPECT_THROW(abstract_sum(s), HypothesisViolation);
  s.mu = 0.1;
  s.nu = 0;
  EXPECT_THROW(abstract_sum(s), HypothesisViolation);
}

TEST(AbstractSum, DefaultCheckPasses) {
  AbstractSumConfig cfg;
  cfg.sets = default_sum_sets();
  cfg.points = 7;
  cfg.omega_zero_record = false;
  const Report r = abstract_sum_check(cfg);
  EXPECT_TRUE(r.pass);
}

TEST(Reduction, FourFourPasses) {
  const Report r = reduction_sums_check({});
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.summary["inv_r"].get<double>(), 0.7, 1e-12);
}

TEST(Reduction, ViolatingRDiverges) {
  ReductionConfig c;
  c.inv_r = 4.0 * (4 - 2) / (4 + 4) + 0.1;
  EXPECT_THROW(reduction_sums_check(c), DivergenceDetected);
}

TEST(Balance, ExactCancellation) {
  const auto b = bourgain_balance(Rational(5), Rational(3, 2), Rational(4), Rational(1));
  EXPECT_TRUE(b.ok);
  EXPECT_EQ(b.term1_exponent, b.p);
  EXPECT_EQ(b.term2_exponent, b.p);
  EXPECT_EQ(b.inv_sprime, Rational(1, 2));  // (h+1)/p = 2/4
  EXPECT_EQ(b.J_exponent, Rational(2));     // h s'
}

TEST(Balance, EqualNormsGiveUnitTerms) {
  const auto b = bourgain_balance(Rational(7, 2), Rational(5, 2), Rational(3), Rational(3, 2));
  const auto v = b.evaluate(2.5, 2.5);
  EXPECT_NEAR(v[0], 1.0, 1e-12);
  EXPECT_NEAR(v[1], 1.0, 1e-12);
}

TEST(Balance, TermsAgreeNumerically) {
  const auto b = bourgain_balance(Rational(7, 2), Rational(5, 2), Rational(3), Rational(3, 2));
  const auto v = b.evaluate(0.5, 3.0);
  EXPECT_NEAR(v[0] / v[1], 1.0, 1e-12);
  EXPECT_NEAR(v[0], std::pow(6.0, 3.0), 1e-9);
}

TEST(Balance, RejectsBadOrdering) {
  EXPECT_THROW(bourgain_balance(Rational(2), Rational(3), Rational(4), Rational(1)), InvalidArgument);
}

TEST(Balance, RandomRecords) { EXPECT_TRUE(balance_check(100, 15).pass); }

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "restrlab/faadibruno.hpp"
#include "restrlab/polynomial.hpp"

using namespace restrlab;

namespace {

using RFn = std::function<Rational(const MultiIndex&)>;
using RInner = std::function<Rational(int, const MultiIndex&)>;

Rational faa_on_polynomials(const Polynomial& f, const std::vector<Polynomial>& g, const MultiIndex& alpha,
                            const std::vector<Rational>& x) {
  std::vector<Rational> gx;
  for (const auto& gj : g) gx.push_back(gj.evaluate(x));
  return faa_derivative<Rational>(alpha, static_cast<int>(g.size()),
                                  RFn([&](const MultiIndex& b) { return f.derivative(b).evaluate(gx); }),
                                  RInner([&](int j, const MultiIndex& gam) {
                                    return g[static_cast<std::size_t>(j)].derivative(gam).evaluate(x);
                                  }));
}

}  // namespace

TEST(Assignments, UnitBetaHasOneAssignment) {
  for (const MultiIndex& alpha : {MultiIndex{3}, MultiIndex{2, 1}, MultiIndex{1, 1, 1}})
    for (int j = 0; j < 2; ++j) {
      MultiIndex beta(2, 0);
      beta[static_cast<std::size_t>(j)] = 1;
      const auto as = enumerate_assignments(alpha, beta, 2);
      ASSERT_EQ(as.size(), 1u);
      const auto& a = as.front();
      const auto g = std::find(a.gammas.begin(), a.gammas.end(), alpha) - a.gammas.begin();
      EXPECT_EQ(a.k[static_cast<std::size_t>(j)][static_cast<std::size_t>(g)], 1);
    }
}

TEST(Assignments, SecondOrderChainRule) {
  const auto as = enumerate_assignments({2}, {2}, 1);
  ASSERT_EQ(as.size(), 1u);
  EXPECT_EQ(as[0].k[0][0], 2);  // gamma = 1 twice: f''(g) g'^2
  EXPECT_EQ(as[0].coefficient, Rational(1));
}

TEST(Assignments, MixedSecondDerivativeHasTwoTerms) {
  EXPECT_EQ(all_assignments({1, 1}, 1).size(), 2u);
}

TEST(Assignments, ConstraintsHold) {
  for (const auto& alpha : multi_indices(2, 4))
    for (const auto& a : all_assignments(alpha, 2)) {
      MultiIndex total(alpha.size(), 0);
      for (int j = 0; j < 2; ++j) {
        int count = 0;
        for (std::size_t g = 0; g < a.gammas.size(); ++g) {
          count += a.k[j][g];
          for (std::size_t i = 0; i < alpha.size(); ++i) total[i] += a.k[j][g] * a.gammas[g][i];
        }
        EXPECT_EQ(count, a.beta[static_cast<std::size_t>(j)]);
      }
      EXPECT_EQ(total, alpha);
    }
}

TEST(Assignments, PermutingAlphaPermutesTerms) {
  EXPECT_EQ(all_assignments({2, 1}, 2).size(), all_assignments({1, 2}, 2).size());
  EXPECT_EQ(all_assignments({3, 1, 0}, 1).size(), all_assignments({0, 1, 3}, 1).size());
}

TEST(Assignments, OneDimensionalCoefficientsSumToBell) {
  // Sum of the 1D coefficients of order k is the Bell number B_k.
  const int bell[] = {1, 1, 2, 5, 15, 52, 203};
  for (int k = 1; k <= 6; ++k) {
    Rational sum = 0;
    for (const auto& a : all_assignments({k}, 1)) sum += a.coefficient;
    EXPECT_EQ(sum, Rational(bell[k])) << k;
  }
}

TEST(FaaDerivative, IdentityInnerGivesOuterDerivative) {
  Polynomial f = (Polynomial::variable(2, 0) + Polynomial::constant(2, 2)).pow(3) * Polynomial::variable(2, 1).pow(2);
  const std::vector<Polynomial> id{Polynomial::variable(2, 0), Polynomial::variable(2, 1)};
  const std::vector<Rational> x{Rational(1, 3), Rational(-2)};
  for (const auto& alpha : multi_indices(2, 4))
    EXPECT_EQ(faa_on_polynomials(f, id, alpha, x), f.derivative(alpha).evaluate(x));
}

TEST(FaaDerivative, ThirdOrderClassicalFormula) {
  // d^3 f(g) = f''' g'^3 + 3 f'' g' g'' + f' g'''
  const Polynomial t = Polynomial::variable(1, 0);
  const Polynomial f = t.pow(5) + t * Polynomial::constant(1, 3);
  const Polynomial g = t.pow(3) * Polynomial::constant(1, 2) - t.pow(2);
  const std::vector<Rational> x{Rational(3, 4)};
  const Rational gx = g.evaluate(x);
  auto fd = [&](int k) { return f.derivative(MultiIndex{k}).evaluate(std::vector<Rational>{gx}); };
  auto gd = [&](int k) { return g.derivative(MultiIndex{k}).evaluate(x); };
  const Rational classical = fd(3) * gd(1) * gd(1) * gd(1) + 3 * fd(2) * gd(1) * gd(2) + fd(1) * gd(3);
  EXPECT_EQ(faa_on_polynomials(f, {g}, {3}, x), classical);
}

TEST(FaaDerivative, RandomPolynomialsExact) {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 2; ++n)
    for (int m = 1; m <= 2; ++m) {
      const Polynomial f = random_polynomial(m, 4, rng);
      std::vector<Polynomial> g;
      for (int j = 0; j < m; ++j) g.push_back(random_polynomial(n, 3, rng));
      std::vector<Rational> x;
      for (int i = 0; i < n; ++i) x.push_back(Rational(i + 2, 3));
      const Polynomial fg = f.compose(g);
      for (const auto& alpha : multi_indices(n, 4))
        EXPECT_EQ(faa_on_polynomials(f, g, alpha, x), fg.derivative(alpha).evaluate(x));
    }
}

TEST(FaaDerivative, OrderCap) {
  auto outer = std::function<double(const MultiIndex&)>([](const MultiIndex&) { return 1.0; });
  auto inner = std::function<double(int, const MultiIndex&)>([](int, const MultiIndex&) { return 1.0; });
  EXPECT_THROW(faa_derivative<double>({7}, 1, outer, inner), OrderTooHigh);
  EXPECT_NO_THROW(faa_derivative<double>({6}, 1, outer, inner));
}

TEST(FaaCheck, DefaultPasses) {
  const Report r = faa_check();
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.summary["fd_max_rel_err"].get<double>(), 1e-6);
}

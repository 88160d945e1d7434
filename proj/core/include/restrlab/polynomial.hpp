#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "restrlab/exponents.hpp"

namespace restrlab {

// Sparse multivariate polynomial with exact rational coefficients. Used as
// the symbolic reference for chain-rule computations.
class Polynomial {
 public:
  using Monomial = std::vector<int>;

  explicit Polynomial(int nvars = 1) : n_(nvars) {}
  static Polynomial constant(int nvars, const Rational& c);
  static Polynomial variable(int nvars, int i);

  int nvars() const { return n_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  void add_term(const Monomial& mono, const Rational& c);
  int degree() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial pow(int e) const;
  bool operator==(const Polynomial& o) const { return n_ == o.n_ && terms_ == o.terms_; }

  Polynomial derivative(int var) const;
  Polynomial derivative(const std::vector<int>& alpha) const;
  // this(sub[0], ..., sub[n-1]); every sub must share one variable count.
  Polynomial compose(const std::vector<Polynomial>& sub) const;
  Rational evaluate(const std::vector<Rational>& x) const;
  double evaluate(const std::vector<double>& x) const;

  std::string str() const;

 private:
  int n_;
  std::map<Monomial, Rational> terms_;
};

// Random polynomial with small integer coefficients and total degree <= deg.
Polynomial random_polynomial(int nvars, int deg, std::mt19937_64& rng, int coef_range = 3);

}  // namespace restrlab

#include "restrlab/polynomial.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "restrlab/errors.hpp"

namespace restrlab {

Polynomial Polynomial::constant(int nvars, const Rational& c) {
  Polynomial p(nvars);
  p.add_term(Monomial(static_cast<std::size_t>(nvars), 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  Polynomial p(nvars);
  Monomial m(static_cast<std::size_t>(nvars), 0);
  m[static_cast<std::size_t>(i)] = 1;
  p.add_term(m, Rational(1));
  return p;
}

void Polynomial::add_term(const Monomial& mono, const Rational& c) {
  if (static_cast<int>(mono.size()) != n_) throw InvalidArgument("monomial arity mismatch");
  if (c == 0) return;
  auto [it, fresh] = terms_.emplace(mono, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, std::accumulate(m.begin(), m.end(), 0));
  return d;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (n_ != o.n_) throw InvalidArgument("polynomial arity mismatch");
  Polynomial r(n_);
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_) {
      Monomial m(m1.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = m1[i] + m2[i];
      r.add_term(m, c1 * c2);
    }
  return r;
}

Polynomial Polynomial::pow(int e) const {
  Polynomial r = constant(n_, Rational(1));
  for (int i = 0; i < e; ++i) r = r * *this;
  return r;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial r(n_);
  for (const auto& [m, c] : terms_) {
    const int e = m[static_cast<std::size_t>(var)];
    if (e == 0) continue;
    Monomial d = m;
    d[static_cast<std::size_t>(var)] = e - 1;
    r.add_term(d, c * e);
  }
  return r;
}

Polynomial Polynomial::derivative(const std::vector<int>& alpha) const {
  Polynomial r = *this;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (int k = 0; k < alpha[i]; ++k) r = r.derivative(static_cast<int>(i));
  return r;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& sub) const {
  if (static_cast<int>(sub.size()) != n_) throw InvalidArgument("compose: wrong number of substitutions");
  const int n = sub.empty() ? 0 : sub[0].nvars();
  Polynomial r(n);
  for (const auto& [m, c] : terms_) {
    Polynomial t = constant(n, c);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] > 0) t = t * sub[i].pow(m[i]);
    r = r + t;
  }
  return r;
}

Rational Polynomial::evaluate(const std::vector<Rational>& x) const {
  Rational s = 0;
  for (const auto& [m, c] : terms_) {
    Rational t = c;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (int k = 0; k < m[i]; ++k) t *= x[i];
    s += t;
  }
  return s;
}

double Polynomial::evaluate(const std::vector<double>& x) const {
  double s = 0;
  for (const auto& [m, c] : terms_) {
    double t = c.convert_to<double>();
    for (std::size_t i = 0; i < m.size(); ++i) t *= std::pow(x[i], m[i]);
    s += t;
  }
  return s;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] > 0) os << "*x" << i << (m[i] > 1 ? "^" + std::to_string(m[i]) : "");
  }
  return os.str();
}

Polynomial random_polynomial(int nvars, int deg, std::mt19937_64& rng, int coef_range) {
  std::uniform_int_distribution<int> coef(-coef_range, coef_range);
  Polynomial p(nvars);
  Polynomial::Monomial m(static_cast<std::size_t>(nvars), 0);
  // Walk every monomial of total degree <= deg in a fixed order.
  std::function<void(int, int)> walk = [&](int i, int left) {
    if (i == nvars) {
      p.add_term(m, Rational(coef(rng)));
      return;
    }
    for (int e = 0; e <= left; ++e) {
      m[static_cast<std::size_t>(i)] = e;
      walk(i + 1, left - e);
    }
    m[static_cast<std::size_t>(i)] = 0;
  };
  walk(0, deg);
  return p;
}

}  // namespace restrlab

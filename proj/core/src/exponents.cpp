#include "restrlab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "restrlab/errors.hpp"

namespace restrlab {

std::optional<Rational> as_rational(double x, long max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  for (long d = 1; d <= max_den; ++d) {
    const double n = x * static_cast<double>(d);
    if (std::abs(n) < 9e15 && n == std::nearbyint(n) &&
        static_cast<double>(static_cast<long long>(n)) / static_cast<double>(d) == x)
      return Rational(static_cast<long long>(n), d);
  }
  return std::nullopt;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

namespace {

void check_m(double m1, double m2) {
  if (!(m1 >= 2.0) || !(m2 >= 2.0)) throw InvalidArgument("exponents need m1, m2 >= 2");
}

template <class T>
struct Thresholds {
  T h, inv_p0, inv_s0, p1;
};

template <class T>
Thresholds<T> thresholds(const T& m1, const T& m2) {
  const T M = m1 > m2 ? m1 : m2;
  const T m = m1 > m2 ? m2 : m1;
  Thresholds<T> t;
  t.h = m1 * m2 / (m1 + m2);
  t.inv_p0 = (M + m) / (4 * M + 2 * m);
  t.inv_s0 = (3 * M + m - m * M) / (4 * M + 2 * m);
  t.p1 = (4 * M + 2) / (M + 2);
  return t;
}

}  // namespace

ExponentData exponent_data(double m1, double m2) {
  check_m(m1, m2);
  ExponentData e;
  e.m1 = m1;
  e.m2 = m2;
  e.mbar = std::max(m1, m2);
  e.m = std::min(m1, m2);
  const auto r1 = as_rational(m1), r2 = as_rational(m2);
  if (r1 && r2) {
    const auto t = thresholds<Rational>(*r1, *r2);
    e.exact = ExactThresholds{t.h, t.inv_p0, t.inv_s0, t.p1};
    e.h = to_double(t.h);
    e.inv_p0 = to_double(t.inv_p0);
    e.inv_s0 = to_double(t.inv_s0);
    e.p1 = to_double(t.p1);
  } else {
    const auto t = thresholds<double>(m1, m2);
    e.h = t.h;
    e.inv_p0 = t.inv_p0;
    e.inv_s0 = t.inv_s0;
    e.p1 = t.p1;
  }
  e.p0 = 1.0 / e.inv_p0;
  e.s0 = e.inv_s0 > 0 ? 1.0 / e.inv_s0 : std::numeric_limits<double>::infinity();
  return e;
}

bool critical_point_consistent(double m1, double m2) {
  check_m(m1, m2);
  const auto r1 = as_rational(m1), r2 = as_rational(m2);
  if (r1 && r2) {
    const auto t = thresholds<Rational>(*r1, *r2);
    const Rational M = std::max(*r1, *r2);
    const bool critical = 1 - t.inv_s0 == (t.h + 1) * t.inv_p0;
    const bool second = t.inv_s0 + (2 * M + 1) * t.inv_p0 == (M + 2) / 2;
    return critical && second;
  }
  const auto t = thresholds<double>(m1, m2);
  const double M = std::max(m1, m2);
  return std::abs(1 - t.inv_s0 - (t.h + 1) * t.inv_p0) < 1e-12 &&
         std::abs(t.inv_s0 + (2 * M + 1) * t.inv_p0 - (M + 2) / 2) < 1e-12;
}

const char* to_string(Figure f) {
  switch (f) {
    case Figure::Fig2: return "Fig2";
    case Figure::Fig3: return "Fig3";
    case Figure::Fig4: return "Fig4";
    case Figure::Fig5: return "Fig5";
  }
  return "?";
}

Figure region_classify(double m1, double m2) {
  check_m(m1, m2);
  const double M = std::max(m1, m2), m = std::min(m1, m2);
  const double h = m1 * m2 / (m1 + m2);
  // The clauses overlap (e.g. (8,4)); the most specific case wins.
  if (M >= 7 && M * m >= 3 * M + m) return Figure::Fig5;
  if (M > 2 * m && M < 7) return Figure::Fig4;
  if (M <= 2 * m && h <= 7.0 / 3.0) return Figure::Fig2;
  return Figure::Fig3;
}

namespace {

template <class T>
RegionVerdict evaluate(const T& m1, const T& m2, const T& inv_s, const T& inv_p, const T& tol,
                       bool at_critical_m2) {
  const T M = m1 > m2 ? m1 : m2;
  const T h = m1 * m2 / (m1 + m2);
  auto lt = [&](const T& a, const T& b) { return a < b - tol; };
  auto le = [&](const T& a, const T& b) { return a <= b + tol; };

  RegionVerdict v;
  const bool c1 = lt(inv_p * 10, T(3)) && lt(inv_p * (h + 1), T(1));
  const bool c2 = le((h + 1) * inv_p, 1 - inv_s);
  const bool c2_strict = lt((h + 1) * inv_p, 1 - inv_s);
  const bool c3 = lt(inv_s + (2 * M + 1) * inv_p, (M + 2) / 2);
  const bool strong_rule = le(inv_p, inv_s) || c2_strict;

  if (!c1) v.failed.push_back("p>max(10/3,h+1)");
  if (!c2) v.failed.push_back("1/s'>=(h+1)/p");
  if (!c3) v.failed.push_back("1/s+(2M+1)/p<(M+2)/2");
  v.weak_type = c1 && c2 && c3;
  if (!strong_rule) v.failed.push_back("strong-type rule: s<=p or 1/s'>(h+1)/p");
  v.admissible = v.weak_type && strong_rule;

  if (!lt(inv_p * (h + 1), T(1))) v.necessary_violations.push_back("p>h+1");
  if (!c2) v.necessary_violations.push_back("1/s'>=(h+1)/p");
  if (!c3 && lt(inv_s, inv_p) && !at_critical_m2)
    v.necessary_violations.push_back("1/s+(2M+1)/p<(M+2)/2");
  if (!strong_rule) v.necessary_violations.push_back("strong-type rule");
  v.strong_type_unknown = at_critical_m2;
  return v;
}

}  // namespace

RegionVerdict admissible(double m1, double m2, double inv_s, double inv_p) {
  check_m(m1, m2);
  if (inv_s < 0 || inv_s >= 1 + 1e-15 || inv_p < 0 || inv_p >= 1)
    throw InvalidArgument("admissible: need s, p in (1, inf] (s = 1 allowed)");
  const auto e = exponent_data(m1, m2);
  const bool m_is_2 = std::min(m1, m2) == 2.0;
  RegionVerdict v;
  const auto r1 = as_rational(m1), r2 = as_rational(m2), rs = as_rational(inv_s),
             rp = as_rational(inv_p);
  if (r1 && r2 && rs && rp) {
    const bool at = m_is_2 && e.exact && *rs == e.exact->inv_s0 && *rp == e.exact->inv_p0;
    v = evaluate<Rational>(*r1, *r2, *rs, *rp, Rational(0), at);
  } else {
    const bool at = m_is_2 && std::abs(inv_s - e.inv_s0) < 1e-12 && std::abs(inv_p - e.inv_p0) < 1e-12;
    v = evaluate<double>(m1, m2, inv_s, inv_p, 1e-12, at);
  }
  v.inv_s = inv_s;
  v.inv_p = inv_p;
  v.figure = region_classify(m1, m2);
  return v;
}

double reduction_p0(double m1, double m2) {
  check_m(m1, m2);
  const double M = std::max(m1, m2), m = std::min(m1, m2);
  return 1.0 + M / (M + m);
}

QChoice choose_q(double m1, double m2, double p) {
  check_m(m1, m2);
  const double M = std::max(m1, m2);
  const double h = m1 * m2 / (m1 + m2);
  const double p0 = reduction_p0(m1, m2);
  std::ostringstream os;
  if (!(2 * p > std::max({10.0 / 3.0, 2 * p0, h + 1})) || !((h + 1) / p > 1)) {
    os << "need 2p > max(10/3, 2p0, h+1) and (h+1)/p > 1; got p=" << p << ", p0=" << p0
       << ", h=" << h;
    throw InfeasibleWindow(os.str());
  }
  QChoice c;
  c.lo = (M + 3) * (1.0 / p - 0.5);
  c.hi = (h + 1) / (2 * p);
  if (!(c.lo < c.hi)) {
    os << "empty window (" << c.lo << ", " << c.hi << ")";
    throw InfeasibleWindow(os.str());
  }
  c.inv_qprime = 0.5 * (c.lo + c.hi);
  // q >= 2 means 1/q' >= 1/2; hi > 1/2 follows from (h+1)/p > 1.
  if (c.inv_qprime < 0.5) c.inv_qprime = 0.5 * (std::max(c.lo, 0.5) + c.hi);
  c.q = 1.0 / (1.0 - c.inv_qprime);
  return c;
}

RChoice choose_r(double m1, double m2, double p, double eps) {
  check_m(m1, m2);
  const double M = std::max(m1, m2), m = std::min(m1, m2);
  const double h = m1 * m2 / (m1 + m2);
  const double p0 = reduction_p0(m1, m2);
  if (!(2 * p > std::max(2 * p0, h + 1))) {
    std::ostringstream os;
    os << "hypotheses of the r-choice fail: p=" << p << ", p0=" << p0 << ", h=" << h;
    throw EmptyJ(os.str());
  }
  const double pp = std::max(p - 2.0, 0.0);
  const double ps = p_star(p);
  const double four_rhs = h + 2 - 2 * p + pp;

  RChoice c;
  c.q = choose_q(m1, m2, p).q;
  c.eps_used = std::min(eps, (p - p0) / (2 * p));

  if (m == 2.0) {
    c.r_infinite = true;
    c.inv_r = 0;
    c.J_lo = c.J_hi = 0;
    c.r_star = std::numeric_limits<double>::infinity();
    c.alpha = 2 * ps / c.q;  // r* = inf: 2p*/q = alpha/r* + 1 in the limit
    c.checks.one = c.checks.one_eps = c.checks.two = c.checks.three = c.checks.threesym = true;
    c.checks.four = 0 > four_rhs;
    c.checks.r_star_ge1 = true;
    c.checks.alpha_pos = 2 * ps / c.q >= 1;
    return c;
  }

  c.J_lo = std::max(0.0, four_rhs);
  const double upper_closed = 1 + pp;
  const double upper_open = M * (m - 2) / (M + m);
  c.J_hi = std::min(upper_closed, upper_open);
  if (!(c.J_lo < c.J_hi)) {
    std::ostringstream os;
    os << "J = ]" << c.J_lo << ", " << c.J_hi << "[ is empty";
    throw EmptyJ(os.str());
  }
  c.inv_r = 0.5 * (c.J_lo + c.J_hi);
  const double ir = c.inv_r;
  const double r = 1.0 / ir;
  const double e = c.eps_used;

  c.checks.one = ir < (m1 - 2) * (p - 1) && ir < (m2 - 2) * (p - 1);
  c.checks.one_eps = ir < (m1 - 2) * (p - e * p - 1) && ir < (m2 - 2) * (p - e * p - 1);
  c.checks.two = ir < (m1 - 2) * (m2 - 2) / (m1 + m2 - 4);
  c.checks.three = ir < m2 * (m1 - 2) / (m1 + m2);
  c.checks.threesym = ir < m1 * (m2 - 2) / (m1 + m2);
  c.checks.four = ir > four_rhs;
  c.r_star = r * p / ps;
  c.checks.r_star_ge1 = c.r_star >= 1 - 1e-12;
  const double inv_rsp = 1 - 1 / c.r_star;
  c.alpha = c.r_star * (2 * ps / c.q - inv_rsp);
  c.checks.alpha_pos = c.alpha > 0;
  return c;
}

}  // namespace restrlab

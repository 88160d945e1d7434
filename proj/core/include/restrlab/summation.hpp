#pragma once

#include <array>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "restrlab/exponents.hpp"
#include "restrlab/report.hpp"

namespace restrlab {

// Parameters of the two-index dyadic sum
//   sum_{k1,k2>=0} (1+k1+k2)^n 2^-(k1+k2) omega (a 2^-k2 c2 v b)^-mu (a v b 2^-k1 c1)^-mu
//                  (a 2^-k1 ^ b 2^-k2)^nu
// compared with (a v b)^-2mu (a ^ b)^nu.
struct SumSpec {
  double mu = 0.25, nu = 1.0, omega = 0.5;
  double n = 0;
  double c1 = 1, c2 = 1;
  double a = 1, b = 1;
  int K_max = 200;
};

enum class SumForm {
  Split,   // the two separate maxima, as in the statement
  Joined,  // (a v b)^-mu (a 2^-k2 c2 v b 2^-k1 c1)^-mu, the intermediate majorant
};

struct SumValue {
  double ratio = 0;    // sum / bound
  double log_bound = 0;  // natural log of the bound
  double tail = 0;     // relative change from K_max to 2 K_max
};

// Throws HypothesisViolation when (c1 v c2) mu >= nu + omega (or nu <= 0) and
// TailTooLarge when doubling K_max moves the sum by 1e-6 or more.
SumValue abstract_sum(const SumSpec& spec, SumForm form = SumForm::Split);

struct AbstractSumConfig {
  std::vector<SumSpec> sets;  // (a, b) are overwritten by the grid
  double log10_lo = -3, log10_hi = 3;
  int points = 13;
  double C_n = 0;  // 0 selects abstract_sum_cap per set; compared after dividing by the log factor
  bool omega_zero_record = true;  // also record the omega = 0 variant of the second set
};
// Upper bound for sum / (bound * max(1, log^(n+1)(a/b + b/a))) from a term-by-term majorant.
double abstract_sum_cap(const SumSpec& spec);
// The three default parameter sets.
std::vector<SumSpec> default_sum_sets();
Report abstract_sum_check(const AbstractSumConfig& cfg);

// J(a, b) = int_{s,t>=1, s >= t 2^l} s^a t^b ds/s dt/t.
double J_closed_form(double a, double b, int l);
// The same integral by nested double-exponential quadrature.
double J_numeric(double a, double b, int l, double tol = 1e-11);
// 2^(l a) for l >= 0 and |l| 2^(|l| b_+) for l < 0 (1 at l = 0).
double J_bound(double a, double b, int l);

struct JConfig {
  double a = -1, b = 0.5;
  int l_lo = -20, l_hi = 20;
  double C = 0;          // ratio cap; 0 selects the cap implied by the closed form
  double rtol = 1e-6;    // numeric vs closed form
};
Report J_integral_check(const JConfig& cfg);

struct ReductionConfig {
  double m1 = 4, m2 = 4, p = 1.8;
  double q = 0;       // 0 selects choose_q
  double inv_r = -1;  // negative selects the midpoint from choose_r
  double eps = 1e-3;
  double tail_tol = 1e-6;
  int L_cap = 1 << 16;
  double C_int = 0;   // intinl cap; 0 selects 1/mu + 1/(nu - mu)
  double C_double = 0;  // 0 selects twice abstract_sum_cap; compared after dividing by the log factor
  double doublesum_eps = 0.01;
};
// (a) the l'-sum with the inner k-sum replaced by its integral comparison,
// (b) the l-integral and l-sum against A^(nu - mu), (c) the four-index sum of the
// dyadic reduction against min^(3-3eps-5/p) max^(1-eps-2/p).
Report reduction_sums_check(const ReductionConfig& cfg);

struct BalanceRecord {
  Rational J_exponent;               // 2^J = (|f|/lambda)^(h s')
  Rational term1_exponent, term2_exponent;  // powers of |f|/lambda after substitution
  Rational p;
  bool ok = false;
  // Numeric value of both weak-type terms at given lambda and |f|.
  std::array<double, 2> evaluate(double lambda, double fnorm) const;
  Rational p1, p2, h, inv_sprime;
};
// s' is determined by 1/s' = (h+1)/p; `inv_s` (when positive) is checked against it.
BalanceRecord bourgain_balance(const Rational& p1, const Rational& p2, const Rational& p, const Rational& h,
                               const Rational& inv_s = Rational(-1));
Report balance_check(std::size_t n, std::uint64_t seed);

}  // namespace restrlab

#pragma once

#include <cstdint>
#include <functional>
#include <type_traits>
#include <vector>

#include "restrlab/errors.hpp"
#include "restrlab/exponents.hpp"
#include "restrlab/report.hpp"

namespace restrlab {

using MultiIndex = std::vector<int>;

int order(const MultiIndex& a);
Rational factorial(const MultiIndex& a);
// All gamma with 0 <= gamma <= alpha componentwise and |gamma| >= 1, graded then lexicographic.
std::vector<MultiIndex> sub_indices(const MultiIndex& alpha);

struct Assignment {
  MultiIndex beta;
  std::vector<MultiIndex> gammas;   // shared index list, see sub_indices
  std::vector<std::vector<int>> k;  // k[j][g]: multiplicity of gamma g for component j
  Rational coefficient;             // alpha! prod 1/(k! gamma!^k)
};

inline constexpr int kMaxFaaOrder = 6;

// Every map k satisfying sum_gamma k[j][gamma] = beta_j and
// sum_j sum_gamma k[j][gamma] gamma = alpha.
std::vector<Assignment> enumerate_assignments(const MultiIndex& alpha, const MultiIndex& beta, int m);
// All assignments for every beta with 1 <= |beta| <= |alpha|.
std::vector<Assignment> all_assignments(const MultiIndex& alpha, int m);

// d^alpha (f o g)(x) for f: R^m -> R and g: R^n -> R^m given by derivative
// oracles. outer(beta) returns d^beta f at g(x); inner(j, gamma) returns
// d^gamma g_j at x. Both are evaluated at a fixed point by the caller.
template <class T>
T faa_derivative(const MultiIndex& alpha, int m,
                 const std::function<T(const MultiIndex&)>& outer,
                 const std::function<T(int, const MultiIndex&)>& inner) {
  if (order(alpha) > kMaxFaaOrder) throw OrderTooHigh("|alpha| exceeds 6");
  if (order(alpha) == 0) return outer(MultiIndex(static_cast<std::size_t>(m), 0));
  const auto gammas = sub_indices(alpha);
  std::vector<std::vector<T>> gval(static_cast<std::size_t>(m), std::vector<T>(gammas.size()));
  for (int j = 0; j < m; ++j)
    for (std::size_t g = 0; g < gammas.size(); ++g) gval[j][g] = inner(j, gammas[g]);
  T total = T(0);
  for (const auto& a : all_assignments(alpha, m)) {
    T term;
    if constexpr (std::is_same_v<T, Rational>)
      term = a.coefficient;
    else
      term = a.coefficient.template convert_to<T>();
    for (int j = 0; j < m; ++j)
      for (std::size_t g = 0; g < gammas.size(); ++g)
        for (int e = 0; e < a.k[j][g]; ++e) term *= gval[j][g];
    total += term * outer(a.beta);
  }
  return total;
}

// Every alpha in N^n with 1 <= |alpha| <= max_order, graded.
std::vector<MultiIndex> multi_indices(int n, int max_order);

struct FaaCheckConfig {
  int max_order = 4;
  int max_dim = 2;     // n and m both run over 1..max_dim
  int trials = 3;      // random polynomial pairs per (n, m)
  std::uint64_t seed = 1;
  double fd_rtol = 1e-6;
  double fd_h = 0.02;
  int fd_points = 11;
};

// Exact comparison against composed-and-differentiated polynomials, and a
// finite-difference comparison on exp/sin/cos test pairs with closed-form
// derivatives. FD error is relative to max(|value|, 1).
Report faa_check(const FaaCheckConfig& cfg = {});

}  // namespace restrlab

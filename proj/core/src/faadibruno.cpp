#include "restrlab/faadibruno.hpp"

#include <numeric>

namespace restrlab {

int order(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

Rational factorial(const MultiIndex& a) {
  Rational f = 1;
  for (int ai : a)
    for (int k = 2; k <= ai; ++k) f *= k;
  return f;
}

std::vector<MultiIndex> sub_indices(const MultiIndex& alpha) {
  std::vector<MultiIndex> out;
  MultiIndex g(alpha.size(), 0);
  while (true) {
    std::size_t i = 0;
    while (i < g.size() && g[i] == alpha[i]) g[i++] = 0;
    if (i == g.size()) break;
    ++g[i];
    out.push_back(g);
  }
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    const int oa = order(a), ob = order(b);
    return oa != ob ? oa < ob : a < b;
  });
  return out;
}

namespace {

struct Search {
  const std::vector<MultiIndex>& gammas;
  const MultiIndex& alpha;
  const MultiIndex& beta;
  int m;
  std::vector<std::vector<int>> k;
  MultiIndex left;  // alpha minus the weighted sum placed so far
  std::vector<Assignment>* out;

  void run(int j, std::size_t g, int count_left) {
    if (j == m) {
      for (int v : left)
        if (v != 0) return;
      Assignment a;
      a.beta = beta;
      a.gammas = gammas;
      a.k = k;
      Rational c = factorial(alpha);
      for (int jj = 0; jj < m; ++jj)
        for (std::size_t gg = 0; gg < gammas.size(); ++gg) {
          const int kk = k[jj][gg];
          if (kk == 0) continue;
          Rational den = factorial(MultiIndex{kk});
          const Rational gf = factorial(gammas[gg]);
          for (int e = 0; e < kk; ++e) den *= gf;
          c /= den;
        }
      a.coefficient = c;
      out->push_back(std::move(a));
      return;
    }
    if (g == gammas.size()) {
      if (count_left == 0) run(j + 1, 0, j + 1 < m ? beta[j + 1] : 0);
      return;
    }
    const auto& gam = gammas[g];
    // Largest multiplicity that keeps the weighted sum below alpha.
    int cap = count_left;
    for (std::size_t i = 0; i < gam.size(); ++i)
      if (gam[i] > 0) cap = std::min(cap, left[i] / gam[i]);
    for (int kk = cap; kk >= 0; --kk) {
      k[j][g] = kk;
      for (std::size_t i = 0; i < gam.size(); ++i) left[i] -= kk * gam[i];
      run(j, g + 1, count_left - kk);
      for (std::size_t i = 0; i < gam.size(); ++i) left[i] += kk * gam[i];
    }
    k[j][g] = 0;
  }
};

void check_ranges(const MultiIndex& alpha, int m) {
  if (order(alpha) > kMaxFaaOrder) throw OrderTooHigh("|alpha| exceeds 6");
  if (m < 1 || m > 3 || alpha.empty() || alpha.size() > 3)
    throw InvalidArgument("Faa di Bruno enumeration supports n, m in [1, 3]");
  for (int a : alpha)
    if (a < 0) throw InvalidArgument("multi-index entries must be non-negative");
}

}  // namespace

std::vector<Assignment> enumerate_assignments(const MultiIndex& alpha, const MultiIndex& beta, int m) {
  check_ranges(alpha, m);
  if (static_cast<int>(beta.size()) != m) throw InvalidArgument("beta must have m entries");
  for (int b : beta)
    if (b < 0) throw InvalidArgument("multi-index entries must be non-negative");
  std::vector<Assignment> out;
  if (order(beta) < 1 || order(beta) > order(alpha)) return out;
  const auto gammas = sub_indices(alpha);
  Search s{gammas, alpha, beta, m,
           std::vector<std::vector<int>>(static_cast<std::size_t>(m), std::vector<int>(gammas.size(), 0)),
           alpha, &out};
  s.run(0, 0, beta[0]);
  return out;
}

std::vector<Assignment> all_assignments(const MultiIndex& alpha, int m) {
  check_ranges(alpha, m);
  std::vector<Assignment> out;
  const int n = order(alpha);
  MultiIndex beta(static_cast<std::size_t>(m), 0);
  std::function<void(int, int)> walk = [&](int j, int left) {
    if (j == m) {
      if (order(beta) >= 1) {
        auto part = enumerate_assignments(alpha, beta, m);
        out.insert(out.end(), part.begin(), part.end());
      }
      return;
    }
    for (int b = 0; b <= left; ++b) {
      beta[static_cast<std::size_t>(j)] = b;
      walk(j + 1, left - b);
    }
    beta[static_cast<std::size_t>(j)] = 0;
  };
  walk(0, n);
  return out;
}

}  // namespace restrlab

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace restrlab {

// Every "comparable up to constants" relation becomes an explicit band.
struct Band {
  double lo = 0.25;
  double hi = 4.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double rms_residual = 0.0;
};

// Ordinary least squares of y against x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Least squares of log(y) against log(x); all inputs must be positive.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

std::vector<double> logspace(double lo_exp10, double hi_exp10, std::size_t n);

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

// Worker count from RESTRLAB_THREADS or the hardware, clamped to >= 1.
unsigned default_threads();
void set_default_threads(unsigned n);

// Finite-difference weights for the derivatives 0..max_order at x0 from
// arbitrary nodes (Fornberg's recursion). Result is [order][node].
std::vector<std::vector<long double>> fornberg_weights(long double x0,
                                                       const std::vector<long double>& nodes,
                                                       int max_order);

// d^alpha f(x) by nested centered stencils with `points` nodes per axis.
long double fd_partial(const std::function<long double(const std::vector<long double>&)>& f,
                       const std::vector<long double>& x, const std::vector<int>& alpha,
                       long double h, int points = 11);

// n-point Gauss-Legendre rule mapped to [a, b].
struct QuadRule {
  std::vector<double> x, w;
};
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// splitmix64 step; used for deterministic per-trial sub-seeding.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace restrlab

#include "restrlab/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "restrlab/errors.hpp"

namespace restrlab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("fit_line needs at least two paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw InvalidArgument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.max_residual = std::max(f.max_residual, std::abs(r));
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw InvalidArgument("fit_loglog: non-positive sample");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

std::vector<double> logspace(double lo_exp10, double hi_exp10, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = std::pow(10.0, lo_exp10 + t * (hi_exp10 - lo_exp10));
  }
  return out;
}

namespace {
std::atomic<unsigned> g_threads{0};
}

unsigned default_threads() {
  if (unsigned t = g_threads.load(); t > 0) return t;
  if (const char* env = std::getenv("RESTRLAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(unsigned n) { g_threads.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::vector<long double>> fornberg_weights(long double x0,
                                                       const std::vector<long double>& nodes,
                                                       int max_order) {
  const int n = static_cast<int>(nodes.size());
  if (n <= max_order) throw InvalidArgument("fornberg_weights: too few nodes for the order");
  std::vector<std::vector<long double>> c(static_cast<std::size_t>(max_order + 1),
                                          std::vector<long double>(nodes.size(), 0.0L));
  long double c1 = 1.0L, c4 = nodes[0] - x0;
  c[0][0] = 1.0L;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    long double c2 = 1.0L;
    const long double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const long double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

long double fd_partial(const std::function<long double(const std::vector<long double>&)>& f,
                       const std::vector<long double>& x, const std::vector<int>& alpha,
                       long double h, int points) {
  if (alpha.size() != x.size()) throw InvalidArgument("fd_partial: arity mismatch");
  // Recurse over axes: the innermost call evaluates f.
  std::function<long double(std::size_t, std::vector<long double>&)> rec =
      [&](std::size_t axis, std::vector<long double>& pt) -> long double {
    if (axis == x.size()) return f(pt);
    const int k = alpha[axis];
    if (k == 0) return rec(axis + 1, pt);
    const int half = points / 2;
    std::vector<long double> nodes;
    for (int i = -half; i <= half; ++i) nodes.push_back(static_cast<long double>(i) * h);
    const auto w = fornberg_weights(0.0L, nodes, k);
    long double s = 0.0L;
    const long double base = pt[axis];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (w[static_cast<std::size_t>(k)][i] == 0.0L) continue;
      pt[axis] = base + nodes[i];
      s += w[static_cast<std::size_t>(k)][i] * rec(axis + 1, pt);
    }
    pt[axis] = base;
    return s;
  };
  std::vector<long double> pt = x;
  return rec(0, pt);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1 || n > 512) throw InvalidArgument("Gauss-Legendre order must lie in [1, 512]");
  QuadRule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    r.x[static_cast<std::size_t>(i)] = c - h * z;
    r.x[static_cast<std::size_t>(n - 1 - i)] = c + h * z;
    r.w[static_cast<std::size_t>(i)] = h * w;
    r.w[static_cast<std::size_t>(n - 1 - i)] = h * w;
  }
  return r;
}

}  // namespace restrlab

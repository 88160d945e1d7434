#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "restrlab/faadibruno.hpp"
#include "restrlab/numerics.hpp"
#include "restrlab/polynomial.hpp"

namespace restrlab {

std::vector<MultiIndex> multi_indices(int n, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 1; k <= max_order; ++k) {
    MultiIndex a(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> fill = [&](int i, int left) {
      if (i == n - 1) {
        a[static_cast<std::size_t>(i)] = left;
        out.push_back(a);
        return;
      }
      for (int v = left; v >= 0; --v) {
        a[static_cast<std::size_t>(i)] = v;
        fill(i + 1, left - v);
      }
    };
    fill(0, k);
  }
  return out;
}

namespace {

std::string index_str(const MultiIndex& a) {
  std::ostringstream os;
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  return os.str();
}

double power(const std::vector<double>& v, const MultiIndex& a) {
  double p = 1;
  for (std::size_t i = 0; i < a.size(); ++i) p *= std::pow(v[i], a[i]);
  return p;
}

double dot(const std::vector<double>& a, const std::vector<double>& x) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
  return s;
}

// exp(a.y) + cos(c.y + phase): every partial derivative in closed form.
struct SmoothOuter {
  std::vector<double> a, c;
  double phase = 0;
  double deriv(const MultiIndex& b, const std::vector<double>& y) const {
    const double k = order(b);
    return power(a, b) * std::exp(dot(a, y)) + power(c, b) * std::cos(dot(c, y) + phase + k * std::numbers::pi / 2);
  }
};

// sin(b.x + shift) + w exp(d.x).
struct SmoothInner {
  std::vector<double> b, d;
  double shift = 0, w = 0.3;
  double deriv(const MultiIndex& g, const std::vector<double>& x) const {
    const double k = order(g);
    return power(b, g) * std::sin(dot(b, x) + shift + k * std::numbers::pi / 2) + w * power(d, g) * std::exp(dot(d, x));
  }
};

}  // namespace

Report faa_check(const FaaCheckConfig& cfg) {
  Report rep;
  rep.name = "faa";
  rep.columns = {"kind", "n", "m", "alpha", "faa", "reference", "error", "pass"};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> num(-4, 4);
  std::uniform_real_distribution<double> U(-1, 1);
  bool exact_all = true;
  double fd_worst = 0;
  std::size_t exact_count = 0;
  for (int n = 1; n <= cfg.max_dim; ++n)
    for (int m = 1; m <= cfg.max_dim; ++m) {
      const auto alphas = multi_indices(n, cfg.max_order);
      for (int t = 0; t < cfg.trials; ++t) {
        const Polynomial f = random_polynomial(m, cfg.max_order, rng);
        std::vector<Polynomial> g;
        for (int j = 0; j < m; ++j) g.push_back(random_polynomial(n, 3, rng));
        const Polynomial fg = f.compose(g);
        std::vector<Rational> x;
        for (int i = 0; i < n; ++i) x.push_back(Rational(num(rng), 3));
        std::vector<Rational> gx;
        for (const auto& gj : g) gx.push_back(gj.evaluate(x));
        for (const auto& alpha : alphas) {
          const Rational ref = fg.derivative(alpha).evaluate(x);
          const Rational val = faa_derivative<Rational>(
              alpha, m, [&](const MultiIndex& b) { return f.derivative(b).evaluate(gx); },
              [&](int j, const MultiIndex& gam) { return g[static_cast<std::size_t>(j)].derivative(gam).evaluate(x); });
          const bool ok = val == ref;
          exact_all = exact_all && ok;
          ++exact_count;
          rep.add_row({std::string("poly"), double(n), double(m), index_str(alpha), to_double(val), to_double(ref),
                       to_double(val - ref), std::string(ok ? "true" : "false")});
        }
      }
      // Smooth pair with a random point in [-1/2, 1/2]^n.
      SmoothOuter F;
      for (int j = 0; j < m; ++j) {
        F.a.push_back(0.8 * U(rng));
        F.c.push_back(1.5 * U(rng));
      }
      F.phase = U(rng);
      std::vector<SmoothInner> G(static_cast<std::size_t>(m));
      for (auto& gj : G) {
        for (int i = 0; i < n; ++i) {
          gj.b.push_back(1.2 * U(rng));
          gj.d.push_back(0.7 * U(rng));
        }
        gj.shift = U(rng);
      }
      std::vector<double> x;
      for (int i = 0; i < n; ++i) x.push_back(0.5 * U(rng));
      std::vector<double> gx;
      for (const auto& gj : G) gx.push_back(gj.deriv(MultiIndex(static_cast<std::size_t>(n), 0), x));
      auto composite = [&](const std::vector<long double>& z) -> long double {
        std::vector<double> zd(z.begin(), z.end()), y;
        for (const auto& gj : G) y.push_back(gj.deriv(MultiIndex(static_cast<std::size_t>(n), 0), zd));
        return F.deriv(MultiIndex(static_cast<std::size_t>(m), 0), y);
      };
      const std::vector<long double> xl(x.begin(), x.end());
      for (const auto& alpha : alphas) {
        const double val = faa_derivative<double>(
            alpha, m, [&](const MultiIndex& b) { return F.deriv(b, gx); },
            [&](int j, const MultiIndex& gam) { return G[static_cast<std::size_t>(j)].deriv(gam, x); });
        const double fd = static_cast<double>(fd_partial(composite, xl, alpha, cfg.fd_h, cfg.fd_points));
        const double err = std::abs(val - fd) / std::max(std::abs(val), 1.0);
        fd_worst = std::max(fd_worst, err);
        rep.add_row({std::string("smooth"), double(n), double(m), index_str(alpha), val, fd, err,
                     std::string(err <= cfg.fd_rtol ? "true" : "false")});
      }
    }
  rep.summary["exact_cases"] = exact_count;
  rep.summary["fd_max_rel_err"] = fd_worst;
  rep.check("polynomial_exact", exact_all);
  rep.check("fd_agreement", fd_worst <= cfg.fd_rtol);
  return rep;
}

}  // namespace restrlab

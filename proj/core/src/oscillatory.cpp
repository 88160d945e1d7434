#include "restrlab/oscillatory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "restrlab/errors.hpp"

namespace restrlab {

namespace {

constexpr int kHigh = 20;
constexpr int kLow = 10;

struct Rule {
  int n = 0;
  std::vector<double> x, w;
  std::vector<std::vector<double>> P;  // P[k][i] = P_k(x_i)
};

template <int N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  r.n = N;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(wt[i]);
      continue;
    }
    r.x.push_back(-ab[i]);
    r.w.push_back(wt[i]);
    r.x.push_back(ab[i]);
    r.w.push_back(wt[i]);
  }
  r.P.assign(N, std::vector<double>(r.x.size()));
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    double p0 = 1.0, p1 = r.x[i];
    r.P[0][i] = p0;
    if (N > 1) r.P[1][i] = p1;
    for (int k = 1; k + 1 < N; ++k) {
      const double p2 = ((2 * k + 1) * r.x[i] * p1 - k * p0) / (k + 1);
      r.P[k + 1][i] = p2;
      p0 = p1;
      p1 = p2;
    }
  }
  return r;
}

const Rule& high_rule() {
  static const Rule r = make_rule<kHigh>();
  return r;
}
const Rule& low_rule() {
  static const Rule r = make_rule<kLow>();
  return r;
}

// j_0..j_{n-1}(x) for x >= 0.
void sph_bessel_all(int n, double x, double* out) {
  if (x == 0.0) {
    out[0] = 1.0;
    for (int k = 1; k < n; ++k) out[k] = 0.0;
    return;
  }
  if (x < 0.5) {
    // Power series; converges fast for small x.
    double lead = 1.0;  // x^k / (2k+1)!!
    for (int k = 0; k < n; ++k) {
      if (k > 0) lead *= x / (2 * k + 1);
      double term = 1.0, sum = 1.0;
      for (int j = 1; j < 12; ++j) {
        term *= -0.5 * x * x / (j * (2 * k + 2 * j + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      out[k] = lead * sum;
    }
    return;
  }
  if (x >= n) {
    out[0] = std::sin(x) / x;
    if (n > 1) out[1] = std::sin(x) / (x * x) - std::cos(x) / x;
    for (int k = 1; k + 1 < n; ++k) out[k + 1] = (2 * k + 1) / x * out[k] - out[k - 1];
    return;
  }
  // Miller's downward recurrence, normalized by sum (2k+1) j_k^2 = 1.
  const int L = n + 40 + static_cast<int>(x);
  std::vector<double> f(static_cast<std::size_t>(L + 2), 0.0);
  f[L + 1] = 0.0;
  f[L] = 1e-300;
  for (int k = L; k >= 1; --k) {
    f[k - 1] = (2 * k + 1) / x * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > 1e250)
      for (int j = k - 1; j <= L; ++j) f[j] *= 1e-250;
  }
  double s = 0.0;
  for (int k = 0; k <= L; ++k) s += (2 * k + 1) * f[k] * f[k];
  double scale = 1.0 / std::sqrt(s);
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  if (std::abs(j0) >= std::abs(j1) ? (j0 * f[0] < 0) : (j1 * f[1] < 0)) scale = -scale;
  for (int k = 0; k < n; ++k) out[k] = f[k] * scale;
}

// Moments int_{-1}^{1} P_k(x) e^{-i W x} dx = 2 (-i)^k j_k(W).
void legendre_moments(double W, cplx* m) {
  double j[kHigh];
  sph_bessel_all(kHigh, std::abs(W), j);
  const cplx mi(0.0, -1.0);
  cplx pw(1.0, 0.0);
  for (int k = 0; k < kHigh; ++k) {
    const double jk = (W < 0 && (k % 2)) ? -j[k] : j[k];
    m[k] = 2.0 * pw * jk;
    pw *= mi;
  }
}

cplx apply_rule(const Rule& R, const std::vector<cplx>& F, const cplx* mom) {
  cplx total(0, 0);
  for (int k = 0; k < R.n; ++k) {
    cplx ck(0, 0);
    for (std::size_t i = 0; i < R.x.size(); ++i) ck += R.w[i] * R.P[k][i] * F[i];
    total += ck * (0.5 * (2 * k + 1)) * mom[k];
  }
  return total;
}

// (1+u)^m - 1 - m u, accurate for small u.
double binomial_remainder(double m, double u) {
  if (std::abs(u) <= 0.5) {
    double coef = m * (m - 1) / 2.0;
    double pw = u * u;
    double sum = 0.0;
    for (int k = 2; k < 200; ++k) {
      const double term = coef * pw;
      sum += term;
      if (coef == 0.0 || std::abs(term) < 1e-18 * std::abs(sum)) break;
      coef *= (m - k) / (k + 1);
      pw *= u;
    }
    return sum;
  }
  return std::pow(1.0 + u, m) - 1.0 - m * u;
}

// psi(c+d) - psi(c) - psi'(c) d for psi = t^m (1 + coef t).
double profile_remainder(const Profile& p, double c, double d) {
  if (c == 0.0) return p.value(d);
  const double m = p.m();
  auto part = [&](double e) { return std::pow(c, e) * binomial_remainder(e, d / c); };
  double r = part(m);
  if (p.c() != 0.0) r += p.c() * part(m + 1);
  return r;
}

OscResult osc_quad_impl(const std::function<double(double)>& phase,
                        const std::function<double(double)>& dphase,
                        const std::function<double(double, double)>& remainder,
                        const std::function<cplx(double)>& amp, double A, double B,
                        const OscOptions& opt) {
  OscResult res;
  if (!(B > A)) return res;
  if (opt.tol < 1e-12 || opt.tol > 1e-2) throw InvalidArgument("oscillatory tolerance out of range");
  const Rule& H = high_rule();
  const Rule& Lr = low_rule();
  const double len = B - A;

  std::vector<std::pair<double, double>> stack{{A, B}};
  std::vector<cplx> Fh(H.x.size()), Fl(Lr.x.size());
  cplx mom[kHigh];
  std::size_t visited = 0;
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    if (++visited > opt.panel_cap)
      throw NonConvergence("panel cap exceeded on [" + format_number(A) + ", " + format_number(B) + "]");
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double dp = dphase(c);
    double max_rem = 0.0, amp_scale = 0.0;
    auto fill = [&](const Rule& R, std::vector<cplx>& F) {
      for (std::size_t i = 0; i < R.x.size(); ++i) {
        const double t = c + h * R.x[i];
        const double rho = remainder(c, t);
        max_rem = std::max(max_rem, std::abs(rho));
        const cplx av = amp ? amp(t) : cplx(1.0, 0.0);
        amp_scale = std::max(amp_scale, std::abs(av));
        F[i] = av * std::polar(1.0, -rho);
      }
    };
    fill(H, Fh);
    max_rem = std::max({max_rem, std::abs(remainder(c, a)), std::abs(remainder(c, b))});
    const bool too_curved = max_rem > opt.max_remainder;
    if (!too_curved) fill(Lr, Fl);
    if (!too_curved) {
      legendre_moments(dp * h, mom);
      const cplx rot = std::polar(h, -phase(c));
      const cplx ih = rot * apply_rule(H, Fh, mom);
      const cplx il = rot * apply_rule(Lr, Fl, mom);
      const double err = std::abs(ih - il);
      const double local_tol = opt.tol * (b - a) / len;
      const double floor = 1e-14 * h * std::max(amp_scale, 1e-300);
      if (err <= std::max(local_tol, floor) || h < 1e-15 * len) {
        res.value += ih;
        res.error += err;
        ++res.panels;
        continue;
      }
    }
    stack.emplace_back(c, b);
    stack.emplace_back(a, c);
  }
  return res;
}

}  // namespace

OscResult osc_quad(const std::function<double(double)>& phase,
                   const std::function<double(double)>& dphase,
                   const std::function<cplx(double)>& amp, double a, double b,
                   const OscOptions& opt) {
  auto rem = [&](double c, double t) { return phase(t) - phase(c) - dphase(c) * (t - c); };
  return osc_quad_impl(phase, dphase, rem, amp, a, b, opt);
}

OscResult osc_integral_1d(const OscPhase1D& ph, const Amplitude& amp, const OscOptions& opt) {
  if (!(ph.t0 >= 0) || !(ph.t1 <= 1.0 + 1e-15) || ph.t1 < ph.t0)
    throw InvalidArgument("oscillatory interval must lie in [0, 1]");
  if (amp.alpha < 0 || amp.alpha >= 1 || amp.beta < 0 || amp.beta >= 1)
    throw InvalidArgument("amplitude exponents must lie in [0, 1)");
  const Profile& psi = ph.psi;
  const double mu = ph.mu, lam = ph.lambda;
  auto log_factor = [&](double t) {
    return amp.beta == 0 ? 1.0 : std::pow(std::abs(std::log(t / 2.0)), -amp.beta);
  };

  if (amp.alpha > 0 && ph.t0 == 0.0) {
    // t = u^g with g = 1/(1-alpha); t^-alpha dt = g du.
    const double g = 1.0 / (1.0 - amp.alpha);
    auto t_of = [g](double u) { return std::pow(u, g); };
    auto phase = [&](double u) {
      const double t = t_of(u);
      return mu * t + lam * psi.value(t);
    };
    auto dphase = [&](double u) {
      if (u == 0.0) return 0.0;
      const double t = t_of(u);
      return (mu + lam * psi.d1(t)) * g * std::pow(u, g - 1.0);
    };
    auto a = [&](double u) {
      const double t = t_of(u);
      const cplx sm = amp.smooth ? amp.smooth(t) : cplx(1.0, 0.0);
      return sm * (g * log_factor(t));
    };
    return osc_quad(phase, dphase, a, 0.0, std::pow(ph.t1, 1.0 - amp.alpha), opt);
  }

  auto phase = [&](double t) { return mu * t + lam * psi.value(t); };
  auto dphase = [&](double t) { return mu + lam * psi.d1(t); };
  auto rem = [&](double c, double t) { return lam * profile_remainder(psi, c, t - c); };
  std::function<cplx(double)> a;
  if (amp.smooth || amp.alpha > 0 || amp.beta > 0) {
    a = [&](double t) {
      const cplx sm = amp.smooth ? amp.smooth(t) : cplx(1.0, 0.0);
      const double sing = amp.alpha > 0 ? std::pow(t, -amp.alpha) : 1.0;
      return sm * (sing * log_factor(t));
    };
  }
  return osc_quad_impl(phase, dphase, rem, a, ph.t0, ph.t1, opt);
}

std::vector<cplx> extension_eval(const ModelSurface& s, const Patch& patch, const PatchFunction& f,
                                 const std::vector<Point3>& points, const OscOptions& opt, int grid) {
  std::vector<cplx> out(points.size());
  const bool use_tensor = grid > 0 || !f.separable();
  if (use_tensor) {
    if (grid <= 0) grid = 128;
    if (grid > 256) throw InvalidArgument("tensor grid is capped at 256 points per axis");
    const Rule& H = high_rule();  // reused as a 20-point panel rule
    const int panels = std::max(1, grid / kHigh);
    std::array<std::vector<double>, 2> nodes, weights;
    for (int ax = 0; ax < 2; ++ax) {
      const double w = patch.d[ax] / panels;
      for (int p = 0; p < panels; ++p) {
        const double c = patch.r[ax] + (p + 0.5) * w;
        for (std::size_t i = 0; i < H.x.size(); ++i) {
          nodes[ax].push_back(c + 0.5 * w * H.x[i]);
          weights[ax].push_back(0.5 * w * H.w[i]);
        }
      }
    }
    std::vector<cplx> fv(nodes[0].size() * nodes[1].size());
    for (std::size_t i = 0; i < nodes[0].size(); ++i)
      for (std::size_t j = 0; j < nodes[1].size(); ++j)
        fv[i * nodes[1].size() + j] = f.separable() ? f.f1(nodes[0][i]) * f.f2(nodes[1][j])
                                                    : f.general(nodes[0][i], nodes[1][j]);
    parallel_for(points.size(), [&](std::size_t k) {
      const Point3& x = points[k];
      std::vector<cplx> e2(nodes[1].size());
      for (std::size_t j = 0; j < nodes[1].size(); ++j)
        e2[j] = std::polar(weights[1][j], -(x.x2 * nodes[1][j] + x.x3 * s.profile(1).value(nodes[1][j])));
      cplx acc(0, 0);
      for (std::size_t i = 0; i < nodes[0].size(); ++i) {
        cplx row(0, 0);
        for (std::size_t j = 0; j < nodes[1].size(); ++j) row += fv[i * nodes[1].size() + j] * e2[j];
        acc += row * std::polar(weights[0][i],
                                -(x.x1 * nodes[0][i] + x.x3 * s.profile(0).value(nodes[0][i])));
      }
      out[k] = acc;
    });
    return out;
  }
  parallel_for(points.size(), [&](std::size_t k) {
    const Point3& x = points[k];
    OscPhase1D p1{x.x1, x.x3, s.profile(0), patch.lo(0), patch.hi(0)};
    OscPhase1D p2{x.x2, x.x3, s.profile(1), patch.lo(1), patch.hi(1)};
    Amplitude a1{f.f1}, a2{f.f2};
    out[k] = osc_integral_1d(p1, a1, opt).value * osc_integral_1d(p2, a2, opt).value;
  });
  return out;
}

cplx patch_measure_ft(const ModelSurface& s, const Patch& p, const Point3& x, double tol) {
  OscOptions opt;
  opt.tol = tol;
  OscPhase1D p1{x.x1, x.x3, s.profile(0), p.lo(0), p.hi(0)};
  OscPhase1D p2{x.x2, x.x3, s.profile(1), p.lo(1), p.hi(1)};
  return osc_integral_1d(p1, {}, opt).value * osc_integral_1d(p2, {}, opt).value;
}

std::array<double, 3> DecayFrame::apply(const Point3& x) const {
  return {diag[0] * (x.x1 + grad0[0] * x.x3), diag[1] * (x.x2 + grad0[1] * x.x3), diag[2] * x.x3};
}

Point3 DecayFrame::inverse(const std::array<double, 3>& y) const {
  Point3 x;
  x.x3 = y[2] / diag[2];
  x.x1 = y[0] / diag[0] - grad0[0] * x.x3;
  x.x2 = y[1] / diag[1] - grad0[1] * x.x3;
  return x;
}

DecayFrame make_decay_frame(const ModelSurface& s, const PatchPair& pair) {
  DecayFrame f;
  f.pair = pair;
  const double k1 = std::max(pair.S.kappa[0], pair.S.kappa[1]);
  const double k2 = std::max(pair.St.kappa[0], pair.St.kappa[1]);
  // Ties go to the first patch.
  f.r0 = k1 <= k2 ? pair.S.r : pair.St.r;
  f.grad0 = s.grad(f.r0[0], f.r0[1]);
  f.diag = {pair.dbar[0], pair.dbar[1],
            std::max(pair.kbar[0] * pair.dbar[0] * pair.dbar[0], pair.kbar[1] * pair.dbar[1] * pair.dbar[1])};
  f.s = 1.0 / std::max(s.m(0), s.m(1));
  return f;
}

std::vector<Point3> decay_samples(const DecayFrame& frame, std::size_t n, std::uint64_t seed, double y_max) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(std::log(1e-2), std::log(y_max));
  std::vector<Point3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> d{g(rng), g(rng), g(rng)};
    const double nrm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    const double r = std::exp(u(rng));
    for (auto& v : d) v *= r / nrm;
    out.push_back(frame.inverse(d));
  }
  return out;
}

Report fourier_decay_check(const ModelSurface& s, const PatchPair& pair, const std::vector<Point3>& samples,
                           const DecayConfig& cfg) {
  if (!pair.admissible) throw InvalidArgument("decay check needs an admissible pair");
  const DecayFrame fr = make_decay_frame(s, pair);
  Report rep;
  rep.name = "decay";
  rep.columns = {"x1", "x2", "x3", "Tx_norm", "measured", "predicted", "ratio", "pass"};
  std::vector<double> ratio(samples.size()), nT(samples.size()), meas(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto y = fr.apply(samples[i]);
    const double ty = cfg.t_scale * std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    const double v = std::abs(patch_measure_ft(s, pair.S, samples[i], cfg.tol)) +
                     std::abs(patch_measure_ft(s, pair.St, samples[i], cfg.tol));
    nT[i] = ty;
    meas[i] = v;
    ratio[i] = v * std::pow(1.0 + ty, fr.s) / (pair.dbar[0] * pair.dbar[1]);
  });
  double sup = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double pred = pair.dbar[0] * pair.dbar[1] * std::pow(1.0 + nT[i], -fr.s);
    rep.add_row({samples[i].x1, samples[i].x2, samples[i].x3, nT[i], meas[i], pred, ratio[i],
                 ratio[i] <= cfg.C ? 1.0 : 0.0});
    sup = std::max(sup, ratio[i]);
  }
  rep.summary["sup_ratio"] = sup;
  rep.summary["s"] = fr.s;
  rep.summary["C"] = cfg.C;
  rep.check("sup_ratio<=C", sup <= cfg.C);
  return rep;
}

}  // namespace restrlab

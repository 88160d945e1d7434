#include "restrlab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "restrlab/errors.hpp"
#include "restrlab/faadibruno.hpp"

namespace restrlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm3(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

// Sample points of a patch on an n x n grid including the corners.
std::vector<std::array<double, 2>> patch_grid(const Patch& P, int n) {
  std::vector<std::array<double, 2>> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double t = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
      const double u = n == 1 ? 0.5 : static_cast<double>(j) / (n - 1);
      out.push_back({P.lo(0) + t * P.d[0], P.lo(1) + u * P.d[1]});
    }
  return out;
}

}  // namespace

double ScalingMap::phi(double e1, double e2) const {
  return surface.phi(a1 * e1, a2 * e2) / a();
}

double ScalingMap::axis_deriv(int i, int k, double e) const {
  const double ai = scale(i);
  return std::pow(ai, k) * surface.profile(i).deriv(k, ai * e) / a();
}

ScalingMap rescale_pair(const ModelSurface& s, const PatchPair& pair) {
  if (!pair.admissible) throw InvalidArgument("rescale_pair: pair is not admissible");
  ScalingMap m{s, pair, pair, pair.kbar[1] * pair.dbar[1], pair.kbar[0] * pair.dbar[0]};
  const std::array<double, 2> a{m.a1, m.a2};
  auto map_patch = [&](Patch P) {
    for (int i = 0; i < 2; ++i) {
      P.r[i] /= a[i];
      P.d[i] /= a[i];
      P.kappa[i] *= a[i] / a[1 - i];
    }
    return P;
  };
  PatchPair& r = m.rescaled;
  r.S = map_patch(pair.S);
  r.St = map_patch(pair.St);
  for (int i = 0; i < 2; ++i) {
    r.dbar[i] = std::max(r.S.d[i], r.St.d[i]);
    r.kbar[i] = std::max(r.S.kappa[i], r.St.kappa[i]);
    r.dr[i] = pair.dr[i] / a[i];
    r.dist[i] = pair.dist[i] / a[i];
  }
  r.kappa_bar = std::max(r.kbar[0], r.kbar[1]);
  r.D = std::min({r.S.d[0], r.S.d[1], r.St.d[0], r.St.d[1]});
  r.a1 = r.kbar[1] * r.dbar[1];
  r.a2 = r.kbar[0] * r.dbar[0];
  return m;
}

PatchPair random_admissible_pair(const ModelSurface& s, std::mt19937_64& rng, const PairOptions& opt) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::array<double, 2> rS{}, dS{}, rT{}, dT{};
    for (int i = 0; i < 2; ++i) {
      const double big = std::exp2(-(3.0 + 5.0 * U(rng)));
      const double small = big * std::exp2(-U(rng));
      const double gap = big * (0.5 + 1.5 * U(rng));
      const double left = small * (1.0 + 3.0 * U(rng));
      // The wider piece sits further from the axis so it also has the larger curvature.
      const double right = left + small + gap;
      if (U(rng) < 0.5) {
        rS[i] = left, dS[i] = small, rT[i] = right, dT[i] = big;
      } else {
        rS[i] = right, dS[i] = big, rT[i] = left, dT[i] = small;
      }
    }
    try {
      return pair_quantities(make_patch(s, rS, dS), make_patch(s, rT, dT), opt);
    } catch (const SeparationViolation&) {
    } catch (const DominanceViolation&) {
    }
  }
  throw NonConvergence("random_admissible_pair: no admissible draw in 1000 attempts");
}

Report verify_rescaled(const ScalingMap& map, const RescaleCheckConfig& cfg) {
  if (cfg.samples < 1 || cfg.samples > 100000) throw InvalidArgument("verify_rescaled: samples in [1, 1e5]");
  const auto& S = map.surface;
  const PatchPair& rp = map.rescaled;
  const int n = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.samples)))));
  Report rep;
  rep.name = "rescaled_assumptions";
  rep.columns = {"check", "axis", "order", "worst", "limit", "pass"};

  auto fail = [&](const std::string& which, double worst) {
    if (!cfg.strict) return;
    std::ostringstream os;
    os << "(" << which << ") worst normalized ratio " << worst;
    throw AssumptionViolation(os.str());
  };

  const std::array<const Patch*, 2> patches{&rp.S, &rp.St};
  // (i): oscillation of the gradient over each patch against kappa_i d_i, with the
  // admissible constant curvature_hi 2^(m-2) divided out; kappa_i d_i <= 1 as well.
  for (int i = 0; i < 2; ++i) {
    const Profile& pr = S.profile(i);
    const double adm = pr.curvature_hi() * std::exp2(std::max(pr.m() - 2.0, 0.0));
    double worst = 0, kd = 0;
    for (const Patch* P : patches) {
      const double base = map.axis_deriv(i, 1, P->r[i]);
      const double unit = P->kappa[i] * P->d[i];
      kd = std::max(kd, unit);
      for (int k = 0; k < n; ++k) {
        const double e = P->lo(i) + P->d[i] * k / (n - 1);
        worst = std::max(worst, std::abs(map.axis_deriv(i, 1, e) - base) / (adm * unit));
      }
    }
    const bool ok = worst <= 1.0 + cfg.slack && kd <= 1.0 + 1e-12;
    rep.add_row({std::string("i"), static_cast<double>(i + 1), 1.0, worst, 1.0,
                 std::string(ok ? "true" : "false")});
    rep.check("i_axis" + std::to_string(i + 1), ok);
    if (!ok) fail("i", worst);
  }
  // (ii): |d_i^k phi_s| against kappa_s (d1_s ^ d2_s)^(2-k); mixed partials vanish.
  for (int k = 2; k <= 4; ++k) {
    double worst = 0;
    for (const Patch* P : patches) {
      const double ks = std::max(P->kappa[0], P->kappa[1]);
      const double Ds = std::min(P->d[0], P->d[1]);
      for (int i = 0; i < 2; ++i) {
        const Profile& pr = S.profile(i);
        const double adm = std::max(pr.deriv_bound(k), 1.0) * std::exp2(std::max(pr.m() - 2.0, 0.0));
        for (int j = 0; j < n; ++j) {
          const double e = P->lo(i) + P->d[i] * j / (n - 1);
          worst = std::max(worst, std::abs(map.axis_deriv(i, k, e)) / (adm * ks * std::pow(Ds, 2.0 - k)));
        }
      }
    }
    const bool ok = worst <= 1.0 + cfg.slack;
    rep.add_row({std::string("ii"), 0.0, static_cast<double>(k), worst, 1.0,
                 std::string(ok ? "true" : "false")});
    rep.check("ii_order" + std::to_string(k), ok);
    if (!ok) fail("ii", worst);
  }
  // (iii): gradient separation between the two patches, in units of m(m-1) kbar_s dbar_s.
  const auto gS = patch_grid(rp.S, n);
  const auto gT = patch_grid(rp.St, n);
  for (int i = 0; i < 2; ++i) {
    const double unit = S.profile(i).curvature_scale() * rp.kbar[i] * rp.dbar[i];
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& x : gS)
      for (const auto& y : gT) {
        const double r = std::abs(map.axis_deriv(i, 1, x[i]) - map.axis_deriv(i, 1, y[i])) / unit;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    const bool ok = lo >= cfg.separation.lo * (1 - cfg.slack) && hi <= cfg.separation.hi * (1 + cfg.slack);
    rep.add_row({std::string("iii_min"), static_cast<double>(i + 1), 1.0, lo, cfg.separation.lo,
                 std::string(ok ? "true" : "false")});
    rep.add_row({std::string("iii_max"), static_cast<double>(i + 1), 1.0, hi, cfg.separation.hi,
                 std::string(ok ? "true" : "false")});
    rep.summary["iii_axis" + std::to_string(i + 1)] = {lo, hi};
    rep.check("iii_axis" + std::to_string(i + 1), ok);
    if (!ok) fail("iii", ok ? hi : (lo < cfg.separation.lo ? lo : hi));
  }
  rep.summary["kbar_dbar_s"] = {rp.kbar[0] * rp.dbar[0], rp.kbar[1] * rp.dbar[1]};
  return rep;
}

std::array<double, 2> max_curvature(const ModelSurface& s, const PatchPair& pair) {
  std::array<double, 2> out{0, 0};
  for (int i = 0; i < 2; ++i)
    for (const Patch* P : {&pair.S, &pair.St})
      for (int k = 0; k <= 32; ++k)
        out[i] = std::max(out[i], std::abs(s.profile(i).d2(P->lo(i) + P->d[i] * k / 32.0)));
  return out;
}

double dyadic_bound(const std::array<double, 2>& rho, const std::array<double, 2>& kappa, double p,
                    double q, double eps) {
  const double qp = q / (q - 1.0);
  const double u = kappa[0] * rho[0] * rho[0], v = kappa[1] * rho[1] * rho[1];
  return std::pow(rho[0] * rho[1], 2.0 / qp - 1.0 / p) * std::pow(std::max(u, v), 1.0 / p - 1.0 + eps) *
         std::pow(std::min(u, v), 1.0 - 2.0 / p - eps);
}

BoundConstants bound_constants(const PatchPair& pair, double p, double q, double eps, const BoundOptions& opt) {
  if (!(p > 5.0 / 3.0 && p <= 2.0)) throw InvalidArgument("bound_constants: p must lie in (5/3, 2]");
  if (!(q >= 2.0)) throw InvalidArgument("bound_constants: q must be >= 2");
  if (!(eps > 0.0 && eps <= 0.1)) throw InvalidArgument("bound_constants: eps must lie in (0, 0.1]");
  const auto& kb = pair.kbar;
  const auto& db = pair.dbar;
  const auto& S = pair.S;
  const auto& T = pair.St;
  BoundConstants b;
  b.Q = pair.Q;
  b.log_factor = 1.0 + std::pow(std::log(std::max(pair.Q, 1.0)), opt.gamma);

  const double mixed = std::min(kb[0] * S.d[0] * T.d[0], kb[1] * S.d[1] * T.d[1]);
  auto X = [&](const Patch& P) {
    return std::max(kb[0] * db[0] * db[0] * P.kappa[1] / kb[1], kb[1] * db[1] * db[1] * P.kappa[0] / kb[0]);
  };
  const double XS = X(S), XT = X(T);

  b.local = std::pow(kb[0] * kb[1], 3.0 / p - 2.0) * std::pow(db[0] * db[1], 5.0 / p - 3.0) *
            std::pow(mixed, 3.0 - 5.0 / p) * std::pow(XS * XT, 0.5 - 1.0 / p) * b.log_factor;

  b.global = std::pow(kb[0] * kb[1], 3.0 / p - 2.0 + 2.0 * eps) *
             std::pow(db[0] * db[1], 5.0 / p - 3.0 + 4.0 * eps) *
             std::pow(S.d[0] * S.d[1] * T.d[0] * T.d[1], 0.5 - 1.0 / q) * b.log_factor *
             std::pow(mixed, 3.0 - 3.0 * eps - 5.0 / p) * std::pow(XS * XT, (1.0 - eps) / 2.0 - 1.0 / p);

  const std::array<double, 2> kap{opt.kappa_max[0] > 0 ? opt.kappa_max[0] : kb[0],
                                  opt.kappa_max[1] > 0 ? opt.kappa_max[1] : kb[1]};
  b.dyadic = dyadic_bound(db, kap, p, q, eps);
  b.dyadic_hypothesis = p < 2.0 && (opt.m_max + 3.0) * (1.0 / p - 0.5) < 1.0 - 1.0 / q;
  return b;
}

bool Cuboid::contains(const Point3& x) const {
  return std::abs(x.x1 + g[0] * x.x3) <= half[0] && std::abs(x.x2 + g[1] * x.x3) <= half[1] &&
         std::abs(x.x3) <= half[2];
}

Cuboid cuboid_Q1(const ModelSurface& s, const PatchPair& pair, double R) {
  if (!(R >= 1.0)) throw InvalidArgument("cuboid_Q1: R must be >= 1");
  const DecayFrame fr = make_decay_frame(s, pair);
  Cuboid c;
  c.r0 = fr.r0;
  c.g = fr.grad0;
  c.R = R;
  const double R2 = R * R;
  c.half = {R2 / pair.dbar[0], R2 / pair.dbar[1],
            R2 / std::min(pair.kbar[0] * pair.dbar[0] * pair.dbar[0], pair.kbar[1] * pair.dbar[1] * pair.dbar[1])};
  return c;
}

Report cuboid_containment_check(const ModelSurface& s, const PatchPair& pair, double R, std::size_t n,
                                std::uint64_t seed) {
  const Cuboid c = cuboid_Q1(s, pair, R);
  const DecayFrame fr = make_decay_frame(s, pair);
  // Boundary points are compared against a cuboid widened by rounding slack only.
  Cuboid loose = c;
  for (auto& h : loose.half) h *= 1.0 + 1e-12;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Report rep;
  rep.name = "cuboid_containment";
  rep.columns = {"x1", "x2", "x3", "fill", "pass"};
  double worst = 0;
  bool all = true;
  for (std::size_t k = 0; k < n; ++k) {
    std::array<double, 3> y{g(rng), g(rng), g(rng)};
    const double nr = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    for (auto& v : y) v *= R / nr;
    const Point3 x = fr.inverse(y);
    // Largest fraction of a half-extent used by x.
    const double fill = std::max({std::abs(x.x1 + c.g[0] * x.x3) / c.half[0],
                                  std::abs(x.x2 + c.g[1] * x.x3) / c.half[1], std::abs(x.x3) / c.half[2]});
    worst = std::max(worst, fill);
    const bool ok = loose.contains(x);
    all = all && ok;
    rep.add_row({x.x1, x.x2, x.x3, fill, std::string(ok ? "true" : "false")});
  }
  rep.check("contained", all);
  rep.summary["max_fill"] = worst;
  rep.check("center", c.contains({0, 0, 0}));
  return rep;
}

namespace {

struct Frame {
  Vec3 E, h1, h2, n2;
  bool identity = false;
};

Frame reparam_frame(Vec3 n2) {
  const double nn = norm3(n2);
  if (!(nn > 0)) throw InvalidArgument("reparametrize_graph: n2 must be nonzero");
  n2 = scaled(n2, 1.0 / nn);
  const Vec3 n1{0, 0, 1};
  Frame f;
  f.n2 = n2;
  const Vec3 c = cross(n1, n2);
  const double cn = norm3(c);
  if (cn < 1e-12) {
    f.E = {1, 0, 0};
    f.identity = n2[2] > 0;
  } else {
    f.E = scaled(c, 1.0 / cn);
  }
  f.h1 = cross(f.E, n1);
  f.h2 = cross(f.E, f.n2);
  return f;
}

}  // namespace

ReparamResult reparametrize_graph(const ReparamConfig& cfg) {
  const ModelSurface& S = cfg.surface;
  const Patch& P = cfg.patch;
  if (cfg.grid < 2) throw InvalidArgument("reparametrize_graph: grid must be >= 2");
  const Frame fr = reparam_frame(cfg.n2);
  ReparamResult out;
  out.E = fr.E;
  out.h1 = fr.h1;
  out.h2 = fr.h2;
  const Vec3 n1{0, 0, 1};

  // Transversality on a grid of the patch.
  double tmin = std::numeric_limits<double>::infinity();
  for (const auto& v : patch_grid(P, std::max(cfg.grid, 8))) {
    const auto gr = S.grad(v[0], v[1]);
    const Vec3 N = scaled(Vec3{-gr[0], -gr[1], 1.0}, 1.0 / std::sqrt(1 + gr[0] * gr[0] + gr[1] * gr[1]));
    tmin = std::min(tmin, std::abs(dot(fr.n2, N)));
  }
  out.min_transversality = tmin;
  if (tmin < cfg.a_min) {
    std::ostringstream os;
    os << "min |<n2, N>| = " << tmin << " < " << cfg.a_min;
    throw TransversalityFailure(os.str());
  }

  auto eta = [&](double xp, double u) {
    return std::array<double, 2>{xp * fr.E[0] + u * fr.h1[0], xp * fr.E[1] + u * fr.h1[1]};
  };
  // The fiber {u : x' E + u h1 in the rectangle} as an interval.
  auto fiber = [&](double xp) {
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i) {
      const double base = xp * fr.E[i];
      if (std::abs(fr.h1[i]) < 1e-15) {
        if (base < P.lo(i) || base > P.hi(i)) return std::array<double, 2>{1.0, 0.0};
        continue;
      }
      double a = (P.lo(i) - base) / fr.h1[i], b = (P.hi(i) - base) / fr.h1[i];
      if (a > b) std::swap(a, b);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    }
    return std::array<double, 2>{lo, hi};
  };
  auto g_of = [&](double xp, double u) {
    const auto e = eta(xp, u);
    return u * dot(fr.h1, fr.h2) + S.phi(e[0], e[1]) * dot(n1, fr.h2);
  };
  auto dg_du = [&](double xp, double u) {
    const auto e = eta(xp, u);
    const auto gr = S.grad(e[0], e[1]);
    return dot(fr.h1, fr.h2) + (gr[0] * fr.h1[0] + gr[1] * fr.h1[1]) * dot(n1, fr.h2);
  };
  // Bisection on the monotone fiber map; the bracket is widened slightly so
  // finite-difference stencils may step just outside the patch.
  auto solve_u = [&](double xp, double s) {
    if (fr.identity) return s;
    auto f = fiber(xp);
    const double pad = 0.25 * (f[1] - f[0]) + 1e-9;
    double a = f[0] - pad, b = f[1] + pad;
    double ga = g_of(xp, a) - s;
    const double gb = g_of(xp, b) - s;
    if (ga * gb > 0) throw NonConvergence("reparametrize_graph: s outside the fiber image");
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double c = 0.5 * (a + b);
      const double gc = g_of(xp, c) - s;
      if ((gc < 0) == (ga < 0)) {
        a = c;
        ga = gc;
      } else {
        b = c;
      }
    }
    return 0.5 * (a + b);
  };
  auto phi2 = [&, fr](double xp, double s) {
    const double u = solve_u(xp, s);
    const auto e = eta(xp, u);
    return u * dot(fr.h1, fr.n2) + S.phi(e[0], e[1]) * dot(n1, fr.n2);
  };
  out.phi2 = phi2;

  // Range of x' over the rectangle.
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  for (double c0 : {P.lo(0), P.hi(0)})
    for (double c1 : {P.lo(1), P.hi(1)}) {
      const double xp = c0 * fr.E[0] + c1 * fr.E[1];
      xlo = std::min(xlo, xp);
      xhi = std::max(xhi, xp);
    }

  // Samples, the identity residual and the transported norm of f1 = 1.
  const QuadRule gl = gauss_legendre(16);
  double area = 0, jac = 0, ident = 0;
  const double dx = (xhi - xlo) / cfg.grid;
  for (int a = 0; a < cfg.grid; ++a) {
    const double xp = xlo + (a + 0.5) * dx;
    const auto f = fiber(xp);
    if (!(f[1] > f[0])) continue;
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double u = 0.5 * (f[0] + f[1]) + 0.5 * (f[1] - f[0]) * gl.x[q];
      const double w = 0.5 * (f[1] - f[0]) * gl.w[q] * dx;
      area += w;
      jac += w / std::abs(dg_du(xp, u));
    }
    const double s0 = g_of(xp, f[0]), s1 = g_of(xp, f[1]);
    for (int b = 0; b < cfg.grid; ++b) {
      const double s = s0 + (s1 - s0) * (b + 0.5) / cfg.grid;
      const double v = phi2(xp, s);
      out.samples.push_back({xp, s, v});
      if (fr.identity) {
        const auto e = eta(xp, s);
        ident = std::max(ident, std::abs(v - S.phi(e[0], e[1])));
      }
    }
  }
  out.norm_ratio = std::sqrt(area / jac);

  Report& rep = out.report;
  rep.name = "reparametrize";
  rep.columns = {"xp", "s", "order", "exact", "fd", "rel_err", "phi2_ratio", "phi1_ratio", "pass"};

  // Normalized sizes |d^alpha phi| / (kappa D^(2-|alpha|)) of the original graph.
  const double kap = std::max(P.kappa[0], P.kappa[1]);
  const double D = std::min(P.d[0], P.d[1]);
  std::array<double, 5> phi1_ratio{};
  for (const auto& v : patch_grid(P, 9))
    for (int l = 2; l <= 4; ++l)
      for (int k = 0; k <= l; ++k)
        phi1_ratio[l] = std::max(phi1_ratio[l], std::abs(S.partial(k, l - k, v[0], v[1])) /
                                                     (kap * std::pow(D, 2.0 - l)));

  // Exact derivatives of phi2 from H(X) = X3 - phi(X1, X2) vanishing along
  // psi(x', s) = x' E + s h2 + phi2 n2, solved order by order with Faa di Bruno.
  auto exact = [&](double xp, double s, int max_order) {
    const double v = phi2(xp, s);
    const Vec3 X{xp * fr.E[0] + s * fr.h2[0] + v * fr.n2[0], xp * fr.E[1] + s * fr.h2[1] + v * fr.n2[1],
                 xp * fr.E[2] + s * fr.h2[2] + v * fr.n2[2]};
    const std::function<double(const MultiIndex&)> outer = [&](const MultiIndex& b) -> double {
      if (b[2] == 1 && b[0] == 0 && b[1] == 0) return 1.0;
      if (b[2] >= 1) return 0.0;
      return -S.partial(b[0], b[1], X[0], X[1]);
    };
    const auto gr = S.grad(X[0], X[1]);
    const Vec3 gradH{-gr[0], -gr[1], 1.0};
    const double Hn = dot(gradH, fr.n2);
    std::map<MultiIndex, double> d;
    d[{1, 0}] = -dot(gradH, fr.E) / Hn;
    d[{0, 1}] = -dot(gradH, fr.h2) / Hn;
    for (int l = 2; l <= max_order; ++l)
      for (int k = l; k >= 0; --k) {
        const MultiIndex alpha{k, l - k};
        const std::function<double(int, const MultiIndex&)> inner = [&](int j, const MultiIndex& g) -> double {
          if (g == alpha) return 0.0;
          if (g[0] + g[1] == 1) {
            const Vec3& e = g[0] == 1 ? fr.E : fr.h2;
            return e[j] + d.at(g) * fr.n2[j];
          }
          return d.at(g) * fr.n2[j];
        };
        d[alpha] = -faa_derivative<double>(alpha, 3, outer, inner) / Hn;
      }
    return d;
  };

  // Implicit differentiation divides by the transversality once per order and
  // twice per extra factor, so the admissible size grows like tmin^-(2l-1).
  auto limit = [&](int l) {
    double A = 1.0;
    for (int k = 2; k <= l; ++k) A = std::max(A, phi1_ratio[k]);
    return cfg.C_adm * A * std::pow(tmin, -(2.0 * l - 1.0));
  };
  const int spots = std::max(1, cfg.spot_points);
  std::array<double, 5> phi2_ratio{};
  double worst_fd = 0;
  for (int k = 0; k < spots; ++k) {
    const double xp = xlo + (xhi - xlo) * (k + 1.0) / (spots + 1.0);
    const auto f = fiber(xp);
    if (!(f[1] > f[0])) continue;
    const double s = g_of(xp, 0.5 * (f[0] + f[1]));
    const auto d = exact(xp, s, 4);
    const double h = 0.01 * D;
    for (int l = 2; l <= 3; ++l)
      for (int a = 0; a <= l; ++a) {
        const MultiIndex alpha{a, l - a};
        const long double fd = fd_partial(
            [&](const std::vector<long double>& x) {
              return static_cast<long double>(phi2(static_cast<double>(x[0]), static_cast<double>(x[1])));
            },
            {xp, s}, alpha, h, 7);
        const double ex = d.at(alpha);
        const double scale = kap * std::pow(D, 2.0 - l);
        const double err = std::abs(static_cast<double>(fd) - ex) / (std::abs(ex) + scale);
        const double r2 = std::abs(ex) / scale;
        phi2_ratio[l] = std::max(phi2_ratio[l], r2);
        worst_fd = std::max(worst_fd, err);
        const bool ok = err <= cfg.fd_rtol && r2 <= limit(l);
        rep.add_row({xp, s, static_cast<double>(l), ex, static_cast<double>(fd), err, r2, phi1_ratio[l],
                     std::string(ok ? "true" : "false")});
      }
    for (int a = 0; a <= 4; ++a)
      phi2_ratio[4] = std::max(phi2_ratio[4], std::abs(d.at({a, 4 - a})) / (kap * std::pow(D, -2.0)));
  }
  rep.summary["min_transversality"] = tmin;
  rep.summary["norm_ratio"] = out.norm_ratio;
  rep.summary["fd_rel_err"] = worst_fd;
  rep.summary["phi2_ratio"] = {phi2_ratio[2], phi2_ratio[3], phi2_ratio[4]};
  rep.summary["phi1_ratio"] = {phi1_ratio[2], phi1_ratio[3], phi1_ratio[4]};
  if (fr.identity) rep.summary["identity_residual"] = ident;
  rep.check("fd_agreement", worst_fd <= cfg.fd_rtol);
  for (int l = 2; l <= 4; ++l)
    rep.check("bound_order" + std::to_string(l), phi2_ratio[l] <= limit(l));
  rep.check("norm_ratio", out.norm_ratio >= 1.0 / cfg.C_adm && out.norm_ratio <= cfg.C_adm);
  return out;
}

namespace {

// |int_lo^hi w(xi) exp(-i (z (xi - lo) + t (psi(xi) - psi(lo) - g (xi - lo)))) dxi| on the
// midpoint grid z_k = -X + (k + 1/2) hz, for one value of t.
struct AxisKernel {
  std::vector<double> off, rem;  // xi - lo and psi(xi) - psi(lo) - g (xi - lo) at the nodes
  std::vector<cplx> wf;          // quadrature weight times density
};

AxisKernel make_kernel(const AxisData& ax, int patch, double g, double X, double X3, int panel_nodes) {
  const double lo = ax.lo[patch], hi = ax.hi[patch];
  const double len = hi - lo;
  double dev = 0;
  for (int k = 0; k <= 64; ++k) {
    const double x = lo + len * k / 64.0;
    const double h = 1e-6 * std::max(len, 1e-12);
    dev = std::max(dev, std::abs((ax.psi(x + h) - ax.psi(x - h)) / (2 * h) - g));
  }
  const double phase = len * (X + X3 * dev);
  const int panels = static_cast<int>(std::ceil(phase / (2 * kPi))) + 1;
  const QuadRule q = gauss_legendre(panel_nodes);
  AxisKernel K;
  const double p0 = ax.psi(lo);
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double a = lo + len * pnl / panels, b = lo + len * (pnl + 1) / panels;
    for (std::size_t j = 0; j < q.x.size(); ++j) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * q.x[j];
      K.off.push_back(x - lo);
      K.rem.push_back(ax.psi(x) - p0 - g * (x - lo));
      K.wf.push_back(0.5 * (b - a) * q.w[j] * (ax.w[patch] ? ax.w[patch](x) : cplx(1.0)));
    }
  }
  return K;
}

void kernel_modulus(const AxisKernel& K, double t, double X, int n, std::vector<double>& out) {
  const std::size_t M = K.off.size();
  std::vector<cplx> W(M), cur(M), step(M);
  const double hz = 2 * X / n;
  const double z0 = -X + 0.5 * hz;
  for (std::size_t j = 0; j < M; ++j) {
    W[j] = K.wf[j] * std::polar(1.0, -t * K.rem[j]);
    cur[j] = std::polar(1.0, -z0 * K.off[j]);
    step[j] = std::polar(1.0, -hz * K.off[j]);
  }
  out.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    cplx s = 0;
    for (std::size_t j = 0; j < M; ++j) {
      s += W[j] * cur[j];
      cur[j] *= step[j];
    }
    out[static_cast<std::size_t>(k)] = std::abs(s);
  }
}

}  // namespace

double bilinear_norm(const std::array<AxisData, 2>& axes, const ShearedBox& box, double p, const BilinearGrid& grid) {
  if (!(p >= 1.0)) throw InvalidArgument("bilinear_norm: p must be >= 1");
  if (grid.n_axis < 2 || grid.n_vert < 2) throw InvalidArgument("bilinear_norm: grid too small");
  std::array<std::array<AxisKernel, 2>, 2> K;
  for (int i = 0; i < 2; ++i)
    for (int s = 0; s < 2; ++s) K[i][s] = make_kernel(axes[i], s, box.g[i], box.X[i], box.X3, grid.panel_nodes);
  const int nv = grid.n_vert;
  const double h3 = 2 * box.X3 / nv;
  std::vector<double> slab(static_cast<std::size_t>(nv), 0.0);
  parallel_for(static_cast<std::size_t>(nv), [&](std::size_t k) {
    const double t = -box.X3 + (static_cast<double>(k) + 0.5) * h3;
    double prod = 1.0;
    std::vector<double> A, B;
    for (int i = 0; i < 2; ++i) {
      kernel_modulus(K[i][0], t, box.X[i], grid.n_axis, A);
      kernel_modulus(K[i][1], t, box.X[i], grid.n_axis, B);
      double s = 0;
      for (int j = 0; j < grid.n_axis; ++j) s += std::pow(A[static_cast<std::size_t>(j)] * B[static_cast<std::size_t>(j)], p);
      prod *= s * 2 * box.X[i] / grid.n_axis;
    }
    slab[k] = prod;
  });
  double total = 0;
  for (double v : slab) total += v * h3;
  return std::pow(total, 1.0 / p);
}

namespace {

// Separable unit-norm density: per axis a short random cosine series in the
// patch-relative coordinate, normalized in L^2 of that interval.
std::function<cplx(double)> random_axis_density(std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> g;
  std::array<cplx, 4> c{};
  for (auto& v : c) v = {g(rng), g(rng)};
  auto raw = [c, lo, hi](double x) {
    const double t = (x - lo) / (hi - lo);
    cplx s = 0;
    for (int k = 0; k < 4; ++k) s += c[static_cast<std::size_t>(k)] * std::cos(k * kPi * t);
    return s;
  };
  const QuadRule q = gauss_legendre(32, lo, hi);
  double n2 = 0;
  for (std::size_t j = 0; j < q.x.size(); ++j) n2 += q.w[j] * std::norm(raw(q.x[j]));
  const double scale = 1.0 / std::sqrt(n2);
  return [raw, scale](double x) { return raw(x) * scale; };
}

}  // namespace

Report bilinear_empirical(const BilinearConfig& cfg) {
  if (cfg.trials < 1 || cfg.trials > 50) throw InvalidArgument("bilinear_empirical: trials in [1, 50]");
  if (cfg.depths.empty()) throw InvalidArgument("bilinear_empirical: no depths");
  const ModelSurface& S = cfg.surface;
  Report rep;
  rep.name = "bilinear";
  rep.columns = {"depth", "trial", "norm", "bound", "ratio"};
  std::vector<double> rho, mean_norm, bounds;
  double worst = 0, refine = 0;
  for (int depth : cfg.depths) {
    if (depth < 1) throw InvalidArgument("bilinear_empirical: depth must be >= 1");
    const int j = depth + 1;
    const double r = std::ldexp(1.0, -j);
    // Congruent neighbours with one empty interval between them, away from the axes.
    const Patch P = make_patch(S, {0.25, 0.25}, {r, r});
    const Patch Pt = make_patch(S, {0.25 + 2 * r, 0.25 + 2 * r}, {r, r});
    const PatchPair pair = pair_quantities(P, Pt, {cfg.p, Band{0.25, 4.0}});
    const Cuboid box = cuboid_Q1(S, pair, cfg.R);
    const double bound = dyadic_bound(pair.dbar, max_curvature(S, pair), cfg.p, 2.0, cfg.eps);
    const ShearedBox sb{box.g, {box.half[0], box.half[1]}, box.half[2]};
    // The x3 profile varies on the scale 1/(psi'' d^2); keep about one sample per
    // two such units, as the paraboloid needs.
    BilinearGrid grid = cfg.grid;
    const auto kmax = max_curvature(S, pair);
    const double units = box.half[2] * std::max(kmax[0], kmax[1]) * r * r;
    while (grid.n_vert < units / 2 && grid.n_vert < 4096) grid.n_vert *= 2;
    rep.summary["n_vert"][std::to_string(depth)] = grid.n_vert;
    double sum = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      std::mt19937_64 rng(sub_seed(cfg.seed, static_cast<std::uint64_t>(t)));
      std::array<AxisData, 2> axes;
      for (int i = 0; i < 2; ++i) {
        const Profile pr = S.profile(i);
        axes[i].psi = [pr](double x) { return pr.value(x); };
        axes[i].lo = {P.lo(i), Pt.lo(i)};
        axes[i].hi = {P.hi(i), Pt.hi(i)};
      }
      for (int i = 0; i < 2; ++i)
        for (int s = 0; s < 2; ++s) {
          auto w = random_axis_density(rng, axes[i].lo[s], axes[i].hi[s]);
          axes[i].w[s] = cfg.zero ? std::function<cplx(double)>([](double) { return cplx(0.0); }) : w;
        }
      const double nrm = bilinear_norm(axes, sb, cfg.p, grid);
      if (t == 0 && !cfg.zero) {
        BilinearGrid fine = grid;
        fine.n_axis *= 2;
        fine.n_vert *= 2;
        const double ref = bilinear_norm(axes, sb, cfg.p, fine);
        refine = std::max(refine, std::abs(nrm - ref) / ref);
      }
      const double ratio = nrm / bound;
      worst = std::max(worst, ratio);
      sum += nrm;
      rep.add_row({static_cast<double>(depth), static_cast<double>(t), nrm, bound, ratio});
    }
    rho.push_back(r);
    mean_norm.push_back(sum / cfg.trials);
    bounds.push_back(bound);
  }
  rep.summary["max_ratio"] = worst;
  rep.summary["refinement_rel_diff"] = refine;
  rep.check("ratio_le_C", worst <= cfg.C_emp);
  rep.check("refinement", refine <= cfg.refine_tol);
  if (rho.size() >= 2 && !cfg.zero) {
    const LinearFit m = fit_loglog(rho, mean_norm);
    const LinearFit b = fit_loglog(rho, bounds);
    if (!std::isfinite(m.slope)) throw FitUnstable("bilinear_empirical: non-finite exponent fit");
    rep.summary["measured_exponent"] = m.slope;
    rep.summary["bound_exponent"] = b.slope;
    rep.check("exponent", std::abs(m.slope - b.slope) <= cfg.exponent_slack);
  }
  return rep;
}

}  // namespace restrlab

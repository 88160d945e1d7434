#include "restrlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "restrlab/errors.hpp"

namespace restrlab {

double falling_factorial(double x, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= (x - i);
  return out;
}

Profile Profile::make(double m, ProfileKind kind, double c) {
  if (!(m >= 2.0)) throw InvalidArgument("profile exponent must satisfy m >= 2");
  if (kind == ProfileKind::Power) c = 0.0;
  if (std::abs(c) > 0.1) throw InvalidArgument("perturbation |c| must not exceed 0.1");
  // psi'' = t^(m-2) (m(m-1) + c m(m+1) t); positivity on (0,1] is decided at t = 1.
  if (m * (m - 1.0) + std::min(0.0, c) * m * (m + 1.0) <= 0.0)
    throw InvalidArgument("perturbation makes psi'' vanish on (0,1]");
  return Profile(m, kind, c);
}

namespace {
double term(double coef, double t, double e) {
  if (coef == 0.0) return 0.0;
  return coef * std::pow(t, e);
}
}  // namespace

double Profile::deriv(int k, double t) const {
  double v = term(falling_factorial(m_, k), t, m_ - k);
  if (c_ != 0.0) v += c_ * term(falling_factorial(m_ + 1.0, k), t, m_ + 1.0 - k);
  return v;
}

double Profile::curvature_lo() const {
  return std::min(m_ * (m_ - 1.0), m_ * (m_ - 1.0) + c_ * m_ * (m_ + 1.0));
}

double Profile::curvature_hi() const {
  return std::max(m_ * (m_ - 1.0), m_ * (m_ - 1.0) + c_ * m_ * (m_ + 1.0));
}

double Profile::deriv_bound(int k) const {
  return std::abs(falling_factorial(m_, k)) + std::abs(c_) * std::abs(falling_factorial(m_ + 1.0, k));
}

ProfileCheck check_profile(const Profile& p, std::size_t n) {
  ProfileCheck out;
  out.ratio_min = std::numeric_limits<double>::infinity();
  out.ratio_max = 0;
  const double m = p.m();
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    const double r = p.d2(t) / std::pow(t, m - 2.0);
    out.ratio_min = std::min(out.ratio_min, r);
    out.ratio_max = std::max(out.ratio_max, r);
    out.deriv3_ratio = std::max(out.deriv3_ratio, std::abs(p.deriv(3, t)) / std::pow(t, m - 3.0));
    out.deriv4_ratio = std::max(out.deriv4_ratio, std::abs(p.deriv(4, t)) / std::pow(t, m - 4.0));
  }
  const double slack = 1e-12;
  out.ok = out.ratio_min >= p.curvature_lo() * (1 - slack) &&
           out.ratio_max <= p.curvature_hi() * (1 + slack) &&
           out.deriv3_ratio <= p.deriv_bound(3) * (1 + slack) &&
           out.deriv4_ratio <= p.deriv_bound(4) * (1 + slack) && out.ratio_min > 0;
  return out;
}

ModelSurface ModelSurface::power(double m1, double m2) {
  return ModelSurface(Profile::make(m1), Profile::make(m2));
}

double ModelSurface::height() const {
  return m(0) * m(1) / (m(0) + m(1));
}

double ModelSurface::partial(int a1, int a2, double x1, double x2) const {
  if (a1 > 0 && a2 > 0) return 0.0;
  if (a1 == 0 && a2 == 0) return phi(x1, x2);
  return a1 > 0 ? p_[0].deriv(a1, x1) : p_[1].deriv(a2, x2);
}

Patch make_patch(const ModelSurface& s, std::array<double, 2> r, std::array<double, 2> d) {
  Patch p;
  p.r = r;
  p.d = d;
  for (int i = 0; i < 2; ++i) {
    if (!(d[i] > 0) || r[i] < 0) throw InvalidArgument("patch needs r >= 0 and d > 0");
    p.kappa[i] = std::pow(std::max(r[i], d[i]), s.m(i) - 2.0);
  }
  return p;
}

std::array<std::array<double, 2>, 2> curvature_ratio(const ModelSurface& s, const Patch& p,
                                                     std::size_t n) {
  std::array<std::array<double, 2>, 2> out{};
  for (int i = 0; i < 2; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = p.r[i] + p.d[i] * static_cast<double>(k) / static_cast<double>(n);
      if (t <= 0) continue;
      const double v = s.profile(i).d2(t) / (s.profile(i).curvature_scale() * p.kappa[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out[i] = {lo, hi};
  }
  return out;
}

double q_ratio(double a, double b) { return std::max(a, b) / std::min(a, b); }

double distance_1d(double lo1, double hi1, double lo2, double hi2) {
  return std::max(0.0, std::max(lo1, lo2) - std::min(hi1, hi2));
}

PatchPair pair_quantities(const Patch& S, const Patch& St, const PairOptions& opt) {
  PatchPair pp;
  pp.S = S;
  pp.St = St;
  pp.p = opt.p;
  pp.admissible = S.admissible() && St.admissible();
  for (int i = 0; i < 2; ++i) {
    pp.dbar[i] = std::max(S.d[i], St.d[i]);
    pp.kbar[i] = std::max(S.kappa[i], St.kappa[i]);
    pp.dr[i] = S.r[i] - St.r[i];
    pp.dist[i] = distance_1d(S.lo(i), S.hi(i), St.lo(i), St.hi(i));

    const double by_size = pp.dist[i] / pp.dbar[i];
    const double by_shift = pp.dr[i] != 0 ? pp.dist[i] / std::abs(pp.dr[i]) : 0.0;
    if (!opt.band.contains(by_size) || !opt.band.contains(by_shift)) {
      std::ostringstream os;
      os << "axis " << i + 1 << ": dist/dbar=" << by_size << ", dist/|dr|=" << by_shift
         << " outside [" << opt.band.lo << ", " << opt.band.hi << "]";
      throw SeparationViolation(os.str());
    }
    const double lhs = std::max(S.kappa[i] * S.d[i], St.kappa[i] * St.d[i]);
    const double rhs = pp.kbar[i] * pp.dbar[i];
    if (std::abs(lhs - rhs) > opt.dominance_rtol * rhs) {
      std::ostringstream os;
      os << "axis " << i + 1 << ": max(kappa d)=" << lhs << " but kbar*dbar=" << rhs;
      throw DominanceViolation(os.str());
    }
  }
  pp.kappa_bar = std::max(pp.kbar[0], pp.kbar[1]);
  pp.D = std::min({S.d[0], S.d[1], St.d[0], St.d[1]});
  pp.a1 = pp.kbar[1] * pp.dbar[1];
  pp.a2 = pp.kbar[0] * pp.dbar[0];

  pp.Q = q_ratio(pp.kbar[0] * pp.dbar[0] * pp.dbar[0], pp.kbar[1] * pp.dbar[1] * pp.dbar[1]);
  for (int i = 0; i < 2; ++i) pp.Q *= q_ratio(S.d[i], St.d[i]) * q_ratio(S.kappa[i], St.kappa[i]);

  const double k1 = std::max(S.kappa[0], S.kappa[1]);
  const double k2 = std::max(St.kappa[0], St.kappa[1]);
  const double D = pp.D;
  pp.C0 = (pp.dbar[0] * pp.dbar[0] * pp.dbar[1] * pp.dbar[1]) / std::pow(D, 4) *
          std::pow(D * std::min(k1, k2), -1.0 / opt.p) * std::pow(D * k1 * D * k2, -0.5);
  return pp;
}

namespace {
struct AxisPair {
  int k, kt;
};

std::vector<AxisPair> axis_pairs(int j, int C) {
  std::vector<AxisPair> out;
  const int n = 1 << j;
  for (int k = 1; k <= n; ++k)
    for (int kt = 1; kt <= n; ++kt) {
      const int g = std::abs(k - kt);
      if (g >= 2 && g <= C) out.push_back({k, kt});
    }
  return out;
}
}  // namespace

void for_each_whitney_pair(const ModelSurface& s, int depth, int C, const PairOptions& opt,
                           const std::function<void(const WhitneyPair&)>& visit) {
  if (depth < 0 || depth > 12) throw InvalidArgument("whitney depth must lie in [0, 12]");
  if (C < 2) throw InvalidArgument("Whitney constant C must be >= 2");
  for (int j1 = 0; j1 <= depth + 1; ++j1) {
    const auto ax1 = axis_pairs(j1, C);
    if (ax1.empty()) continue;
    const double rho1 = std::ldexp(1.0, -j1);
    for (int j2 = 0; j2 <= depth + 1; ++j2) {
      const auto ax2 = axis_pairs(j2, C);
      const double rho2 = std::ldexp(1.0, -j2);
      for (const auto& a : ax1)
        for (const auto& b : ax2) {
          WhitneyPair w;
          w.j1 = j1;
          w.j2 = j2;
          w.k1 = a.k;
          w.kt1 = a.kt;
          w.k2 = b.k;
          w.kt2 = b.kt;
          const Patch S = make_patch(s, {(a.k - 1) * rho1, (b.k - 1) * rho2}, {rho1, rho2});
          const Patch St = make_patch(s, {(a.kt - 1) * rho1, (b.kt - 1) * rho2}, {rho1, rho2});
          w.pair = pair_quantities(S, St, opt);
          visit(w);
        }
    }
  }
}

std::vector<WhitneyPair> whitney_pairs(const ModelSurface& s, int depth, int C,
                                       const PairOptions& opt) {
  if (whitney_count(depth, C) > 5'000'000)
    throw InvalidArgument("whitney_pairs: listing too large, use for_each_whitney_pair");
  std::vector<WhitneyPair> out;
  for_each_whitney_pair(s, depth, C, opt, [&](const WhitneyPair& w) { out.push_back(w); });
  return out;
}

std::size_t whitney_count(int depth, int C) {
  std::size_t per_axis = 0;
  for (int j = 0; j <= depth + 1; ++j) {
    const long n = 1L << j;
    for (int g = 2; g <= C; ++g)
      if (g < n) per_axis += static_cast<std::size_t>(2 * (n - g));
  }
  return per_axis * per_axis;
}

Subdivision axis_subdivide(long r, int j, int k_max) {
  if (r < 0 || j < 0) throw InvalidArgument("axis_subdivide: r, j must be non-negative");
  if (k_max < 1) throw InvalidArgument("axis_subdivide: k_max must be >= 1");
  Subdivision out;
  const double unit = std::ldexp(1.0, -j);
  if (r > 0) {
    out.pieces.push_back({r * unit, (r + 1) * unit, 0});
    return out;
  }
  for (int k = 1; k <= k_max; ++k)
    out.pieces.push_back({std::ldexp(unit, -k), std::ldexp(unit, 1 - k), k});
  out.residual = std::ldexp(unit, -k_max);
  return out;
}

Subdivision axis_subdivide(double lo, double hi, int k_max) {
  const double len = hi - lo;
  if (!(len > 0)) throw InvalidArgument("axis_subdivide: empty interval");
  const int j = -static_cast<int>(std::lround(std::log2(len)));
  if (j < 0 || std::ldexp(1.0, -j) != len) throw InvalidArgument("axis_subdivide: length is not 2^-j");
  const double rr = std::ldexp(lo, j);
  if (rr != std::floor(rr)) throw InvalidArgument("axis_subdivide: left end is not r 2^-j");
  return axis_subdivide(static_cast<long>(rr), j, k_max);
}

std::vector<SubPair> subdivide_pair(const ModelSurface& s, const PatchPair& pair, int k_max,
                                    const PairOptions& opt) {
  auto split = [&](const Patch& P, int i) {
    const int j = -static_cast<int>(std::lround(std::log2(P.d[i])));
    return axis_subdivide(static_cast<long>(std::llround(std::ldexp(P.r[i], j))), j, k_max);
  };
  std::array<Subdivision, 2> a{split(pair.S, 0), split(pair.S, 1)};
  std::array<Subdivision, 2> b{split(pair.St, 0), split(pair.St, 1)};
  std::vector<SubPair> out;
  for (const auto& u1 : a[0].pieces)
    for (const auto& u2 : a[1].pieces)
      for (const auto& v1 : b[0].pieces)
        for (const auto& v2 : b[1].pieces) {
          SubPair sp;
          sp.k = {u1.k, u2.k};
          sp.kt = {v1.k, v2.k};
          const Patch S = make_patch(s, {u1.lo, u2.lo}, {u1.hi - u1.lo, u2.hi - u2.lo});
          const Patch St = make_patch(s, {v1.lo, v2.lo}, {v1.hi - v1.lo, v2.hi - v2.lo});
          PairOptions o = opt;
          // Sub-pieces of an axis rectangle are far smaller than their distance
          // to the partner, so the separation band is not meaningful for them.
          o.band.lo = 0.0;
          o.band.hi = std::numeric_limits<double>::infinity();
          sp.pair = pair_quantities(S, St, o);
          out.push_back(sp);
        }
  return out;
}

}  // namespace restrlab

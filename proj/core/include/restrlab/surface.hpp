#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "restrlab/numerics.hpp"

namespace restrlab {

enum class ProfileKind { Power, Perturbed };

// One-variable profile psi(t) = t^m (1 + c t), exact derivatives of any order.
class Profile {
 public:
  static Profile make(double m, ProfileKind kind = ProfileKind::Power, double c = 0.0);

  double m() const { return m_; }
  double c() const { return c_; }
  ProfileKind kind() const { return kind_; }

  double value(double t) const { return deriv(0, t); }
  double d1(double t) const { return deriv(1, t); }
  double d2(double t) const { return deriv(2, t); }
  double deriv(int k, double t) const;

  // Bounds of psi''(t) / t^(m-2) over (0, 1].
  double curvature_lo() const;
  double curvature_hi() const;
  // |psi^(k)(t)| <= deriv_bound(k) * t^(m-k) on (0, 1].
  double deriv_bound(int k) const;
  // Leading curvature coefficient m(m-1).
  double curvature_scale() const { return m_ * (m_ - 1.0); }

 private:
  Profile(double m, ProfileKind kind, double c) : m_(m), c_(c), kind_(kind) {}
  double m_;
  double c_;
  ProfileKind kind_;
};

// Falling factorial x (x-1) ... (x-k+1).
double falling_factorial(double x, int k);

struct ProfileCheck {
  double ratio_min = 0, ratio_max = 0;    // psi''/t^(m-2)
  double deriv3_ratio = 0, deriv4_ratio = 0;  // max |psi^(k)|/t^(m-k)
  bool ok = false;
};
// Dense check of the normalized-type invariants on n points of (0, 1].
ProfileCheck check_profile(const Profile& p, std::size_t n = 1000);

class ModelSurface {
 public:
  ModelSurface(Profile p1, Profile p2) : p_{p1, p2} {}
  static ModelSurface power(double m1, double m2);

  const Profile& profile(int i) const { return p_[i]; }
  double m(int i) const { return p_[i].m(); }
  double height() const;

  double phi(double x1, double x2) const { return p_[0].value(x1) + p_[1].value(x2); }
  std::array<double, 2> grad(double x1, double x2) const {
    return {p_[0].d1(x1), p_[1].d1(x2)};
  }
  // Row-major 2x2; the off-diagonal entries are exactly zero.
  std::array<double, 4> hessian(double x1, double x2) const {
    return {p_[0].d2(x1), 0.0, 0.0, p_[1].d2(x2)};
  }
  // d^alpha phi for alpha = (a1, a2).
  double partial(int a1, int a2, double x1, double x2) const;

 private:
  std::array<Profile, 2> p_;
};

struct Patch {
  std::array<double, 2> r{};
  std::array<double, 2> d{};
  std::array<double, 2> kappa{};

  // r_i >= d_i for both i (curvature comparable to kappa on the whole patch).
  bool admissible() const { return r[0] >= d[0] && r[1] >= d[1]; }
  double lo(int i) const { return r[i]; }
  double hi(int i) const { return r[i] + d[i]; }
};

// kappa_i = max(r_i, d_i)^(m_i - 2); equals r_i^(m_i-2) on admissible patches.
Patch make_patch(const ModelSurface& s, std::array<double, 2> r, std::array<double, 2> d);

// Sampled psi_i'' over the patch divided by kappa_i: {min, max} per axis.
std::array<std::array<double, 2>, 2> curvature_ratio(const ModelSurface& s, const Patch& p,
                                                     std::size_t n = 64);

double q_ratio(double a, double b);

struct PatchPair {
  Patch S, St;
  std::array<double, 2> dbar{}, kbar{}, dr{}, dist{};
  double kappa_bar = 0;  // kbar_1 v kbar_2
  double D = 0;
  double a1 = 0, a2 = 0;
  double Q = 0;
  double C0 = 0;
  double p = 2.0;  // exponent used for C0
  bool admissible = false;
};

struct PairOptions {
  double p = 2.0;
  Band band{};
  double dominance_rtol = 1e-12;
};

// Derived quantities with separation and dominance checked, not assumed.
PatchPair pair_quantities(const Patch& S, const Patch& St, const PairOptions& opt = {});

double distance_1d(double lo1, double hi1, double lo2, double hi2);

struct WhitneyPair {
  int j1 = 0, j2 = 0;
  int k1 = 0, k2 = 0, kt1 = 0, kt2 = 0;
  PatchPair pair;
};

// Ordered pairs of congruent bi-dyadic rectangles with 2 <= |k_i - kt_i| <= C.
// Scales run over 2^-j with j_i <= depth + 1; the two coarsest scales cannot
// host separated neighbours, so depth 0 yields nothing.
std::vector<WhitneyPair> whitney_pairs(const ModelSurface& s, int depth, int C = 4,
                                       const PairOptions& opt = {});
void for_each_whitney_pair(const ModelSurface& s, int depth, int C, const PairOptions& opt,
                           const std::function<void(const WhitneyPair&)>& visit);
// Count only, no pair construction.
std::size_t whitney_count(int depth, int C = 4);

struct Interval {
  double lo = 0, hi = 0;
  int k = 0;  // tower index (0 when the interval was kept whole)
};

struct Subdivision {
  std::vector<Interval> pieces;
  double residual = 0;  // length left uncovered next to the axis
};

// Dyadic tower next to the axis for I = [r 2^-j, (r+1) 2^-j].
Subdivision axis_subdivide(long r, int j, int k_max = 20);
// Same, from explicit endpoints; rejects non-dyadic input.
Subdivision axis_subdivide(double lo, double hi, int k_max = 20);

struct SubPair {
  std::array<int, 2> k{}, kt{};
  PatchPair pair;
};
// All sub-patch pairs after subdividing axis-touching rectangles of a pair.
std::vector<SubPair> subdivide_pair(const ModelSurface& s, const PatchPair& pair, int k_max,
                                    const PairOptions& opt = {});

}  // namespace restrlab

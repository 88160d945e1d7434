#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "restrlab/errors.hpp"
#include "restrlab/scaling.hpp"

using namespace restrlab;

namespace {

PatchPair sample_pair(const ModelSurface& s) {
  return pair_quantities(make_patch(s, {0.25, 0.375}, {0.125, 0.0625}),
                         make_patch(s, {0.5, 0.5}, {0.125, 0.0625}));
}

// Axis data of a pair with fixed smooth weights, optionally pulled back by xi = a eta
// and divided by the phase normalization a1 a2.
std::array<AxisData, 2> axes_for(const ModelSurface& s, const PatchPair& pp, std::array<double, 2> scale, double a) {
  std::array<AxisData, 2> ax;
  for (int i = 0; i < 2; ++i) {
    const double ai = scale[i];
    const Profile prof = s.profile(i);
    ax[i].psi = [prof, ai, a](double e) { return prof.value(ai * e) / a; };
    ax[i].lo = {pp.S.lo(i) / ai, pp.St.lo(i) / ai};
    ax[i].hi = {pp.S.hi(i) / ai, pp.St.hi(i) / ai};
    ax[i].w[0] = [ai, i](double e) { return cplx(1 + ai * e, 0.3 * i); };
    ax[i].w[1] = [ai](double e) { return cplx(std::cos(5 * ai * e), 1.0); };
  }
  return ax;
}

}  // namespace

TEST(Rescale, SymmetricPairUsesDefiningProducts) {
  const auto s = ModelSurface::power(3, 4);
  const auto pp = sample_pair(s);
  const auto map = rescale_pair(s, pp);
  EXPECT_DOUBLE_EQ(map.a1, pp.kbar[1] * pp.dbar[1]);
  EXPECT_DOUBLE_EQ(map.a2, pp.kbar[0] * pp.dbar[0]);
}

TEST(Rescale, NormalizationIdentityOnRandomPairs) {
  std::mt19937_64 rng(8);
  for (double m : {2.0, 3.0, 5.0}) {
    const auto s = ModelSurface::power(m, 2 + m / 2);
    for (int i = 0; i < 400; ++i) {
      const auto map = rescale_pair(s, random_admissible_pair(s, rng));
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(map.rescaled.kbar[k] * map.rescaled.dbar[k], 1.0, 1e-12);
    }
  }
}

TEST(Rescale, UnitPairIsIdentity) {
  const auto s = ModelSurface::power(2, 2);
  const auto pp = pair_quantities(make_patch(s, {1, 1}, {1, 1}), make_patch(s, {3, 3}, {1, 1}));
  const auto map = rescale_pair(s, pp);
  EXPECT_DOUBLE_EQ(map.a1, 1.0);
  EXPECT_DOUBLE_EQ(map.a2, 1.0);
  EXPECT_DOUBLE_EQ(map.phi(0.3, 0.7), s.phi(0.3, 0.7));
}

TEST(Rescale, RejectsAxisTouchingPair) {
  const auto s = ModelSurface::power(2, 2);
  const auto pp = pair_quantities(make_patch(s, {0, 0}, {0.25, 0.25}), make_patch(s, {0.5, 0.5}, {0.25, 0.25}));
  EXPECT_THROW(rescale_pair(s, pp), InvalidArgument);
}

TEST(VerifyRescaled, WhitneyPairsOfParaboloid) {
  const auto s = ModelSurface::power(2, 2);
  int checked = 0;
  // C = 3: with gaps of 4 cells the gradients are up to 5 units apart, outside [1/4, 4].
  for_each_whitney_pair(s, 2, 3, {}, [&](const WhitneyPair& w) {
    if (!w.pair.admissible || checked >= 60) return;
    ++checked;
    const Report r = verify_rescaled(rescale_pair(s, w.pair));
    EXPECT_TRUE(r.pass) << w.j1 << "," << w.j2 << " " << w.k1 << "," << w.k2;
  });
  EXPECT_GT(checked, 0);
}

TEST(VerifyRescaled, SecondDerivativeConstantIndependentOfDepth) {
  const auto s = ModelSurface::power(4, 2);
  std::vector<double> worst;
  for (int depth = 1; depth <= 3; ++depth) {
    double w = 0;
    for_each_whitney_pair(s, depth, 4, {}, [&](const WhitneyPair& wp) {
      if (!wp.pair.admissible) return;
      const auto map = rescale_pair(s, wp.pair);
      const auto& P = map.rescaled.S;
      const double kappa_s = map.rescaled.kappa_bar;
      for (double f : {0.0, 0.5, 1.0}) w = std::max(w, std::abs(map.axis_deriv(0, 2, P.lo(0) + f * P.d[0])) / kappa_s);
    });
    worst.push_back(w);
  }
  for (double w : worst) EXPECT_LE(w, 4 * 12.0);  // m(m-1) = 12 is the profile constant
}

TEST(Bounds, EqualScalesCollapse) {
  const double p = 1.8, q = 18.0 / 7.0, eps = 0.01;
  const std::array<double, 2> rho{0.125, 0.25}, kappa{4.0, 1.0};  // kappa rho^2 = 1/16 on both axes
  const double qp = q / (q - 1);
  const double expected = std::pow(rho[0] * rho[1], 2 / qp - 1 / p) * std::pow(1.0 / 16, -1 / p);
  EXPECT_NEAR(dyadic_bound(rho, kappa, p, q, eps) / expected, 1.0, 1e-12);
}

TEST(Bounds, DoublingRhoExponent) {
  const double p = 1.9, q = 2.5, eps = 0.02;
  const std::array<double, 2> rho{0.25, 0.125}, kappa{1.0, 1.0};
  const double b1 = dyadic_bound(rho, kappa, p, q, eps);
  const double b2 = dyadic_bound({2 * rho[0], rho[1]}, kappa, p, q, eps);
  const double qp = q / (q - 1);
  EXPECT_NEAR(std::log2(b2 / b1), (2 / qp - 1 / p) + 2 * (1 / p - 1 + eps), 1e-12);
}

TEST(Bounds, UnitQuotientsGiveUnitLogFactor) {
  const auto s = ModelSurface::power(2, 2);
  const auto pp = pair_quantities(make_patch(s, {0.25, 0.25}, {0.25, 0.25}), make_patch(s, {0.75, 0.75}, {0.25, 0.25}));
  const auto b = bound_constants(pp, 1.8, 2.5);
  EXPECT_DOUBLE_EQ(b.Q, 1.0);
  EXPECT_DOUBLE_EQ(b.log_factor, 1.0);
}

TEST(Bounds, MonotoneInQ) {
  const auto s = ModelSurface::power(3, 2);
  PatchPair pp = sample_pair(s);
  const double base = bound_constants(pp, 1.8, 2.5).local;
  for (double factor : {2.0, 10.0, 1e3}) {
    PatchPair big = pp;
    big.Q = pp.Q * factor;
    EXPECT_GE(bound_constants(big, 1.8, 2.5).local, base);
  }
}

TEST(Bounds, RejectsRange) {
  const auto s = ModelSurface::power(2, 2);
  const auto pp = sample_pair(s);
  EXPECT_THROW(bound_constants(pp, 1.5, 2.5), InvalidArgument);
  EXPECT_THROW(bound_constants(pp, 1.8, 1.5), InvalidArgument);
  EXPECT_THROW(bound_constants(pp, 1.8, 2.5, 0.5), InvalidArgument);
}

TEST(Cuboid, CentreBoundaryAndExclusion) {
  const auto s = ModelSurface::power(4, 2);
  const auto pp = sample_pair(s);
  const auto c = cuboid_Q1(s, pp, 3);
  EXPECT_TRUE(c.contains({0, 0, 0}));
  EXPECT_FALSE(c.contains({-c.g[0] * 2 * c.half[2], -c.g[1] * 2 * c.half[2], 2 * c.half[2]}));
  EXPECT_TRUE(cuboid_containment_check(s, pp, 3).pass);
  // membership is the axis-aligned test after the shear
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 200; ++i) {
    const Point3 x{U(rng) * c.half[0], U(rng) * c.half[1], U(rng) * c.half[2]};
    const double y1 = x.x1 + c.g[0] * x.x3, y2 = x.x2 + c.g[1] * x.x3;
    EXPECT_EQ(c.contains(x), std::abs(y1) <= c.half[0] && std::abs(y2) <= c.half[1] && std::abs(x.x3) <= c.half[2]);
  }
}

TEST(Bilinear, ScalingCovariance) {
  // With xi = A eta: E f(x) = a E_s f_s(A x', a x3), so the L^p norm over the box
  // equals a^(2 - 2/p) times the norm over the image box.
  const auto s = ModelSurface::power(3, 2);
  const auto pp = sample_pair(s);
  const auto map = rescale_pair(s, pp);
  const double a1 = map.a1, a2 = map.a2, a = a1 * a2, p = 1.8;
  ShearedBox box{{0.4, -0.7}, {30, 50}, 200};
  ShearedBox sbox{{box.g[0] / a2, box.g[1] / a1}, {a1 * box.X[0], a2 * box.X[1]}, a * box.X3};
  const BilinearGrid grid{32, 48, 16};
  const double direct = bilinear_norm(axes_for(s, pp, {1, 1}, 1), box, p, grid);
  const double scaled = bilinear_norm(axes_for(s, pp, {a1, a2}, a), sbox, p, grid);
  EXPECT_NEAR(direct / (std::pow(a, 2 - 2 / p) * scaled), 1.0, 1e-8);
}

TEST(Bilinear, GridRefinement) {
  const auto s = ModelSurface::power(2, 2);
  const auto w = whitney_pairs(s, 1).front();
  const auto c = cuboid_Q1(s, w.pair, 2);
  const ShearedBox box{c.g, {c.half[0], c.half[1]}, c.half[2]};
  const auto ax = axes_for(s, w.pair, {1, 1}, 1);
  const double coarse = bilinear_norm(ax, box, 2.0, {32, 64, 16});
  const double fine = bilinear_norm(ax, box, 2.0, {64, 128, 16});
  EXPECT_LE(std::abs(coarse - fine) / fine, 0.10);
}

TEST(Bilinear, ZeroDensitiesGiveZeroRatio) {
  BilinearConfig cfg;
  cfg.zero = true;
  cfg.trials = 1;
  const Report r = bilinear_empirical(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.summary["max_ratio"].get<double>(), 0.0);
}

TEST(Reparam, SameHyperplaneIsIdentity) {
  ReparamConfig cfg;
  cfg.patch = make_patch(cfg.surface, {0.1, 0.1}, {0.2, 0.2});
  const auto res = reparametrize_graph(cfg);
  for (double xp : {0.15, 0.2})
    for (double u : {0.12, 0.25}) {
      const double e1 = xp * res.E[0] + u * res.h1[0], e2 = xp * res.E[1] + u * res.h1[1];
      EXPECT_NEAR(res.phi2(xp, u), cfg.surface.phi(e1, e2), 1e-12);
    }
}

TEST(Reparam, TiltedParaboloid) {
  ReparamConfig cfg;
  cfg.patch = make_patch(cfg.surface, {0.1, 0.1}, {0.2, 0.2});
  cfg.n2 = {1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0)};
  const auto res = reparametrize_graph(cfg);
  EXPECT_TRUE(res.report.pass);
  EXPECT_GE(res.norm_ratio, 0.25);
  EXPECT_LE(res.norm_ratio, 4.0);
}

TEST(Reparam, NearTangentRejected) {
  ReparamConfig cfg;
  cfg.patch = make_patch(cfg.surface, {0.1, 0.1}, {0.2, 0.2});
  const auto g = cfg.surface.grad(0.2, 0.2);
  // orthogonal to the normal (-g1, -g2, 1) at the patch centre
  cfg.n2 = {1 / std::sqrt(1 + g[0] * g[0]), 0, g[0] / std::sqrt(1 + g[0] * g[0])};
  EXPECT_THROW(reparametrize_graph(cfg), TransversalityFailure);
}

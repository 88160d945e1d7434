#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "restrlab/errors.hpp"
#include "restrlab/surface.hpp"

using namespace restrlab;

TEST(Profile, PurePowers) {
  const auto p2 = Profile::make(2);
  for (double t : {0.01, 0.3, 1.0}) {
    EXPECT_DOUBLE_EQ(p2.value(t), t * t);
    EXPECT_DOUBLE_EQ(p2.d2(t), 2.0);
  }
  const auto p4 = Profile::make(4);
  for (double t : {0.01, 0.3, 1.0}) EXPECT_NEAR(p4.d2(t) / (t * t), 12.0, 1e-12);
}

TEST(Profile, PerturbedBoundsFromDenseSampling) {
  const auto p = Profile::make(3, ProfileKind::Perturbed, 0.05);
  const auto chk = check_profile(p, 1000);
  EXPECT_TRUE(chk.ok);
  EXPECT_LE(chk.ratio_max, 1.5 * chk.ratio_min);
  // independent sampling of psi''/t on a finer grid
  double lo = INFINITY, hi = 0;
  for (int i = 1; i <= 20000; ++i) {
    const double t = i / 20000.0;
    const double r = p.d2(t) / t;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GE(lo, chk.ratio_min * (1 - 1e-3));
  EXPECT_LE(hi, chk.ratio_max * (1 + 1e-3));
}

TEST(Profile, ExactDerivativesAgreeWithDifferences) {
  const auto p = Profile::make(3.5, ProfileKind::Perturbed, -0.08);
  const double t = 0.4, h = 1e-5;
  EXPECT_NEAR(p.d1(t), (p.value(t + h) - p.value(t - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(p.d2(t), (p.d1(t + h) - p.d1(t - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(p.deriv(3, t), (p.d2(t + h) - p.d2(t - h)) / (2 * h), 1e-6);
}

TEST(Profile, RejectsBadParameters) {
  EXPECT_THROW(Profile::make(1.9), InvalidArgument);
  EXPECT_THROW(Profile::make(3, ProfileKind::Perturbed, 0.2), InvalidArgument);
}

TEST(ModelSurface, HessianIsDiagonal) {
  const auto s = ModelSurface::power(3, 5);
  for (double x : {0.1, 0.5, 0.9})
    for (double y : {0.2, 0.7}) {
      const auto H = s.hessian(x, y);
      EXPECT_EQ(H[1], 0.0);
      EXPECT_EQ(H[2], 0.0);
      EXPECT_EQ(s.partial(1, 1, x, y), 0.0);
    }
}

TEST(PatchPair, QMatchesDefinition) {
  const auto s = ModelSurface::power(3, 2);
  const Patch S = make_patch(s, {0.25, 0.25}, {0.125, 0.125});
  const Patch St = make_patch(s, {0.25, 0.5}, {0.125, 0.125});
  // same axis-1 interval is not separated, so shift along both axes
  const Patch Su = make_patch(s, {0.5, 0.5}, {0.125, 0.125});
  EXPECT_THROW(pair_quantities(S, St), SeparationViolation);
  const auto pp = pair_quantities(S, Su);
  const double expected =
      q_ratio(pp.kbar[0] * pp.dbar[0] * pp.dbar[0], pp.kbar[1] * pp.dbar[1] * pp.dbar[1]) *
      q_ratio(S.kappa[0], Su.kappa[0]) * q_ratio(S.kappa[1], Su.kappa[1]);
  EXPECT_DOUBLE_EQ(pp.Q, expected);
  EXPECT_GE(pp.Q, 1.0);
}

TEST(PatchPair, ParaboloidExample) {
  const auto s = ModelSurface::power(2, 2);
  const auto pp = pair_quantities(make_patch(s, {0.25, 0.25}, {0.25, 0.25}),
                                  make_patch(s, {0.75, 0.75}, {0.25, 0.25}));
  EXPECT_DOUBLE_EQ(pp.kbar[0], 1.0);
  EXPECT_DOUBLE_EQ(pp.kbar[1], 1.0);
  EXPECT_DOUBLE_EQ(pp.a1, 0.25);
  EXPECT_DOUBLE_EQ(pp.a2, 0.25);
  EXPECT_DOUBLE_EQ(pp.Q, 1.0);
}

TEST(PatchPair, QIsSwapInvariant) {
  const auto s = ModelSurface::power(4, 3);
  const Patch A = make_patch(s, {0.25, 0.5}, {0.125, 0.25});
  const Patch B = make_patch(s, {0.5, 0.125}, {0.0625, 0.125});
  PairOptions o;
  o.band = {0.0, 1e9};
  o.dominance_rtol = 1e9;
  EXPECT_DOUBLE_EQ(pair_quantities(A, B, o).Q, pair_quantities(B, A, o).Q);
}

TEST(PatchPair, NonSeparatedPatchesRejected) {
  const auto s = ModelSurface::power(2, 2);
  const Patch A = make_patch(s, {0.25, 0.25}, {0.25, 0.25});
  const Patch B = make_patch(s, {0.51, 0.51}, {0.25, 0.25});
  EXPECT_THROW(pair_quantities(A, B), SeparationViolation);
}

TEST(PatchPair, QRatio) {
  EXPECT_DOUBLE_EQ(q_ratio(3, 3), 1.0);
  EXPECT_DOUBLE_EQ(q_ratio(2, 8), 4.0);
  EXPECT_DOUBLE_EQ(q_ratio(8, 2), 4.0);
}

TEST(Whitney, DepthZeroIsEmpty) {
  EXPECT_TRUE(whitney_pairs(ModelSurface::power(2, 2), 0).empty());
  EXPECT_EQ(whitney_count(0), 0u);
}

TEST(Whitney, DepthOneIndexGaps) {
  const auto pairs = whitney_pairs(ModelSurface::power(2, 2), 1, 4);
  ASSERT_FALSE(pairs.empty());
  for (const auto& w : pairs) {
    const int g1 = std::abs(w.k1 - w.kt1), g2 = std::abs(w.k2 - w.kt2);
    EXPECT_GE(g1, 2);
    EXPECT_LE(g1, 4);
    EXPECT_GE(g2, 2);
    EXPECT_LE(g2, 4);
  }
}

TEST(Whitney, DepthThreeMatchesBruteForce) {
  const int depth = 3, C = 4;
  std::size_t brute = 0;
  for (int j1 = 0; j1 <= depth + 1; ++j1)
    for (int j2 = 0; j2 <= depth + 1; ++j2) {
      const int n1 = 1 << j1, n2 = 1 << j2;
      for (int k1 = 1; k1 <= n1; ++k1)
        for (int kt1 = 1; kt1 <= n1; ++kt1)
          for (int k2 = 1; k2 <= n2; ++k2)
            for (int kt2 = 1; kt2 <= n2; ++kt2) {
              const int g1 = std::abs(k1 - kt1), g2 = std::abs(k2 - kt2);
              if (g1 >= 2 && g1 <= C && g2 >= 2 && g2 <= C) ++brute;
            }
    }
  EXPECT_EQ(whitney_count(depth, C), brute);
  EXPECT_EQ(whitney_pairs(ModelSurface::power(2, 2), depth, C).size(), brute);
}

TEST(AxisSubdivide, InteriorIntervalUnchanged) {
  const auto sub = axis_subdivide(1, 2);
  ASSERT_EQ(sub.pieces.size(), 1u);
  EXPECT_DOUBLE_EQ(sub.pieces[0].lo, 0.25);
  EXPECT_DOUBLE_EQ(sub.pieces[0].hi, 0.5);
  EXPECT_EQ(sub.residual, 0.0);
}

TEST(AxisSubdivide, TowerAtAxis) {
  const auto sub = axis_subdivide(0, 0, 3);
  ASSERT_EQ(sub.pieces.size(), 3u);
  const double lo[] = {0.5, 0.25, 0.125}, hi[] = {1.0, 0.5, 0.25};
  for (int k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(sub.pieces[k].lo, lo[k]);
    EXPECT_DOUBLE_EQ(sub.pieces[k].hi, hi[k]);
  }
  EXPECT_DOUBLE_EQ(sub.residual, 0.125);
}

TEST(AxisSubdivide, RejectsNonDyadic) {
  EXPECT_THROW(axis_subdivide(0.1, 0.4), InvalidArgument);
  EXPECT_THROW(axis_subdivide(0.3, 0.55), InvalidArgument);
  EXPECT_NO_THROW(axis_subdivide(0.25, 0.5));
}

TEST(AxisSubdivide, CurvatureScalesAlongTower) {
  const auto s = ModelSurface::power(4, 4);
  const double kappa = make_patch(s, {0, 0}, {1, 1}).kappa[0];
  for (const auto& piece : axis_subdivide(0, 0, 8).pieces) {
    const Patch P = make_patch(s, {piece.lo, 0.5}, {piece.hi - piece.lo, 0.5});
    EXPECT_DOUBLE_EQ(P.kappa[0], std::ldexp(kappa, -2 * piece.k));
  }
}

TEST(AxisSubdivide, SubPairsKeepOneWholeSide) {
  const auto s = ModelSurface::power(4, 3);
  for (const auto& w : whitney_pairs(s, 2)) {
    for (const auto& sp : subdivide_pair(s, w.pair, 6)) {
      for (int i = 0; i < 2; ++i) {
        EXPECT_TRUE(sp.k[i] == 0 || sp.kt[i] == 0);
        EXPECT_DOUBLE_EQ(sp.pair.dbar[i], w.pair.dbar[i]);
        EXPECT_DOUBLE_EQ(sp.pair.kbar[i], w.pair.kbar[i]);
      }
    }
  }
}

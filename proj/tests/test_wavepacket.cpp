#include <gtest/gtest.h>

#include <cmath>

#include "restrlab/errors.hpp"
#include "restrlab/wavepacket.hpp"

using namespace restrlab;

namespace {

PacketParams params_1d(double R) {
  PacketParams p;
  p.d = 1;
  p.R = R;
  p.m = 2;
  return p;
}

// Smooth bump of radius rho around c (first coordinate only).
FreqFunction bump(double c, double rho) {
  return [=](double x, double) -> cplx {
    const double u = (x - c) / rho;
    return std::abs(u) < 1 ? cplx(std::exp(-1.0 / (1 - u * u))) : cplx(0);
  };
}

std::vector<double> column_mass(const PacketDecomposition& dec) {
  const std::size_t K = dec.lattice_size();
  std::vector<double> mass(dec.V.size(), 0.0);
  for (std::size_t w = 0; w < dec.size(); ++w) mass[w / K] += std::norm(dec.coeff[w]);
  return mass;
}

}  // namespace

TEST(Geometry, DerivedQuantities) {
  const auto g = packet_geometry(params_1d(16));
  EXPECT_GT(g.kappa, 0);
  EXPECT_LE(g.D * g.kappa, 1.0 + 1e-12);
  EXPECT_DOUBLE_EQ(g.Rp, g.R / g.D);
  EXPECT_DOUBLE_EQ(g.L, g.Rp * g.Rp / g.kappa);
  EXPECT_GE(g.L, g.Rp);
}

TEST(Tube, MembershipMatchesDefinition) {
  Tube T;
  T.d = 1;
  T.y = {3, 0};
  T.v = {0.5, 0};
  T.grad = {1.0, 0};
  T.Rp = 2;
  T.L = 10;
  EXPECT_TRUE(T.contains({3, 0}, 0));
  EXPECT_TRUE(T.contains({3 - 5 + 2, 0}, 5));   // offset exactly R'
  EXPECT_FALSE(T.contains({3 - 5 + 2.01, 0}, 5));
  EXPECT_FALSE(T.contains({3 - 11, 0}, 11));    // beyond the tube length
}

TEST(Decompose, ZeroFunction) {
  const auto dec = decompose([](double, double) { return cplx(0); }, params_1d(16));
  for (const auto& c : dec.coeff) EXPECT_EQ(std::abs(c), 0.0);
  for (const auto& field : dec.reconstruct({0.0, dec.geo.L}))
    for (const auto& v : field) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Decompose, BumpConcentratesOnOneColumn) {
  const auto probe = decompose(bump(0.5, 0.01), params_1d(16));
  const double cell = 1.0 / probe.geo.Rp;
  std::size_t target = 0;
  for (std::size_t i = 0; i < probe.V.size(); ++i)
    if (std::abs(probe.V[i][0] - 0.5) < std::abs(probe.V[target][0] - 0.5)) target = i;
  const auto dec = decompose(bump(probe.V[target][0], 0.2 * cell), params_1d(16));
  const auto mass = column_mass(dec);
  double total = 0;
  for (double m : mass) total += m;
  EXPECT_GE(mass[target] / total, 0.99);

  // Shifting the bump by one frequency cell moves the dominant column by one.
  const auto shifted = column_mass(decompose(bump(probe.V[target][0] + cell, 0.2 * cell), params_1d(16)));
  const auto top = std::max_element(shifted.begin(), shifted.end()) - shifted.begin();
  EXPECT_EQ(static_cast<std::size_t>(top), target + 1);
}

TEST(Decompose, CoefficientNormBoundedAcrossScales) {
  double lo = INFINITY, hi = 0;
  for (double R : {8.0, 16.0, 32.0})
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto p = params_1d(R);
      const auto dec = decompose(random_bump_function(p, seed), p);
      const double r = dec.coeff_norm() / dec.f_norm();
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  EXPECT_GT(lo, 0);
  EXPECT_LE(hi, 8.0);
}

TEST(Decompose, PacketsAreLinearInF) {
  const auto p = params_1d(8);
  const auto f = random_bump_function(p, 4), g = random_bump_function(p, 5);
  const cplx a(2, -1), b(0.5, 3);
  const auto df = decompose(f, p), dg = decompose(g, p);
  const auto dh = decompose([&](double x, double y) { return a * f(x, y) + b * g(x, y); }, p);
  const double t = 0.3 * p.R;
  for (std::size_t w = 0; w < dh.size(); w += 7) {
    const auto qf = df.q_field(w, t), qg = dg.q_field(w, t), qh = dh.q_field(w, t);
    for (std::size_t i = 0; i < qh.size(); ++i) EXPECT_NEAR(std::abs(qh[i] - (a * qf[i] + b * qg[i])), 0.0, 1e-12);
  }
}

TEST(Decompose, RejectsCoarseGrid) {
  auto p = params_1d(16);
  p.samples_per_Rp = 1;
  EXPECT_THROW(decompose(random_bump_function(p, 1), p), GridTooCoarse);
}

TEST(PacketReport, PropertiesAtR16) {
  const auto p = params_1d(16);
  const auto f = random_bump_function(p, 9);
  const auto dec = decompose(f, p);
  const Report r = packet_property_report(dec, f);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.summary["reconstruction_err"].get<double>(), 1e-6);
  EXPECT_LE(r.summary["decay_slope"].get<double>(), -4.0);
  EXPECT_LE(r.summary["leakage"].get<double>(), 1e-8);
}

TEST(PacketReport, EmptySubsetHasZeroField) {
  const auto p = params_1d(8);
  const auto dec = decompose(random_bump_function(p, 2), p);
  const auto field = dec.evolve(dec.subset_spectrum({}), 0.0);
  EXPECT_EQ(dec.grid_norm(field), 0.0);
}

TEST(PacketReport, SinglePacketHasBoundedNorm) {
  const auto p = params_1d(16);
  const auto dec = decompose(random_bump_function(p, 3), p);
  for (std::size_t w = 0; w < dec.size(); w += 5) {
    const double n = dec.grid_norm(dec.p_field(w, 0.5 * dec.geo.L));
    EXPECT_LE(n, 8.0);
  }
}

TEST(TubeSeparation, ParaboloidRatioIsOne) {
  TubeSeparationConfig cfg;
  cfg.patch = make_patch(cfg.surface, {0.25, 0.25}, {0.5, 0.5});
  const Report r = tube_separation_check(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.summary["ratio_min"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(r.summary["ratio_max"].get<double>(), 1.0, 1e-9);
}

TEST(TubeSeparation, QuarticPatchWithinFactorFour) {
  TubeSeparationConfig cfg;
  cfg.surface = ModelSurface::power(4, 2);
  cfg.patch = make_patch(cfg.surface, {0.5, 0.25}, {0.4, 0.5});
  const Report r = tube_separation_check(cfg);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.summary["ratio_max"].get<double>() / r.summary["ratio_min"].get<double>(), 4.0);
}

TEST(TubeSeparation, SmallStepRejected) {
  TubeSeparationConfig cfg;
  cfg.patch = make_patch(cfg.surface, {0.25, 0.25}, {0.5, 0.5});
  cfg.j_norms = {1};
  EXPECT_THROW(tube_separation_check(cfg), InvalidArgument);
}

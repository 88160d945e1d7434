#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "restrlab/numerics.hpp"
#include "restrlab/oscillatory.hpp"
#include "restrlab/report.hpp"
#include "restrlab/surface.hpp"

namespace restrlab {

// Anisotropic rescaling eta = A^-1 xi with A = diag(a1, a2), a1 = kbar_2 dbar_2,
// a2 = kbar_1 dbar_1, and the phase phi_s(eta) = phi(A eta) / (a1 a2).
struct ScalingMap {
  ModelSurface surface;
  PatchPair original;
  PatchPair rescaled;  // r/a_i, d/a_i, kappa_i (a_i / a_other); kbar, dbar recomputed
  double a1 = 1, a2 = 1;

  double a() const { return a1 * a2; }
  double scale(int i) const { return i == 0 ? a1 : a2; }
  double phi(double e1, double e2) const;
  // d^k along axis i of the rescaled phase.
  double axis_deriv(int i, int k, double e) const;
};

ScalingMap rescale_pair(const ModelSurface& s, const PatchPair& pair);

// Random admissible pair: dbar = 2^-u with u in [3, 8], gaps comparable to dbar,
// r >= d. Retries until pair_quantities accepts it with the given band.
PatchPair random_admissible_pair(const ModelSurface& s, std::mt19937_64& rng,
                                 const PairOptions& opt = {2.0, Band{0.25, 4.0}});

struct RescaleCheckConfig {
  int samples = 25;          // per patch, on a square grid including corners
  Band separation{0.25, 4.0};
  double slack = 1e-9;
  bool strict = false;       // throw AssumptionViolation on the first failing check
};

// Checks (i) derivative oscillation, (ii) derivative sizes for orders 2..4 and
// (iii) separation of the rescaled gradients. Each row is one check type with the
// worst ratio found; (i) and (ii) are normalized so that the admissible constant is 1.
Report verify_rescaled(const ScalingMap& map, const RescaleCheckConfig& cfg = {});

struct BoundConstants {
  double local = 0;     // right-hand side of the local bilinear estimate (C = 1, R^alpha dropped)
  double global = 0;    // global estimate with exponents q, eps
  double dyadic = 0;    // dyadic-pair estimate with rho = dbar and kappa = max curvature
  double Q = 1;
  double log_factor = 1;
  bool dyadic_hypothesis = false;  // (m_max + 3)(1/p - 1/2) < 1/q'
};

struct BoundOptions {
  double gamma = 1.0;  // exponent of the logarithm, left open by the estimates
  // Maximal principal curvature per axis over both patches; zero selects kbar.
  std::array<double, 2> kappa_max{0.0, 0.0};
  double m_max = 2.0;
};

BoundConstants bound_constants(const PatchPair& pair, double p, double q, double eps = 0.01,
                               const BoundOptions& opt = {});
// Largest principal curvature of either patch along each axis.
std::array<double, 2> max_curvature(const ModelSurface& s, const PatchPair& pair);
// The dyadic-pair estimate on its own.
double dyadic_bound(const std::array<double, 2>& rho, const std::array<double, 2>& kappa, double p,
                    double q, double eps);

// |x_i + g_i x3| <= R^2 / dbar_i and |x3| <= R^2 / min(kbar_i dbar_i^2).
struct Cuboid {
  std::array<double, 2> r0{};
  std::array<double, 2> g{};  // grad phi(r0)
  std::array<double, 3> half{};
  double R = 1;
  bool contains(const Point3& x) const;
};

Cuboid cuboid_Q1(const ModelSurface& s, const PatchPair& pair, double R);
// Samples |T x| = R and reports whether every preimage lies in the cuboid.
Report cuboid_containment_check(const ModelSurface& s, const PatchPair& pair, double R,
                                std::size_t n = 1000, std::uint64_t seed = 1);

// Graph of phi over the rectangle of `patch` in the hyperplane with normal e3,
// re-expressed over the plane through 0 with unit normal n2.
struct ReparamConfig {
  ModelSurface surface = ModelSurface::power(2, 2);
  Patch patch;
  std::array<double, 3> n2{0, 0, 1};
  double a_min = 0.1;  // transversality margin
  int grid = 16;       // fibers and samples per fiber
  int spot_points = 5;
  double fd_rtol = 1e-4;
  // Normalized derivative sizes of order l may reach C_adm A_l tmin^-(2l-1), where A_l
  // is the same quantity for the original graph and tmin the transversality margin.
  double C_adm = 4;
};

struct ReparamResult {
  // (x', s, phi2) samples: x' along the common line, s along h2.
  std::vector<std::array<double, 3>> samples;
  std::array<double, 3> E{}, h1{}, h2{};
  double norm_ratio = 1;  // ||f1||_2 / ||f2||_2 for f1 = 1
  double min_transversality = 1;
  Report report;
  // phi2 at (x', s) by fiber root finding.
  std::function<double(double, double)> phi2;
};

ReparamResult reparametrize_graph(const ReparamConfig& cfg);

// Per-axis description used by the separable bilinear evaluator: the ith axis of
// the surface carries psi, and each patch contributes the interval [lo, hi] and
// a weight w(xi) (the separable factor of the density).
struct AxisData {
  std::function<double(double)> psi;
  std::array<double, 2> lo{}, hi{};  // patch 1 and patch 2
  std::array<std::function<cplx(double)>, 2> w;
};

// Sheared box |x_i + g_i x3| <= X_i, |x3| <= X3.
struct ShearedBox {
  std::array<double, 2> g{}, X{};
  double X3 = 1;
};

struct BilinearGrid {
  int n_axis = 64;  // midpoint samples per horizontal axis
  int n_vert = 64;  // midpoint samples in x3 (raised to the phase scale when needed)
  int panel_nodes = 16;
};

// ||E f1 E f2||_{L^p(box)} for separable densities by midpoint sums in the
// sheared coordinates; the inner integrals use Gauss panels sized to the phase.
double bilinear_norm(const std::array<AxisData, 2>& axes, const ShearedBox& box, double p,
                     const BilinearGrid& grid = {});

struct BilinearConfig {
  ModelSurface surface = ModelSurface::power(2, 2);
  std::vector<int> depths{1, 2, 3};
  double p = 1.8;
  double R = 8;
  int trials = 4;
  std::uint64_t seed = 1;
  double C_emp = 10;
  double exponent_slack = 0.15;
  double refine_tol = 0.10;
  double eps = 0.01;
  BilinearGrid grid{};
  bool zero = false;  // use f1 = f2 = 0
};

// One Whitney pair per depth (j1 = j2 = depth + 1); unit-norm random separable
// densities shared across depths; ratio to the dyadic-pair bound with q = 2.
Report bilinear_empirical(const BilinearConfig& cfg);

}  // namespace restrlab

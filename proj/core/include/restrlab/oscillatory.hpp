#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "restrlab/report.hpp"
#include "restrlab/surface.hpp"

namespace restrlab {

using cplx = std::complex<double>;

// Phase t -> mu t + lambda psi(t) on [t0, t1].
struct OscPhase1D {
  double mu = 0, lambda = 0;
  Profile psi = Profile::make(2.0);
  double t0 = 0, t1 = 1;
};

// a(t) = smooth(t) * t^-alpha * |log(t/2)|^-beta. With alpha > 0 and t0 = 0
// the singular factor is removed by the substitution t = u^(1/(1-alpha)).
struct Amplitude {
  std::function<cplx(double)> smooth;  // empty means 1
  double alpha = 0, beta = 0;
};

struct OscOptions {
  double tol = 1e-8;
  std::size_t panel_cap = 1'000'000;
  double max_remainder = 0.7853981633974483;  // pi/4 after linearization
};

struct OscResult {
  cplx value{0, 0};
  double error = 0;
  std::size_t panels = 0;
};

// Generic engine: integral of amp(t) exp(-i phase(t)) over [a, b]. Panels are
// linearized at their centres, the slowly varying remainder is expanded in
// Legendre polynomials and integrated against the exact linear-phase moments.
OscResult osc_quad(const std::function<double(double)>& phase,
                   const std::function<double(double)>& dphase,
                   const std::function<cplx(double)>& amp, double a, double b,
                   const OscOptions& opt = {});

OscResult osc_integral_1d(const OscPhase1D& phase, const Amplitude& amp = {},
                          const OscOptions& opt = {});

// Patch functions: separable products f1(x1) f2(x2) or a general f(x1, x2).
struct PatchFunction {
  std::function<cplx(double)> f1, f2;
  std::function<cplx(double, double)> general;
  bool separable() const { return static_cast<bool>(f1) && static_cast<bool>(f2); }
};

struct Point3 {
  double x1 = 0, x2 = 0, x3 = 0;
};

// R*f(x) = int_patch f(xi) exp(-i (x1 xi1 + x2 xi2 + x3 phi(xi))) dxi.
// The general path uses a tensor Gauss rule of `grid` points per axis
// (grid <= 256) on top of a panel split sized to the phase.
std::vector<cplx> extension_eval(const ModelSurface& s, const Patch& patch, const PatchFunction& f,
                                 const std::vector<Point3>& points, const OscOptions& opt = {},
                                 int grid = 0);

// Oscillatory lower bounds. Mode i uses [0, delta] and mu of opposite sign to
// lambda; mode ii uses the singular amplitude on [0, 1] with mu = lambda^(1/2m).
struct LowerBoundConfig {
  std::string mode = "i";  // "i" or "ii"
  double m = 2;
  double delta = 0.1;
  double alpha = 0, beta = 0;
  std::vector<double> mu, lambda;  // mode i: full grid; mode ii: lambda only
  Band band{0.25, 4.0};
  double spread = 4.0;  // allowed max/min of the ratio across the grid
  double tol = 1e-9;
  bool strict = false;  // throw BandViolation instead of reporting
};
Report lowerbound_check(const LowerBoundConfig& cfg);

// Default 5x5 grid for mode i honouring mu >= 10, lambda/mu >= 10, mu^m/lambda >= 10.
LowerBoundConfig lowerbound_default_grid(double m);

struct NecessaryConfig {
  std::string kind = "p_gt_h1";  // p_gt_h1 | secondnec | critline_strongtype | knapp_PT
  double m1 = 2, m2 = 2;
  double p = 3, s = 2;
  double beta = 0.3;   // log exponent (secondnec) or r (critline)
  int log2_lo = 4, log2_hi = 12;
  std::vector<double> T{4, 8, 16, 32, 64};
  int nodes = 16;
  double fit_residual_cap = 0.05;
  double tol = 1e-8;
};
// Per-kind defaults (cutoff range, exponents) used by the CLI and the tests.
NecessaryConfig necessary_defaults(const std::string& kind);
Report necessary_experiment(const NecessaryConfig& cfg);

// Linear map of the decay estimate for a pair, anchored at the corner of the
// patch with the smaller curvature.
struct DecayFrame {
  PatchPair pair;
  std::array<double, 2> r0{};
  std::array<double, 2> grad0{};
  std::array<double, 3> diag{};  // dbar1, dbar2, max(kbar_i dbar_i^2)
  double s = 0.5;
  std::array<double, 3> apply(const Point3& x) const;
  Point3 inverse(const std::array<double, 3>& y) const;
  double det() const { return diag[0] * diag[1] * diag[2]; }
};
DecayFrame make_decay_frame(const ModelSurface& s, const PatchPair& pair);

// |nu_S(x)| for the patch measure (Lebesgue in xi).
cplx patch_measure_ft(const ModelSurface& s, const Patch& p, const Point3& x, double tol = 1e-9);

struct DecayConfig {
  double C = 20;
  double t_scale = 1.0;  // replace T by t_scale * T
  double tol = 1e-9;
};
// Ratio sup of (|nu_S| + |nu_St|)(1 + |Tx|)^s / (dbar1 dbar2) over the samples.
Report fourier_decay_check(const ModelSurface& s, const PatchPair& pair,
                           const std::vector<Point3>& samples, const DecayConfig& cfg = {});
// Samples x = T^-1 y with log-uniform |y| in [1e-2, y_max] and uniform directions.
std::vector<Point3> decay_samples(const DecayFrame& frame, std::size_t n, std::uint64_t seed,
                                  double y_max = 1e4);

}  // namespace restrlab

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "restrlab/numerics.hpp"
#include "restrlab/report.hpp"
#include "restrlab/surface.hpp"

namespace restrlab {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;

// Desk-scale packet setup over U = [u_lo, u_hi]^d with phase sum_i psi(xi_i).
// D = 0 selects D = 1/kappa; grid sizes are derived when left at 0.
struct PacketParams {
  int d = 1;
  double R = 16;
  double m = 2;
  double u_lo = 0.25, u_hi = 0.75;
  double D = 0;
  int samples_per_Rp = 0;  // spatial samples per R' (power of two)
  int lattice_per_axis = 0;  // K: number of y values per axis, period P = K R'
};

// Derived quantities: R' = R/D, tube length L = R'^2/kappa, and the periodic grids.
struct PacketGeometry {
  int d = 1;
  double R = 0, D = 0, kappa = 0, Rp = 0, L = 0;
  double u_lo = 0, u_hi = 0;
  int N = 0;     // samples per axis
  int s = 0;     // samples per R'
  int K = 0;     // lattice points per axis
  double dx = 0, P = 0, dxi = 0, xi0 = 0;
  double x(int j) const { return (j - N / 2) * dx; }
  double xi(int k) const { return xi0 + k * dxi; }
};
PacketGeometry packet_geometry(const PacketParams& p);

struct Tube {
  Vec2 y{}, v{}, grad{};  // grad = nabla phi(v)
  double Rp = 0, L = 0;
  int d = 1;
  // |x - y + t grad phi(v)|, the cross-section offset.
  double offset(const Vec2& x, double t) const;
  bool contains(const Vec2& x, double t) const { return std::abs(t) <= L && offset(x, t) <= Rp; }
};

// f on U (the second coordinate is ignored when d = 1).
using FreqFunction = std::function<cplx(double, double)>;

class PacketDecomposition {
 public:
  PacketGeometry geo;
  Profile psi = Profile::make(2.0);
  std::vector<Vec2> V;                 // frequency centres
  std::vector<cplx> coeff;             // c_w, index iv * K^d + iy
  std::vector<std::vector<cplx>> ghat; // transform of psi_v f on the spatial grid
  std::vector<cplx> f;                 // samples of f on the frequency grid
  std::size_t size() const { return coeff.size(); }
  std::size_t grid_size() const;
  // |c_w| below this is treated as zero when normalizing packets.
  double negligible() const;
  std::size_t lattice_size() const;
  Tube tube(std::size_t w) const;
  Vec2 y_of(std::size_t iy) const;
  // Unnormalized packet q_w = c_w p_w on the spatial grid at time t.
  std::vector<cplx> q_field(std::size_t w, double t) const;
  // Normalized packet p_w; zero when c_w is negligible.
  std::vector<cplx> p_field(std::size_t w, double t) const;
  // Sum of q_w over all w at each of the given times.
  std::vector<std::vector<cplx>> reconstruct(const std::vector<double>& times) const;
  // Frequency samples of sum_{w in W} p_w(., 0) for a subset of packet indices.
  std::vector<cplx> subset_spectrum(const std::vector<std::size_t>& W) const;
  // Propagate frequency samples to time t and return the spatial field.
  std::vector<cplx> evolve(const std::vector<cplx>& spectrum, double t) const;
  // R*f on the grid computed directly from the samples of f.
  std::vector<cplx> direct(double t) const;
  // Mass of the transform of q_w(., 0) outside B(v, 2/R'), relative to the total.
  double leakage(std::size_t w) const;
  double f_norm() const;      // ||f||_2 on U
  double coeff_norm() const;  // ||c||_2
  double grid_norm(const std::vector<cplx>& g) const;  // L^2 norm on the spatial grid

  struct Transforms;
  std::shared_ptr<const Transforms> fft;
};

PacketDecomposition decompose(const FreqFunction& f, const PacketParams& params);

// Smooth random test function: a few compactly supported bumps with random
// complex weights and a random linear phase.
FreqFunction random_bump_function(const PacketParams& p, std::uint64_t seed);

struct PacketReportConfig {
  int decay_N = 4;
  double p4_C = 8.0;
  int p4_subsets = 10;
  int p4_times = 5;
  double recon_tol = 1e-6;
  std::uint64_t seed = 1;
  bool oracle = true;  // also compare against the oscillatory engine (d = 1)
};

// (P2) leakage, (P3) decay slope and constants, (P4) subset ratios and the
// reconstruction residual on the slab |t| <= L.
Report packet_property_report(const PacketDecomposition& dec, const FreqFunction& f,
                              const PacketReportConfig& cfg = {});

struct TubeSeparationConfig {
  ModelSurface surface = ModelSurface::power(2, 2);
  Patch patch;  // must hold both endpoints of every pair
  double Rp = 1024;
  double theta = 0.7853981633974483;  // direction of the straight test curve
  std::vector<int> j_norms{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int starts = 5;
  Band band{0.25, 4.0};
};
Report tube_separation_check(const TubeSeparationConfig& cfg);

}  // namespace restrlab

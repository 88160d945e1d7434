#include "restrlab/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "restrlab/errors.hpp"
#include "restrlab/oscillatory.hpp"

namespace restrlab {

namespace {

constexpr double kWindowBeta = 8.0;
constexpr std::size_t kMaxPackets = 100000;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Smooth bump supported in (-1, 1) with g(0) = 1.
double bump(double u) {
  const double a = u * u;
  if (a >= 1.0) return 0.0;
  return std::exp(-kWindowBeta * a / (1.0 - a));
}

// Partition-of-unity window on the integer lattice, supported in the unit ball.
double window(int d, const Vec2& u) {
  if (d == 1) {
    const double num = bump(u[0]);
    if (num == 0.0) return 0.0;
    const double f = std::floor(u[0]);
    return num / (bump(u[0] - f) + bump(u[0] - f - 1.0));
  }
  const double num = bump(std::hypot(u[0], u[1]));
  if (num == 0.0) return 0.0;
  const double f0 = std::floor(u[0]), f1 = std::floor(u[1]);
  double den = 0;
  for (int a = -1; a <= 2; ++a)
    for (int b = -1; b <= 2; ++b) den += bump(std::hypot(u[0] - f0 - a, u[1] - f1 - b));
  return num / den;
}

int next_pow2(double x) {
  int n = 1;
  while (n < x) n *= 2;
  return n;
}

double uniform01(std::uint64_t& state) { return (splitmix64(state) >> 11) * 0x1.0p-53; }

double normal01(std::uint64_t& state) {
  const double u1 = std::max(uniform01(state), 1e-300), u2 = uniform01(state);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

struct PacketDecomposition::Transforms {
  int d = 1, N = 0;
  std::size_t size = 0;
  double dxi_d = 1, norm_inv = 1;  // dxi^d and 1/(N dxi)^d
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<double> sign;     // (-1)^(k1 + k2)
  std::vector<cplx> shift;      // exp(-i x . xi0 (1,..,1))
  std::vector<double> phi;      // phase on the frequency grid
  std::vector<double> eta;      // eta_0 at periodic offsets
  std::vector<double> eta_sum;  // sum of eta_y over the whole lattice

  Transforms(const PacketGeometry& g, const Profile& psi) : d(g.d), N(g.N) {
    size = d == 1 ? std::size_t(N) : std::size_t(N) * std::size_t(N);
    dxi_d = std::pow(g.dxi, d);
    norm_inv = std::pow(1.0 / (N * g.dxi), d);
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size));
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      if (d == 1) {
        fwd = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, flags);
        bwd = fftw_plan_dft_1d(N, buf, buf, FFTW_BACKWARD, flags);
      } else {
        fwd = fftw_plan_dft_2d(N, N, buf, buf, FFTW_FORWARD, flags);
        bwd = fftw_plan_dft_2d(N, N, buf, buf, FFTW_BACKWARD, flags);
      }
      fftw_free(buf);
    }
    sign.resize(size);
    shift.resize(size);
    phi.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      const int k0 = d == 1 ? int(i) : int(i / N), k1 = d == 1 ? 0 : int(i % N);
      sign[i] = ((k0 + k1) % 2) ? -1.0 : 1.0;
      const double xs = g.x(k0) + (d == 2 ? g.x(k1) : 0.0);
      shift[i] = std::polar(1.0, -xs * g.xi0);
      phi[i] = psi.value(std::abs(g.xi(k0))) + (d == 2 ? psi.value(std::abs(g.xi(k1))) : 0.0);
    }
    // eta_0 as the inverse DFT of its compactly supported transform; the sum
    // over the lattice R' Z^d is then exactly 1 on the torus.
    std::vector<cplx> B(size);
    const double scale = std::pow(g.Rp / g.P, d);
    for (std::size_t i = 0; i < size; ++i) {
      const int k0 = d == 1 ? int(i) : int(i / N), k1 = d == 1 ? 0 : int(i % N);
      const double w0 = (k0 < N / 2 ? k0 : k0 - N) * g.dxi, w1 = (k1 < N / 2 ? k1 : k1 - N) * g.dxi;
      B[i] = scale * bump(g.Rp * std::hypot(w0, w1));
    }
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(B.data()), reinterpret_cast<fftw_complex*>(B.data()));
    eta.resize(size);
    for (std::size_t i = 0; i < size; ++i) eta[i] = B[i].real();
    // The lattice has exactly N/s points per axis, so summing eta_y over all y
    // folds eta_0 onto the residues mod s.
    const int s = g.s;
    std::vector<double> fold(std::size_t(d == 1 ? s : s * s), 0.0);
    for (std::size_t i = 0; i < size; ++i) {
      const int k0 = d == 1 ? int(i) : int(i / N), k1 = d == 1 ? 0 : int(i % N);
      fold[std::size_t(d == 1 ? k0 % s : (k0 % s) * s + k1 % s)] += eta[i];
    }
    eta_sum.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      const int k0 = d == 1 ? int(i) : int(i / N), k1 = d == 1 ? 0 : int(i % N);
      const int a = (k0 + N / 2) % s, b = (k1 + N / 2) % s;
      eta_sum[i] = fold[std::size_t(d == 1 ? a : a * s + b)];
    }
  }
  ~Transforms() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  Transforms(const Transforms&) = delete;
  Transforms& operator=(const Transforms&) = delete;

  // Frequency samples -> sum_k h_k exp(-i x . xi_k) dxi^d on the spatial grid.
  std::vector<cplx> to_space(std::vector<cplx> h) const {
    for (std::size_t i = 0; i < size; ++i) h[i] *= sign[i];
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(h.data()), reinterpret_cast<fftw_complex*>(h.data()));
    for (std::size_t i = 0; i < size; ++i) h[i] *= shift[i] * dxi_d;
    return h;
  }
  std::vector<cplx> to_freq(std::vector<cplx> g) const {
    for (std::size_t i = 0; i < size; ++i) g[i] *= std::conj(shift[i]);
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(g.data()), reinterpret_cast<fftw_complex*>(g.data()));
    for (std::size_t i = 0; i < size; ++i) g[i] *= sign[i] * norm_inv;
    return g;
  }
  // eta_y on the grid for lattice offsets n (in units of R').
  double eta_at(std::size_t i, const std::array<int, 2>& n, int s) const {
    auto wrap = [this](long v) { return int(((v % N) + N) % N); };
    if (d == 1) return eta[std::size_t(wrap(long(i) - N / 2 - long(n[0]) * s))];
    const long j0 = long(i / N), j1 = long(i % N);
    return eta[std::size_t(wrap(j0 - N / 2 - long(n[0]) * s)) * N + std::size_t(wrap(j1 - N / 2 - long(n[1]) * s))];
  }
};

PacketGeometry packet_geometry(const PacketParams& p) {
  if (p.d != 1 && p.d != 2) throw InvalidArgument("wave packets support d = 1 or 2");
  if (p.R < 1) throw InvalidArgument("R must be >= 1");
  if (!(0 < p.u_lo && p.u_lo < p.u_hi && p.u_hi <= 1)) throw InvalidArgument("need 0 < u_lo < u_hi <= 1");
  if (p.d == 2 && p.R > 32) throw InvalidArgument("d = 2 is limited to R <= 32");
  const Profile psi = Profile::make(p.m);
  PacketGeometry g;
  g.d = p.d;
  g.R = p.R;
  g.u_lo = p.u_lo;
  g.u_hi = p.u_hi;
  for (int i = 0; i <= 64; ++i) g.kappa = std::max(g.kappa, psi.d2(p.u_lo + (p.u_hi - p.u_lo) * i / 64.0));
  g.D = p.D > 0 ? p.D : 1.0 / g.kappa;
  if (g.D * g.kappa > 1.0 + 1e-12) throw InvalidArgument("need D <= 1/kappa");
  g.Rp = p.R / g.D;
  g.L = g.Rp * g.Rp / g.kappa;
  if (p.u_lo < 3.0 / g.Rp) throw InvalidArgument("U must stay 3/R' away from the origin");

  // Frequency band: U widened by the window and transform supports, plus a guard.
  const double band = (p.u_hi - p.u_lo) + 10.0 / g.Rp;
  g.s = p.samples_per_Rp > 0 ? p.samples_per_Rp : next_pow2(band * g.Rp / (2.0 * M_PI));
  g.dx = g.Rp / g.s;
  const double span = 2.0 * M_PI / g.dx;
  g.xi0 = 0.5 * (p.u_lo + p.u_hi) - 0.5 * span;
  if (span < band) throw GridTooCoarse("spatial sampling does not resolve the frequency band");

  const double max_grad = psi.d1(std::min(1.0, p.u_hi + 3.0 / g.Rp));
  const double need = 2.0 * (g.L * max_grad * std::sqrt(double(p.d)) + 8.0 * g.Rp);
  // In 1D keep at least 256 frequency samples across U so the grid sums match
  // the continuous integral; 2D grids are compared only against themselves.
  const double resolve = p.d == 1 ? 256.0 * 2.0 * M_PI / ((p.u_hi - p.u_lo) * g.Rp) : 1.0;
  g.K = p.lattice_per_axis > 0 ? p.lattice_per_axis
                               : std::max({32, next_pow2(need / g.Rp), next_pow2(resolve)});
  g.P = g.K * g.Rp;
  g.N = g.K * g.s;
  g.dxi = 2.0 * M_PI / g.P;
  if (g.dxi > 1.0 / (4.0 * g.Rp)) throw GridTooCoarse("need at least 4 frequency samples per 1/R' cell");
  if (p.d == 2 && g.N > 512) throw GridTooCoarse("d = 2 grids are capped at 512^2");
  if (g.N > (1 << 22)) throw GridTooCoarse("grid exceeds 2^22 samples");
  return g;
}

double Tube::offset(const Vec2& x, double t) const {
  const double a = x[0] - y[0] + t * grad[0];
  const double b = d == 2 ? x[1] - y[1] + t * grad[1] : 0.0;
  return std::hypot(a, b);
}

std::size_t PacketDecomposition::lattice_size() const {
  return geo.d == 1 ? std::size_t(geo.K) : std::size_t(geo.K) * std::size_t(geo.K);
}
std::size_t PacketDecomposition::grid_size() const { return fft->size; }

double PacketDecomposition::negligible() const {
  double mx = 0;
  for (const auto& c : coeff) mx = std::max(mx, std::abs(c));
  return std::max(1e-300, 1e-12 * mx);
}

Vec2 PacketDecomposition::y_of(std::size_t iy) const {
  const int K = geo.K;
  if (geo.d == 1) return {(int(iy) - K / 2) * geo.Rp, 0.0};
  return {(int(iy / K) - K / 2) * geo.Rp, (int(iy % K) - K / 2) * geo.Rp};
}

Tube PacketDecomposition::tube(std::size_t w) const {
  const std::size_t Ky = lattice_size();
  Tube t;
  t.d = geo.d;
  t.y = y_of(w % Ky);
  t.v = V[w / Ky];
  t.grad = {psi.d1(t.v[0]), geo.d == 2 ? psi.d1(t.v[1]) : 0.0};
  t.Rp = geo.Rp;
  t.L = geo.L;
  return t;
}

namespace {

std::array<int, 2> lattice_offset(const PacketGeometry& g, std::size_t iy) {
  if (g.d == 1) return {int(iy) - g.K / 2, 0};
  return {int(iy / g.K) - g.K / 2, int(iy % g.K) - g.K / 2};
}

}  // namespace

std::vector<cplx> PacketDecomposition::evolve(const std::vector<cplx>& spectrum, double t) const {
  std::vector<cplx> h = spectrum;
  if (t != 0.0)
    for (std::size_t i = 0; i < h.size(); ++i) h[i] *= std::polar(1.0, -t * fft->phi[i]);
  return fft->to_space(std::move(h));
}

std::vector<cplx> PacketDecomposition::q_field(std::size_t w, double t) const {
  const std::size_t Ky = lattice_size();
  const auto& g = ghat[w / Ky];
  const auto n = lattice_offset(geo, w % Ky);
  std::vector<cplx> a(g.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = g[i] * fft->eta_at(i, n, geo.s);
  return evolve(fft->to_freq(std::move(a)), t);
}

std::vector<cplx> PacketDecomposition::p_field(std::size_t w, double t) const {
  const cplx c = coeff[w];
  if (std::abs(c) <= negligible()) return std::vector<cplx>(grid_size());
  auto q = q_field(w, t);
  for (auto& v : q) v /= c;
  return q;
}

std::vector<cplx> PacketDecomposition::subset_spectrum(const std::vector<std::size_t>& W) const {
  const std::size_t Ky = lattice_size();
  std::vector<cplx> acc(grid_size());
  for (std::size_t w : W) {
    const cplx c = coeff[w];
    if (std::abs(c) <= negligible()) continue;
    const auto& g = ghat[w / Ky];
    const auto n = lattice_offset(geo, w % Ky);
    std::vector<cplx> a(g.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = g[i] * fft->eta_at(i, n, geo.s) / c;
    a = fft->to_freq(std::move(a));
    for (std::size_t i = 0; i < a.size(); ++i) acc[i] += a[i];
  }
  return acc;
}

std::vector<std::vector<cplx>> PacketDecomposition::reconstruct(const std::vector<double>& times) const {
  // Sum the packets column by column in space, transform once per column.
  std::vector<std::vector<cplx>> spec(V.size());
  parallel_for(V.size(), [&](std::size_t iv) {
    const auto& g = ghat[iv];
    std::vector<cplx> a(g.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = g[i] * fft->eta_sum[i];
    spec[iv] = fft->to_freq(std::move(a));
  });
  std::vector<cplx> total(grid_size());
  for (const auto& s : spec)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += s[i];
  std::vector<std::vector<cplx>> out;
  for (double t : times) out.push_back(evolve(total, t));
  return out;
}

std::vector<cplx> PacketDecomposition::direct(double t) const { return evolve(f, t); }

double PacketDecomposition::leakage(std::size_t w) const {
  const std::size_t Ky = lattice_size();
  const auto& g = ghat[w / Ky];
  const auto n = lattice_offset(geo, w % Ky);
  const Vec2 v = V[w / Ky];
  std::vector<cplx> a(g.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = g[i] * fft->eta_at(i, n, geo.s);
  a = fft->to_freq(std::move(a));
  double out = 0, tot = 0;
  const int N = geo.N;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int k0 = geo.d == 1 ? int(i) : int(i / N), k1 = geo.d == 1 ? 0 : int(i % N);
    const double r = std::hypot(geo.xi(k0) - v[0], geo.d == 2 ? geo.xi(k1) - v[1] : 0.0);
    const double m = std::norm(a[i]);
    tot += m;
    if (r > 2.0 / geo.Rp) out += m;
  }
  return tot > 0 ? out / tot : 0.0;
}

double PacketDecomposition::f_norm() const {
  double s = 0;
  for (const auto& v : f) s += std::norm(v);
  return std::sqrt(s * fft->dxi_d);
}

double PacketDecomposition::coeff_norm() const {
  double s = 0;
  for (const auto& c : coeff) s += std::norm(c);
  return std::sqrt(s);
}

double PacketDecomposition::grid_norm(const std::vector<cplx>& g) const {
  double s = 0;
  for (const auto& v : g) s += std::norm(v);
  return std::sqrt(s * std::pow(geo.dx, geo.d));
}

namespace {

// Centered maximal function over cubes of half-width k dx, k = 0 .. N/2 - 1,
// on the periodic grid, evaluated at the lattice points.
std::vector<double> maximal_at_lattice(const std::vector<cplx>& g, const PacketGeometry& geo) {
  const int N = geo.N, K = geo.K, d = geo.d;
  std::vector<double> out;
  if (d == 1) {
    std::vector<double> S(std::size_t(N) + 1, 0.0);
    for (int i = 0; i < N; ++i) S[std::size_t(i) + 1] = S[std::size_t(i)] + std::abs(g[std::size_t(i)]);
    auto range = [&](int start, int len) {
      start = ((start % N) + N) % N;
      if (start + len <= N) return S[std::size_t(start + len)] - S[std::size_t(start)];
      return (S[std::size_t(N)] - S[std::size_t(start)]) + S[std::size_t(start + len - N)];
    };
    for (int n = 0; n < K; ++n) {
      const int c = N / 2 + (n - K / 2) * geo.s;
      double best = 0;
      for (int k = 0; 2 * k + 1 < N; ++k) best = std::max(best, range(c - k, 2 * k + 1) / (2 * k + 1));
      out.push_back(best);
    }
    return out;
  }
  const std::size_t W = std::size_t(N) + 1;
  std::vector<double> S(W * W, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      S[(i + 1) * W + j + 1] = std::abs(g[std::size_t(i) * N + j]) + S[i * W + j + 1] + S[(i + 1) * W + j] - S[i * W + j];
  auto rect = [&](int i0, int i1, int j0, int j1) {  // half-open, inside [0, N]
    return S[i1 * W + j1] - S[i0 * W + j1] - S[i1 * W + j0] + S[i0 * W + j0];
  };
  auto split = [N](int start, int len, std::array<std::array<int, 2>, 2>& parts) {
    start = ((start % N) + N) % N;
    if (start + len <= N) {
      parts[0] = {start, start + len};
      parts[1] = {0, 0};
    } else {
      parts[0] = {start, N};
      parts[1] = {0, start + len - N};
    }
  };
  for (int n0 = 0; n0 < K; ++n0)
    for (int n1 = 0; n1 < K; ++n1) {
      const int c0 = N / 2 + (n0 - K / 2) * geo.s, c1 = N / 2 + (n1 - K / 2) * geo.s;
      double best = 0;
      for (int k = 0; 2 * k + 1 < N; ++k) {
        std::array<std::array<int, 2>, 2> a, b;
        split(c0 - k, 2 * k + 1, a);
        split(c1 - k, 2 * k + 1, b);
        double sum = 0;
        for (const auto& pa : a)
          for (const auto& pb : b)
            if (pa[1] > pa[0] && pb[1] > pb[0]) sum += rect(pa[0], pa[1], pb[0], pb[1]);
        best = std::max(best, sum / double((2 * k + 1) * (2 * k + 1)));
      }
      out.push_back(best);
    }
  return out;
}

}  // namespace

PacketDecomposition decompose(const FreqFunction& fn, const PacketParams& params) {
  PacketDecomposition dec;
  dec.geo = packet_geometry(params);
  const PacketGeometry& g = dec.geo;
  dec.psi = Profile::make(params.m);
  dec.fft = std::make_shared<const PacketDecomposition::Transforms>(g, dec.psi);
  const auto& T = *dec.fft;
  const int N = g.N;

  // Frequency centres whose window reaches U.
  const int n_lo = int(std::ceil((g.u_lo - 1.0 / g.Rp) * g.Rp)), n_hi = int(std::floor((g.u_hi + 1.0 / g.Rp) * g.Rp));
  auto dist_to_U = [&](double v) { return std::max({0.0, g.u_lo - v, v - g.u_hi}); };
  for (int a = n_lo; a <= n_hi; ++a) {
    if (g.d == 1) {
      if (dist_to_U(a / g.Rp) < 1.0 / g.Rp) dec.V.push_back({a / g.Rp, 0.0});
      continue;
    }
    for (int b = n_lo; b <= n_hi; ++b)
      if (std::hypot(dist_to_U(a / g.Rp), dist_to_U(b / g.Rp)) < 1.0 / g.Rp) dec.V.push_back({a / g.Rp, b / g.Rp});
  }
  const std::size_t Ky = dec.lattice_size();
  if (dec.V.size() * Ky > kMaxPackets)
    throw IndexSetTooLarge(std::to_string(dec.V.size() * Ky) + " packets exceed the cap of 100000");

  dec.f.assign(T.size, cplx(0, 0));
  for (std::size_t i = 0; i < T.size; ++i) {
    const int k0 = g.d == 1 ? int(i) : int(i / N), k1 = g.d == 1 ? 0 : int(i % N);
    const double a = g.xi(k0), b = g.d == 2 ? g.xi(k1) : 0.5 * (g.u_lo + g.u_hi);
    if (a >= g.u_lo && a <= g.u_hi && b >= g.u_lo && b <= g.u_hi) dec.f[i] = fn(a, g.d == 2 ? b : 0.0);
  }

  dec.ghat.resize(dec.V.size());
  dec.coeff.assign(dec.V.size() * Ky, cplx(0, 0));
  const double cscale = std::pow(g.Rp, 0.5 * g.d);
  parallel_for(dec.V.size(), [&](std::size_t iv) {
    const Vec2 v = dec.V[iv];
    std::vector<cplx> h(T.size);
    for (std::size_t i = 0; i < T.size; ++i) {
      if (dec.f[i] == cplx(0, 0)) continue;
      const int k0 = g.d == 1 ? int(i) : int(i / N), k1 = g.d == 1 ? 0 : int(i % N);
      const Vec2 u{g.Rp * (g.xi(k0) - v[0]), g.d == 2 ? g.Rp * (g.xi(k1) - v[1]) : 0.0};
      h[i] = dec.f[i] * window(g.d, u);
    }
    dec.ghat[iv] = T.to_space(std::move(h));
    const auto M = maximal_at_lattice(dec.ghat[iv], g);
    for (std::size_t iy = 0; iy < Ky; ++iy) dec.coeff[iv * Ky + iy] = cscale * M[iy];
  });
  return dec;
}

FreqFunction random_bump_function(const PacketParams& p, std::uint64_t seed) {
  std::uint64_t st = seed;
  struct Bump {
    Vec2 c;
    double w;
    cplx a;
  };
  std::vector<Bump> bumps;
  const double len = p.u_hi - p.u_lo;
  for (int i = 0; i < 3; ++i) {
    Bump b;
    b.w = len * (0.2 + 0.2 * uniform01(st));
    for (int k = 0; k < 2; ++k) b.c[k] = p.u_lo + b.w + (len - 2 * b.w) * uniform01(st);
    b.a = cplx(normal01(st), normal01(st));
    bumps.push_back(b);
  }
  const double slope = 4.0 * (2.0 * uniform01(st) - 1.0) * p.R;
  const int d = p.d;
  return [bumps, slope, d](double x1, double x2) {
    cplx acc(0, 0);
    for (const auto& b : bumps) {
      double v = std::exp(1.0) * std::exp(-1.0 / std::max(1e-300, 1.0 - std::pow((x1 - b.c[0]) / b.w, 2)));
      if (std::abs(x1 - b.c[0]) >= b.w) v = 0;
      if (d == 2) {
        const double u = (x2 - b.c[1]) / b.w;
        v *= std::abs(u) >= 1 ? 0.0 : std::exp(1.0) * std::exp(-1.0 / (1.0 - u * u));
      }
      acc += b.a * v;
    }
    return acc * std::polar(1.0, slope * (x1 + (d == 2 ? x2 : 0.0)));
  };
}

Report packet_property_report(const PacketDecomposition& dec, const FreqFunction& fn,
                              const PacketReportConfig& cfg) {
  const PacketGeometry& g = dec.geo;
  const auto& T = *dec.fft;
  const int N = g.N;
  Report rep;
  rep.name = "wavepacket";
  rep.columns = {"property", "t", "measured", "predicted", "ratio", "pass"};
  auto row = [&](const std::string& prop, double t, double meas, double bound, bool ok) {
    rep.add_row({prop, t, meas, bound, bound != 0 ? meas / bound : 0.0, ok ? 1.0 : 0.0});
    rep.check(prop, ok);
  };

  // Partitions of unity.
  double part_v = 0;
  for (std::size_t i = 0; i < T.size; ++i) {
    const int k0 = g.d == 1 ? int(i) : int(i / N), k1 = g.d == 1 ? 0 : int(i % N);
    const double a = g.xi(k0), b = g.d == 2 ? g.xi(k1) : g.u_lo;
    if (a < g.u_lo || a > g.u_hi || b < g.u_lo || b > g.u_hi) continue;
    double s = 0;
    for (const auto& v : dec.V) s += window(g.d, {g.Rp * (a - v[0]), g.d == 2 ? g.Rp * (b - v[1]) : 0.0});
    part_v = std::max(part_v, std::abs(s - 1.0));
  }
  double part_y = 0;
  {
    for (double v : T.eta_sum) part_y = std::max(part_y, std::abs(v - 1.0));
  }
  row("partition_psi", 0, part_v, 1e-10, part_v <= 1e-10);
  row("partition_eta", 0, part_y, 1e-10, part_y <= 1e-10);

  // Significant packets, strongest first.
  const double cmax = std::abs(*std::max_element(dec.coeff.begin(), dec.coeff.end(),
                                                 [](cplx a, cplx b) { return std::abs(a) < std::abs(b); }));
  std::vector<std::size_t> pool;
  for (std::size_t w = 0; w < dec.size(); ++w)
    if (cmax > 0 && std::abs(dec.coeff[w]) >= 1e-6 * cmax) pool.push_back(w);
  std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(dec.coeff[a]) > std::abs(dec.coeff[b]) || (std::abs(dec.coeff[a]) == std::abs(dec.coeff[b]) && a < b);
  });

  // (P2) leakage of the strongest packets.
  double leak = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(pool.size(), 8); ++i) leak = std::max(leak, dec.leakage(pool[i]));
  row("P2_leakage", 0, leak, 1e-8, leak <= 1e-8);

  // (P3) decay of the strongest packet outside twice its tube.
  std::vector<double> slopes;
  double p3_const = 0, single_norm = 0;
  if (!pool.empty()) {
    const std::size_t w = pool.front();
    const Tube tb = dec.tube(w);
    for (double t : {0.0, 0.5 * g.L, g.L}) {
      const auto p = dec.p_field(w, t);
      single_norm = std::max(single_norm, dec.grid_norm(p));
      double pmax = 0;
      for (const auto& v : p) pmax = std::max(pmax, std::abs(v));
      const double rho_max = 1.0 + (0.5 * g.P - g.Rp) / g.Rp;
      const int bins = 24;
      std::vector<double> env(bins, 0.0);
      for (std::size_t i = 0; i < T.size; ++i) {
        const int k0 = g.d == 1 ? int(i) : int(i / N), k1 = g.d == 1 ? 0 : int(i % N);
        double o0 = g.x(k0) - tb.y[0] + t * tb.grad[0];
        double o1 = g.d == 2 ? g.x(k1) - tb.y[1] + t * tb.grad[1] : 0.0;
        o0 -= g.P * std::round(o0 / g.P);
        o1 -= g.P * std::round(o1 / g.P);
        const double rho = 1.0 + std::hypot(o0, o1) / g.Rp;
        const double a = std::abs(p[i]);
        p3_const = std::max(p3_const, a * std::pow(g.Rp, 0.5 * g.d) * std::pow(rho, cfg.decay_N));
        if (rho < 3.0 || rho > rho_max) continue;
        const int b = std::min(bins - 1, int(bins * std::log(rho / 3.0) / std::log(rho_max / 3.0)));
        env[std::size_t(b)] = std::max(env[std::size_t(b)], a);
      }
      std::vector<double> xs, ys;
      for (int b = 0; b < bins; ++b)
        if (env[std::size_t(b)] > 1e-12 * pmax) {
          xs.push_back(3.0 * std::pow(rho_max / 3.0, (b + 0.5) / bins));
          ys.push_back(env[std::size_t(b)]);
        }
      const double slope = xs.size() >= 3 ? fit_loglog(xs, ys).slope : -INFINITY;
      slopes.push_back(slope);
      row("P3_decay_slope", t, slope, -double(cfg.decay_N), slope <= -double(cfg.decay_N));
    }
  }
  row("P3_single_norm", 0, single_norm, cfg.p4_C, single_norm <= cfg.p4_C);
  rep.summary["P3_constant"] = p3_const;

  // (P4) random subsets at several times.
  std::uint64_t st = sub_seed(cfg.seed, 4);
  nlohmann::ordered_json p4 = nlohmann::ordered_json::array();
  for (int k = 0; k < cfg.p4_subsets && !pool.empty(); ++k) {
    const std::size_t size = 1 + std::size_t(uniform01(st) * double(std::min<std::size_t>(pool.size(), 64)));
    std::vector<std::size_t> W;
    std::vector<char> used(pool.size(), 0);
    while (W.size() < std::min(size, pool.size())) {
      const std::size_t i = std::min(pool.size() - 1, std::size_t(uniform01(st) * double(pool.size())));
      if (used[i]) continue;
      used[i] = 1;
      W.push_back(pool[i]);
    }
    const auto spec = dec.subset_spectrum(W);
    for (int it = 0; it < cfg.p4_times; ++it) {
      const double t = cfg.p4_times == 1 ? 0.0 : g.L * (-1.0 + 2.0 * it / (cfg.p4_times - 1));
      const double ratio = dec.grid_norm(dec.evolve(spec, t)) / std::sqrt(double(W.size()));
      p4.push_back(ratio);
      row("P4_ratio", t, ratio, cfg.p4_C, ratio <= cfg.p4_C);
    }
  }

  // Reconstruction on the slab and the independent quadrature oracle.
  const std::vector<double> times{-g.L, -0.5 * g.L, 0.0, 0.5 * g.L, g.L};
  const auto rec = dec.reconstruct(times);
  double rec_err = 0, oracle_err = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto dir = dec.direct(times[k]);
    double num = 0, den = 0, mx = 0;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      num += std::norm(rec[k][i] - dir[i]);
      den += std::norm(dir[i]);
      if (std::abs(dir[i]) > mx) mx = std::abs(dir[i]), imax = i;
    }
    const double e = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    rec_err = std::max(rec_err, e);
    row("reconstruction", times[k], e, cfg.recon_tol, e <= cfg.recon_tol);
    if (cfg.oracle && g.d == 1 && mx > 0) {
      OscOptions opt;
      opt.tol = 1e-12;
      double worst = 0;
      for (long off : {0L, 3L, -7L, 19L, -41L}) {
        const std::size_t i = std::size_t((long(imax) + off * g.s / 4 + N) % N);
        const double x = g.x(int(i));
        OscPhase1D ph{x, times[k], dec.psi, g.u_lo, g.u_hi};
        Amplitude amp{[&fn](double xi) { return fn(xi, 0.0); }};
        const cplx ref = osc_integral_1d(ph, amp, opt).value;
        worst = std::max(worst, std::abs(rec[k][i] - ref) / mx);
      }
      oracle_err = std::max(oracle_err, worst);
      row("oracle", times[k], worst, cfg.recon_tol, worst <= cfg.recon_tol);
    }
  }

  const double fn2 = dec.f_norm();
  const double p5 = fn2 > 0 ? dec.coeff_norm() / fn2 : 0.0;
  rep.summary["R"] = g.R;
  rep.summary["Rp"] = g.Rp;
  rep.summary["L"] = g.L;
  rep.summary["packets"] = dec.size();
  rep.summary["reconstruction_err"] = rec_err;
  rep.summary["oracle_err"] = oracle_err;
  rep.summary["p5_ratio"] = p5;
  rep.summary["decay_slope"] = slopes.empty() ? 0.0 : *std::max_element(slopes.begin(), slopes.end());
  rep.summary["p4_ratios"] = p4;
  rep.summary["leakage"] = leak;
  return rep;
}

Report tube_separation_check(const TubeSeparationConfig& cfg) {
  const ModelSurface& s = cfg.surface;
  const Patch& U = cfg.patch;
  const double Rp = cfg.Rp;
  for (int j : cfg.j_norms)
    if (j < 10) throw InvalidArgument("tube separation needs |j| >= 10");
  if (Rp < 1) throw InvalidArgument("R' must be >= 1");
  // kappa_i = max of d_i^2 phi over the patch.
  double k1 = 0, k2 = 0;
  for (int i = 0; i <= 64; ++i) {
    k1 = std::max(k1, s.profile(0).d2(U.lo(0) + U.d[0] * i / 64.0));
    k2 = std::max(k2, s.profile(1).d2(U.lo(1) + U.d[1] * i / 64.0));
  }
  const double kappa = std::max(k1, k2);
  const Vec2 dir{std::cos(cfg.theta), std::sin(cfg.theta)};
  if (std::abs(dir[0]) < 0.2 || std::abs(dir[1]) < 0.2)
    throw InvalidArgument("test curve needs both velocity components comparable to 1");
  auto inside = [&](const Vec2& v) {
    return v[0] >= U.lo(0) && v[0] <= U.hi(0) && v[1] >= U.lo(1) && v[1] <= U.hi(1);
  };
  auto snap = [&](const Vec2& v) { return Vec2{std::round(v[0] * Rp) / Rp, std::round(v[1] * Rp) / Rp}; };

  Report rep;
  rep.name = "tube_separation";
  rep.columns = {"v1_1", "v1_2", "j1", "j2", "j_norm", "measured", "predicted", "ratio", "pass"};
  double lo = INFINITY, hi = 0;
  bool ok = true;
  for (int jn : cfg.j_norms) {
    const double len = jn / Rp;
    // Start points spread along the part of the line that leaves room for the step.
    const Vec2 c0{U.lo(0), U.lo(1)};
    const double span = std::min(U.d[0] / std::abs(dir[0]), U.d[1] / std::abs(dir[1]));
    if (len * 1.05 >= span) throw InvalidArgument("|j|/R' does not fit in the patch along the curve");
    for (int k = 0; k < cfg.starts; ++k) {
      const double t1 = (span - len) * (k + 0.5) / cfg.starts;
      const Vec2 v1 = snap({c0[0] + t1 * dir[0], c0[1] + t1 * dir[1]});
      const Vec2 v2 = snap({v1[0] + len * dir[0], v1[1] + len * dir[1]});
      if (!inside(v1) || !inside(v2)) continue;
      const double j1 = std::round((v2[0] - v1[0]) * Rp), j2 = std::round((v2[1] - v1[1]) * Rp);
      const double jnorm = std::hypot(j1, j2);
      const auto g1 = s.grad(v1[0], v1[1]), g2 = s.grad(v2[0], v2[1]);
      const double diff = std::hypot(g1[0] - g2[0], g1[1] - g2[1]);
      const double pred = jnorm * kappa / Rp;
      const double ratio = diff / pred;
      const bool in = cfg.band.contains(ratio);
      ok = ok && in;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      rep.add_row({v1[0], v1[1], j1, j2, jnorm, diff, pred, ratio, in ? 1.0 : 0.0});
    }
  }
  rep.summary["kappa"] = kappa;
  rep.summary["ratio_min"] = lo;
  rep.summary["ratio_max"] = hi;
  rep.check("ratios_in_band", ok && !rep.rows.empty());
  return rep;
}

}  // namespace restrlab

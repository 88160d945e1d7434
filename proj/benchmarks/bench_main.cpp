#include <benchmark/benchmark.h>

#include "restrlab/faadibruno.hpp"
#include "restrlab/numerics.hpp"
#include "restrlab/oscillatory.hpp"
#include "restrlab/scaling.hpp"
#include "restrlab/summation.hpp"
#include "restrlab/wavepacket.hpp"

using namespace restrlab;

namespace {

void BM_OscIntegral1D(benchmark::State& st) {
  const double lam = std::pow(10.0, static_cast<double>(st.range(0)));
  OscPhase1D ph{std::pow(lam, 0.25), lam, Profile::make(4), 0, 1};
  const Amplitude amp{{}, 0.5, 0.5};
  for (auto _ : st) benchmark::DoNotOptimize(osc_integral_1d(ph, amp).value);
}
BENCHMARK(BM_OscIntegral1D)->DenseRange(3, 6);

void BM_AbstractSum(benchmark::State& st) {
  SumSpec s = default_sum_sets()[static_cast<std::size_t>(st.range(0))];
  s.a = 1e-2;
  s.b = 3.0;
  for (auto _ : st) benchmark::DoNotOptimize(abstract_sum(s).ratio);
}
BENCHMARK(BM_AbstractSum)->DenseRange(0, 2);

void BM_BilinearNorm(benchmark::State& st) {
  set_default_threads(1);
  const auto s = ModelSurface::power(2, 2);
  const auto w = whitney_pairs(s, 1).front();
  const auto c = cuboid_Q1(s, w.pair, 4);
  std::array<AxisData, 2> ax;
  for (int i = 0; i < 2; ++i) {
    ax[i].psi = [p = s.profile(i)](double t) { return p.value(t); };
    ax[i].lo = {w.pair.S.lo(i), w.pair.St.lo(i)};
    ax[i].hi = {w.pair.S.hi(i), w.pair.St.hi(i)};
    ax[i].w = {[](double t) { return cplx(1 + t); }, [](double t) { return cplx(std::cos(3 * t)); }};
  }
  const ShearedBox box{c.g, {c.half[0], c.half[1]}, c.half[2]};
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(bilinear_norm(ax, box, 1.8, {n, n, 16}));
}
BENCHMARK(BM_BilinearNorm)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FaaDerivative(benchmark::State& st) {
  const int k = static_cast<int>(st.range(0));
  const MultiIndex alpha{k / 2 + k % 2, k / 2};
  std::function<double(const MultiIndex&)> outer = [](const MultiIndex& b) { return 1.0 + b[0] - 0.5 * b[1]; };
  std::function<double(int, const MultiIndex&)> inner = [](int j, const MultiIndex& g) {
    return 0.3 * (j + 1) + g[0] - g[1];
  };
  for (auto _ : st) benchmark::DoNotOptimize(faa_derivative<double>(alpha, 2, outer, inner));
}
BENCHMARK(BM_FaaDerivative)->DenseRange(2, 6, 2);

void BM_Decompose(benchmark::State& st) {
  set_default_threads(1);
  PacketParams p;
  p.d = 1;
  p.R = static_cast<double>(st.range(0));
  const auto f = random_bump_function(p, 1);
  for (auto _ : st) benchmark::DoNotOptimize(decompose(f, p).coeff_norm());
}
BENCHMARK(BM_Decompose)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

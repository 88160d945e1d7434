#include "restrlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "restrlab/errors.hpp"
#include "restrlab/exponents.hpp"
#include "restrlab/numerics.hpp"
#include "restrlab/runner.hpp"
#include "restrlab/summation.hpp"

namespace restrlab {

namespace {

// Tolerances and budgets, one place for all fifteen criteria.
constexpr double kLowerBoundSpreadII = 2.0;
constexpr double kLowerBoundSpreadI = 4.0;
constexpr double kDecayC = 20.0;
constexpr double kPacketRecon = 1e-6;
constexpr double kPacketSlope = -4.0;
constexpr double kPacketCVariation = 0.25;
constexpr double kJHalfTol = 1e-6;
constexpr double kKnappSlack = 0.1;

using json = nlohmann::json;

Report run(const std::string& name, json params = json::object(), std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.experiment = name;
  c.params = std::move(params);
  c.seed = seed;
  return run_experiment(c);
}

std::string num(double x) { return format_number(x); }

struct Outcome {
  bool ok = false;
  std::string detail;
};

Outcome ac1() {
  const auto e = exponent_data(2, 2);
  bool ok = e.exact && e.exact->inv_s0 == Rational(1, 3) && e.exact->inv_p0 == Rational(1, 3);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> k(9, 48);  // m = k/4 in (2, 12]
  int above = 0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = k(rng) / 4.0, m2 = k(rng) / 4.0;
    const auto d = exponent_data(m1, m2);
    if (d.exact && d.exact->inv_p0 > d.exact->inv_s0 && critical_point_consistent(m1, m2)) ++above;
  }
  ok = ok && above == 200;
  return {ok, "(2,2): 1/s0 = 1/p0 = 1/3 exactly; m > 2: 1/p0 > 1/s0 strictly in " + std::to_string(above) +
                  "/200 exact draws"};
}

Outcome ac2() {
  const bool probes = region_classify(3, 2) == Figure::Fig2 && region_classify(6, 2) == Figure::Fig4 &&
                      region_classify(8, 4) == Figure::Fig5;
  const auto e7 = exponent_data(7, 2);
  const bool p1_exact = e7.exact && e7.exact->p1 == Rational(10, 3);
  bool below = true;
  for (double M = 2; M < 7; M += 0.25) below = below && exponent_data(M, 2).p1 < 10.0 / 3.0;
  return {probes && p1_exact && below, std::string("(3,2)->") + to_string(region_classify(3, 2)) + ", (6,2)->" +
                                           to_string(region_classify(6, 2)) + ", (8,4)->" +
                                           to_string(region_classify(8, 4)) + ", p1(7) = 10/3 exact: " +
                                           (p1_exact ? "yes" : "no")};
}

Outcome ac3() {
  double worst = 0;
  for (double m : {2.0, 3.0, 4.0})
    for (double a : {0.0, 0.5})
      for (double b : {0.0, 0.5}) {
        const Report r = run("lowerbound", {{"mode", "ii"}, {"m", m}, {"alpha", a}, {"beta", b}, {"spread", kLowerBoundSpreadII}});
        worst = std::max(worst, r.summary["spread"].get<double>());
      }
  return {worst <= kLowerBoundSpreadII, "max spread " + num(worst) + " over 12 cases (limit 2)"};
}

Outcome ac4() {
  double worst = 0;
  for (double m : {2.0, 4.0}) {
    const Report r = run("lowerbound", {{"mode", "i"}, {"m", m}, {"spread", kLowerBoundSpreadI}});
    worst = std::max(worst, r.summary["spread"].get<double>());
  }
  return {worst <= kLowerBoundSpreadI, "max spread " + num(worst) + " on the 5x5 grids (limit 4)"};
}

Outcome ac5() {
  double sup = 0;
  for (int j : {2, 3, 4})
    for (double m1 : {2.0, 4.0})
      for (double m2 : {2.0, 4.0}) {
        const Report r = run("decay", {{"m1", m1}, {"m2", m2}, {"j", j}, {"samples", 1000}, {"C", kDecayC}},
                             sub_seed(5, static_cast<std::uint64_t>(100 * j + 10 * m1 + m2)));
        sup = std::max(sup, r.summary["sup_ratio"].get<double>());
      }
  return {sup <= kDecayC, "sup ratio " + num(sup) + " over 12 cases x 1000 samples (C = 20)"};
}

Outcome ac6() {
  bool ok = true;
  double recon = 0, slope = -INFINITY, cmin = INFINITY, cmax = 0;
  for (double R : {8.0, 16.0, 32.0}) {
    const Report r = run("wavepacket", {{"d", 1}, {"R", R}, {"functions", 5}}, 6);
    ok = ok && r.pass;
    recon = std::max(recon, r.summary["reconstruction_err"].get<double>());
    slope = std::max(slope, r.summary["decay_slope"].get<double>());
    const double C = std::max(r.summary["p5_ratio"].get<double>(), r.summary["p5_range"][1].get<double>());
    cmin = std::min(cmin, C);
    cmax = std::max(cmax, C);
  }
  const double variation = cmax / cmin - 1;
  ok = ok && recon <= kPacketRecon && slope <= kPacketSlope && variation <= kPacketCVariation;
  return {ok, "reconstruction " + num(recon) + ", worst slope " + num(slope) + ", ||c||/||f|| bound in [" + num(cmin) +
                  ", " + num(cmax) + "] (variation " + num(100 * variation) + "%)"};
}

Outcome ac7() {
  const Report a = run("tubes", {{"m", 2.0}});
  const Report b = run("tubes", {{"m", 4.0}});
  auto range = [](const Report& r) {
    return "[" + num(r.summary["ratio_min"].get<double>()) + ", " + num(r.summary["ratio_max"].get<double>()) + "]";
  };
  return {a.pass && b.pass, "separation ratios: paraboloid " + range(a) + ", m=4 " + range(b)};
}

Outcome ac8() {
  const Report r = run("rescale", json::object(), 8);
  return {r.pass, "identity error " + num(r.summary["identity_max_err"].get<double>()) + ", separation ratios " +
                      r.summary["separation_range"].dump()};
}

Outcome ac9() {
  const Report r = run("sums", {{"lemma", "5.2"}});
  std::ostringstream os;
  for (int i = 0; i < 3; ++i) {
    const auto& s = r.summary["set" + std::to_string(i)];
    os << (i ? "; " : "") << "set" << i << " ratio/log " << num(s["max_ratio_over_log"].get<double>()) << " <= "
       << num(s["cap"].get<double>()) << ", min ratio " << num(s["min_ratio"].get<double>());
  }
  return {r.pass, os.str()};
}

Outcome ac10() {
  const double half = J_numeric(-1, -1, 0);
  const Report r = run("sums", {{"lemma", "J"}});
  const bool ok = std::abs(half - 0.5) <= kJHalfTol && r.pass;
  return {ok, "J(-1,-1,0) = " + num(half) + "; max ratio " + num(r.summary["max_ratio"].get<double>()) + " <= cap " +
                  num(r.summary["cap"].get<double>())};
}

Outcome ac11() {
  const Report r = run("lemma63", {{"draws", 1000}}, 11);
  std::size_t bad = 0;
  for (const auto& row : r.rows)
    if (std::get<std::string>(row.back()) != "true") ++bad;
  return {r.pass, std::to_string(r.rows.size() - bad) + "/" + std::to_string(r.rows.size()) +
                      " draws with J nonempty, all inequalities and a nonempty q-window"};
}

Outcome ac12() {
  const Report r = run("knapp", {{"p", 4.0}, {"s", 2.0}});
  const double fit = r.summary["fitted_exponent"].get<double>();
  const double pred = r.summary["predicted_exponent"].get<double>();
  return {r.pass && fit >= pred - kKnappSlack, "fitted " + num(fit) + " vs (1/p-1/s)_+ = " + num(pred)};
}

Outcome ac13() {
  const Report r = run("faa");
  return {r.pass, std::to_string(r.summary["exact_cases"].get<int>()) + " exact polynomial cases, FD max rel err " +
                      num(r.summary["fd_max_rel_err"].get<double>())};
}

Outcome ac14() {
  const Report r = run("bilinear");
  return {r.pass, "max ratio " + num(r.summary["max_ratio"].get<double>()) + ", exponent " +
                      num(r.summary["measured_exponent"].get<double>()) + " vs bound " +
                      num(r.summary["bound_exponent"].get<double>())};
}

Outcome ac15() {
  const Report r = run("sums", {{"lemma", "balance"}, {"n", 100}}, 15);
  return {r.pass, std::to_string(r.rows.size()) + " random (p1, p, p2, h) cancel to exponent p exactly"};
}

struct Criterion {
  int id;
  const char* title;
  double budget;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "exponent geometry", 1, ac1},
    {2, "region casework", 1, ac2},
    {3, "oscillatory lower bound (ii)", 30, ac3},
    {4, "oscillatory lower bound (i)", 60, ac4},
    {5, "Fourier decay", 120, ac5},
    {6, "wave packets", 120, ac6},
    {7, "tube separation", 30, ac7},
    {8, "anisotropic scaling", 60, ac8},
    {9, "dyadic double sums", 60, ac9},
    {10, "J integral", 30, ac10},
    {11, "r-selection sweep", 5, ac11},
    {12, "Knapp lower bound", 120, ac12},
    {13, "Faa di Bruno", 30, ac13},
    {14, "bilinear sanity", 300, ac14},
    {15, "balance exponent", 1, ac15},
};

}  // namespace

std::string format_line(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d %-30s [%.2f s / %g s] ", r.pass() ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds, r.budget);
  std::string line = head + r.detail;
  if (r.ok && !r.pass()) line += " (over runtime budget)";
  return line;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& only,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (const auto& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    CriterionResult r;
    r.id = c.id;
    r.title = c.title;
    r.budget = c.budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = c.fn();
      r.ok = o.ok;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace restrlab

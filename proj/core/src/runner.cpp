#include "restrlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "restrlab/errors.hpp"
#include "restrlab/exponents.hpp"
#include "restrlab/faadibruno.hpp"
#include "restrlab/oscillatory.hpp"
#include "restrlab/scaling.hpp"
#include "restrlab/summation.hpp"
#include "restrlab/wavepacket.hpp"

namespace restrlab {

nlohmann::json ExperimentConfig::to_json() const {
  return {{"experiment", experiment}, {"seed", seed}, {"params", params}};
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "experiment" && key != "seed" && key != "params") throw ConfigInvalid("unknown top-level key '" + key + "'");
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("params")) c.params = j.at("params");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(e.what());
  }
  if (!c.params.is_object()) throw ConfigInvalid("params must be an object");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read " + path);
  try {
    return parse_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigInvalid(path + ": " + e.what());
  }
}

namespace {

// Typed access to the params object; every key read is recorded so that
// leftovers can be reported as unknown.
class Params {
 public:
  Params(const std::string& experiment, const nlohmann::json& j) : exp_(experiment), j_(j) {}

  template <class T>
  T get(const std::string& key, const T& def) {
    used_.insert(key);
    if (!j_.contains(key)) return def;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigInvalid(exp_ + ": parameter '" + key + "' has the wrong type");
    }
  }

  double positive(const std::string& key, double def) {
    const double v = get<double>(key, def);
    if (!(v > 0)) throw ConfigInvalid(exp_ + ": parameter '" + key + "' must be positive");
    return v;
  }

  int count(const std::string& key, int def) {
    const int v = get<int>(key, def);
    if (v < 1) throw ConfigInvalid(exp_ + ": parameter '" + key + "' must be >= 1");
    return v;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!used_.count(key)) throw ConfigInvalid(exp_ + ": unknown parameter '" + key + "'");
  }

 private:
  std::string exp_;
  const nlohmann::json& j_;
  std::set<std::string> used_;
};

// The decay and cuboid experiments use the pair [d, 2d]^2, [3d, 4d]^2 with d = 2^-j.
PatchPair diagonal_pair(const ModelSurface& s, int j) {
  const double d = std::exp2(-j);
  return pair_quantities(make_patch(s, {d, d}, {d, d}), make_patch(s, {3 * d, 3 * d}, {d, d}));
}

Report run_region(Params& P, std::uint64_t) {
  const double m1 = P.get("m1", 2.0), m2 = P.get("m2", 2.0);
  const int points = P.count("points", 1000);
  P.finish();
  return region_report(m1, m2, points);
}

Report run_decay(Params& P, std::uint64_t seed) {
  const ModelSurface s = ModelSurface::power(P.get("m1", 2.0), P.get("m2", 2.0));
  const int j = P.count("j", 3);
  const auto n = static_cast<std::size_t>(P.count("samples", 1000));
  DecayConfig dc;
  dc.C = P.positive("C", 20.0);
  dc.tol = P.positive("tol", 1e-9);
  const double y_max = P.positive("y_max", 1e4);
  P.finish();
  const PatchPair pair = diagonal_pair(s, j);
  auto rep = fourier_decay_check(s, pair, decay_samples(make_decay_frame(s, pair), n, seed, y_max), dc);
  rep.summary["j"] = j;
  return rep;
}

Report run_lowerbound(Params& P, std::uint64_t) {
  const std::string mode = P.get<std::string>("mode", "ii");
  const double m = P.get("m", 2.0);
  LowerBoundConfig c = mode == "i" ? lowerbound_default_grid(m) : LowerBoundConfig{};
  c.mode = mode;
  c.m = m;
  if (mode == "ii") c.lambda = {1e3, 1e4, 1e5, 1e6};
  c.delta = P.positive("delta", c.delta);
  c.alpha = P.get("alpha", c.alpha);
  c.beta = P.get("beta", c.beta);
  c.mu = P.get("mu", c.mu);
  c.lambda = P.get("lambda", c.lambda);
  c.spread = P.positive("spread", c.spread);
  c.tol = P.positive("tol", c.tol);
  P.finish();
  if (mode != "i" && mode != "ii") throw ConfigInvalid("lowerbound: mode must be \"i\" or \"ii\"");
  return lowerbound_check(c);
}

NecessaryConfig necessary_params(Params& P, const std::string& kind) {
  NecessaryConfig c = necessary_defaults(kind);
  c.m1 = P.get("m1", c.m1);
  c.m2 = P.get("m2", c.m2);
  c.p = P.positive("p", c.p);
  c.s = P.positive("s", c.s);
  c.beta = P.get("beta", c.beta);
  c.log2_lo = P.get("log2_lo", c.log2_lo);
  c.log2_hi = P.get("log2_hi", c.log2_hi);
  c.T = P.get("T", c.T);
  c.nodes = P.count("nodes", c.nodes);
  c.fit_residual_cap = P.positive("fit_residual_cap", c.fit_residual_cap);
  c.tol = P.positive("tol", c.tol);
  P.finish();
  return c;
}

Report run_necessary(Params& P, std::uint64_t) {
  const std::string kind = P.get<std::string>("kind", "p_gt_h1");
  static const std::set<std::string> kinds{"p_gt_h1", "secondnec", "critline_strongtype", "knapp_PT"};
  if (!kinds.count(kind)) throw ConfigInvalid("necessary: unknown kind '" + kind + "'");
  return necessary_experiment(necessary_params(P, kind));
}

Report run_knapp(Params& P, std::uint64_t) { return necessary_experiment(necessary_params(P, "knapp_PT")); }

Report run_wavepacket(Params& P, std::uint64_t seed) {
  PacketParams pp;
  pp.d = P.get("d", 1);
  pp.R = P.positive("R", 16.0);
  pp.m = P.get("m", 2.0);
  pp.u_lo = P.get("u_lo", pp.d == 2 ? 0.4 : 0.25);
  pp.u_hi = P.get("u_hi", pp.d == 2 ? 0.6 : 0.75);
  pp.D = P.get("D", 0.0);
  pp.samples_per_Rp = P.get("samples_per_Rp", 0);
  pp.lattice_per_axis = P.get("lattice_per_axis", 0);
  PacketReportConfig rc;
  rc.decay_N = P.count("decay_N", rc.decay_N);
  rc.p4_C = P.positive("p4_C", rc.p4_C);
  rc.recon_tol = P.positive("recon_tol", rc.recon_tol);
  rc.oracle = P.get("oracle", rc.oracle);
  rc.seed = seed;
  const int functions = P.count("functions", 5);
  P.finish();
  if (pp.d != 1 && pp.d != 2) throw ConfigInvalid("wavepacket: d must be 1 or 2");
  const FreqFunction f = random_bump_function(pp, sub_seed(seed, 0));
  Report rep = packet_property_report(decompose(f, pp), f, rc);
  // (P5): coefficient-to-function norm ratio over further random functions.
  double lo = INFINITY, hi = 0;
  for (int k = 1; k <= functions; ++k) {
    const auto dec = decompose(random_bump_function(pp, sub_seed(seed, static_cast<std::uint64_t>(k))), pp);
    const double r = dec.coeff_norm() / dec.f_norm();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  rep.summary["p5_range"] = {lo, hi};
  return rep;
}

Report run_tubes(Params& P, std::uint64_t) {
  TubeSeparationConfig c;
  const double m = P.get("m", 2.0);
  c.surface = ModelSurface::power(m, m);
  const double r = P.positive("r", 0.5), d = P.positive("width", 0.4);
  c.patch = make_patch(c.surface, {r, r}, {d, d});
  c.Rp = P.positive("Rp", c.Rp);
  c.theta = P.get("theta", c.theta);
  c.j_norms = P.get("j_norms", c.j_norms);
  c.starts = P.count("starts", c.starts);
  P.finish();
  return tube_separation_check(c);
}

Report run_rescale(Params& P, std::uint64_t seed) {
  const int pairs = P.count("pairs", 1000);
  const double m_lo = P.get("m_lo", 2.0), m_hi = P.get("m_hi", 6.0);
  const auto whitney_m = P.get<std::vector<double>>("whitney_m", {2.0, 4.0});
  const int depth = P.get("depth", 3), C = P.count("C", 3), k_max = P.count("k_max", 6);
  const double identity_tol = P.positive("identity_tol", 1e-12);
  const int samples = P.count("samples", 25);
  P.finish();
  if (!(m_lo >= 2 && m_hi >= m_lo)) throw ConfigInvalid("rescale: need 2 <= m_lo <= m_hi");
  RescaleCheckConfig rc;
  rc.samples = samples;
  Report rep;
  rep.name = "rescale";
  rep.columns = {"source", "m", "pairs", "identity_err", "sep_lo", "sep_hi", "pass"};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(m_lo, m_hi);
  double id_err = 0;
  bool random_ok = true;
  for (int k = 0; k < pairs; ++k) {
    const ModelSurface s = ModelSurface::power(U(rng), U(rng));
    const ScalingMap map = rescale_pair(s, random_admissible_pair(s, rng));
    for (int i = 0; i < 2; ++i) id_err = std::max(id_err, std::abs(map.rescaled.kbar[i] * map.rescaled.dbar[i] - 1));
    random_ok = random_ok && verify_rescaled(map, rc).pass;
  }
  rep.add_row({std::string("random"), NAN, double(pairs), id_err, NAN, NAN,
               std::string(random_ok && id_err <= identity_tol ? "true" : "false")});

  double sep_lo = INFINITY, sep_hi = 0;
  bool whitney_ok = true;
  for (double m : whitney_m) {
    const ModelSurface s = ModelSurface::power(m, m);
    std::size_t n = 0;
    double lo = INFINITY, hi = 0;
    bool ok = true;
    for (int dpt = 1; dpt <= depth; ++dpt)
      for (const auto& wp : whitney_pairs(s, dpt, C, {2.0, Band{0.25, 4.0}}))
        for (const auto& sp : subdivide_pair(s, wp.pair, k_max)) {
          const Report r = verify_rescaled(rescale_pair(s, sp.pair), rc);
          ok = ok && r.pass;
          ++n;
          for (const char* key : {"iii_axis1", "iii_axis2"}) {
            lo = std::min(lo, r.summary[key][0].get<double>());
            hi = std::max(hi, r.summary[key][1].get<double>());
          }
        }
    rep.add_row({std::string("whitney"), m, double(n), NAN, lo, hi, std::string(ok ? "true" : "false")});
    whitney_ok = whitney_ok && ok;
    sep_lo = std::min(sep_lo, lo);
    sep_hi = std::max(sep_hi, hi);
  }
  rep.summary["identity_max_err"] = id_err;
  rep.summary["separation_range"] = {sep_lo, sep_hi};
  rep.check("identity", id_err <= identity_tol);
  rep.check("random_pairs_assumptions", random_ok);
  rep.check("whitney_assumptions", whitney_ok);
  rep.check("separation_in_band", sep_lo >= rc.separation.lo && sep_hi <= rc.separation.hi);
  return rep;
}

Report run_cuboid(Params& P, std::uint64_t seed) {
  const ModelSurface s = ModelSurface::power(P.get("m1", 2.0), P.get("m2", 2.0));
  const int j = P.count("j", 2);
  const double R = P.positive("R", 8.0);
  const auto n = static_cast<std::size_t>(P.count("samples", 1000));
  P.finish();
  return cuboid_containment_check(s, diagonal_pair(s, j), R, n, seed);
}

Report run_reparam(Params& P, std::uint64_t) {
  ReparamConfig c;
  c.surface = ModelSurface::power(P.get("m1", 2.0), P.get("m2", 2.0));
  const auto r = P.get<std::array<double, 2>>("r", {0.1, 0.1});
  const auto d = P.get<std::array<double, 2>>("d", {0.2, 0.2});
  c.patch = make_patch(c.surface, r, d);
  c.n2 = P.get<std::array<double, 3>>("n2", {1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0)});
  c.a_min = P.positive("a_min", c.a_min);
  c.grid = P.count("grid", c.grid);
  c.spot_points = P.count("spot_points", c.spot_points);
  c.fd_rtol = P.positive("fd_rtol", c.fd_rtol);
  c.C_adm = P.positive("C_adm", c.C_adm);
  P.finish();
  return reparametrize_graph(c).report;
}

Report run_bilinear(Params& P, std::uint64_t seed) {
  BilinearConfig c;
  const double m = P.get("m", 2.0);
  c.surface = ModelSurface::power(m, m);
  c.depths = P.get("depths", c.depths);
  c.p = P.positive("p", c.p);
  c.R = P.positive("R", c.R);
  c.trials = P.count("trials", c.trials);
  c.seed = seed;
  c.C_emp = P.positive("C_emp", c.C_emp);
  c.exponent_slack = P.positive("exponent_slack", c.exponent_slack);
  c.refine_tol = P.positive("refine_tol", c.refine_tol);
  c.eps = P.positive("eps", c.eps);
  c.grid.n_axis = P.count("n_axis", c.grid.n_axis);
  c.grid.n_vert = P.count("n_vert", c.grid.n_vert);
  c.grid.panel_nodes = P.count("panel_nodes", c.grid.panel_nodes);
  c.zero = P.get("zero", c.zero);
  P.finish();
  return bilinear_empirical(c);
}

Report run_sums(Params& P, std::uint64_t seed) {
  const std::string lemma = P.get<std::string>("lemma", "5.2");
  if (lemma == "5.2") {
    AbstractSumConfig c;
    c.log10_lo = P.get("log10_lo", c.log10_lo);
    c.log10_hi = P.get("log10_hi", c.log10_hi);
    c.points = P.count("points", c.points);
    c.C_n = P.get("C_n", c.C_n);
    c.omega_zero_record = P.get("omega_zero_record", c.omega_zero_record);
    if (P.get("sets", nlohmann::json()).is_array()) {
      for (const auto& js : P.get("sets", nlohmann::json())) {
        SumSpec s;
        try {
          s.mu = js.value("mu", s.mu);
          s.nu = js.value("nu", s.nu);
          s.omega = js.value("omega", s.omega);
          s.n = js.value("n", s.n);
          s.c1 = js.value("c1", s.c1);
          s.c2 = js.value("c2", s.c2);
          s.K_max = js.value("K_max", s.K_max);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigInvalid(std::string("sums: bad set: ") + e.what());
        }
        c.sets.push_back(s);
      }
    }
    P.finish();
    return abstract_sum_check(c);
  }
  if (lemma == "J") {
    JConfig c;
    c.a = P.get("a", c.a);
    c.b = P.get("b", c.b);
    c.l_lo = P.get("l_lo", c.l_lo);
    c.l_hi = P.get("l_hi", c.l_hi);
    c.C = P.get("C", c.C);
    c.rtol = P.positive("rtol", c.rtol);
    P.finish();
    return J_integral_check(c);
  }
  if (lemma == "reduction") {
    ReductionConfig c;
    c.m1 = P.get("m1", c.m1);
    c.m2 = P.get("m2", c.m2);
    c.p = P.positive("p", c.p);
    c.q = P.get("q", c.q);
    c.inv_r = P.get("inv_r", c.inv_r);
    c.eps = P.positive("eps", c.eps);
    c.tail_tol = P.positive("tail_tol", c.tail_tol);
    c.L_cap = P.count("L_cap", c.L_cap);
    c.C_int = P.get("C_int", c.C_int);
    c.C_double = P.get("C_double", c.C_double);
    c.doublesum_eps = P.positive("doublesum_eps", c.doublesum_eps);
    P.finish();
    return reduction_sums_check(c);
  }
  if (lemma == "balance") {
    const int n = P.count("n", 100);
    P.finish();
    return balance_check(static_cast<std::size_t>(n), seed);
  }
  throw ConfigInvalid("sums: lemma must be one of 5.2, J, reduction, balance");
}

// Random draws from the hypotheses of the r-selection lemma.
Report run_lemma63(Params& P, std::uint64_t seed) {
  const int draws = P.count("draws", 1000);
  const double m_hi = P.get("m_hi", 8.0);
  const double eps = P.positive("eps", 1e-3);
  P.finish();
  if (!(m_hi > 2)) throw ConfigInvalid("lemma63: m_hi must exceed 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> M(2.0, m_hi), U(0.0, 1.0);
  Report rep;
  rep.name = "lemma63";
  rep.columns = {"m1", "m2", "p", "q", "J_lo", "J_hi", "inv_r", "pass"};
  bool all = true, q_all = true;
  for (int i = 0; i < draws;) {
    const double m1 = M(rng), m2 = M(rng);
    const double h = m1 * m2 / (m1 + m2);
    const double lo = std::max({5.0 / 3.0, reduction_p0(m1, m2), (h + 1) / 2}), hi = h + 1;
    if (!(lo < hi) || std::min(m1, m2) <= 2) continue;
    const double p = lo + (hi - lo) * (0.01 + 0.98 * U(rng));
    ++i;
    bool ok = false, q_ok = false;
    double q = NAN;
    RChoice rc;
    try {
      q = choose_q(m1, m2, p).q;
      q_ok = true;
      rc = choose_r(m1, m2, p, eps);
      ok = rc.checks.all() && rc.J_lo < rc.J_hi;
    } catch (const Error&) {
    }
    all = all && ok;
    q_all = q_all && q_ok;
    rep.add_row({m1, m2, p, q, rc.J_lo, rc.J_hi, rc.inv_r, std::string(ok && q_ok ? "true" : "false")});
  }
  rep.check("J_nonempty_and_inequalities", all);
  rep.check("q_window_nonempty", q_all);
  return rep;
}

Report run_faa(Params& P, std::uint64_t seed) {
  FaaCheckConfig c;
  c.max_order = P.count("max_order", c.max_order);
  c.max_dim = P.count("max_dim", c.max_dim);
  c.trials = P.count("trials", c.trials);
  c.fd_rtol = P.positive("fd_rtol", c.fd_rtol);
  c.fd_h = P.positive("fd_h", c.fd_h);
  c.fd_points = P.count("fd_points", c.fd_points);
  c.seed = seed;
  P.finish();
  if (c.max_order > kMaxFaaOrder) throw ConfigInvalid("faa: max_order exceeds 6");
  return faa_check(c);
}

using Runner = std::function<Report(Params&, std::uint64_t)>;

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> r{
      {"region", run_region},   {"decay", run_decay},       {"lowerbound", run_lowerbound},
      {"necessary", run_necessary}, {"knapp", run_knapp},   {"wavepacket", run_wavepacket},
      {"tubes", run_tubes},     {"rescale", run_rescale},   {"cuboid", run_cuboid},
      {"reparam", run_reparam}, {"bilinear", run_bilinear}, {"sums", run_sums},
      {"lemma63", run_lemma63}, {"faa", run_faa},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

Report run_experiment(const ExperimentConfig& cfg) {
  const auto it = registry().find(cfg.experiment);
  if (it == registry().end()) throw ConfigInvalid("unknown experiment '" + cfg.experiment + "'");
  Params P(cfg.experiment, cfg.params);
  const auto t0 = std::chrono::steady_clock::now();
  Report rep = it->second(P, cfg.seed);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.config_hash = config_hash(cfg.to_json());
  return rep;
}

Report region_report(double m1, double m2, int points) {
  if (points < 2) throw InvalidArgument("region_report: points must be >= 2");
  const ExponentData e = exponent_data(m1, m2);
  const double M = e.mbar, h = e.h;
  const double y1 = 1 / std::max(10.0 / 3.0, h + 1);
  auto edge = [&](int id, double x) {
    switch (id) {
      case 1: return y1;
      case 2: return (1 - x) / (h + 1);
      default: return ((M + 2) / 2 - x) / (2 * M + 1);
    }
  };
  Report rep;
  rep.name = "region";
  rep.columns = {"inv_s", "inv_p", "edge_id", "on_boundary"};
  for (int id = 1; id <= 3; ++id)
    for (int k = 0; k < points; ++k) {
      const double x = static_cast<double>(k) / (points - 1);
      const double y = edge(id, x);
      if (y < 0 || y > 1) continue;
      const double lowest = std::min({edge(1, x), edge(2, x), edge(3, x)});
      const bool active = std::abs(y - lowest) <= 1e-15 && lowest >= 0;
      rep.add_row({x, y, double(id), active ? 1.0 : 0.0});
    }
  rep.summary["m1"] = m1;
  rep.summary["m2"] = m2;
  rep.summary["h"] = h;
  rep.summary["critical_point"] = {e.inv_s0, e.inv_p0};
  rep.summary["figure"] = to_string(region_classify(m1, m2));
  rep.check("lines_meet_at_critical_point", critical_point_consistent(m1, m2));
  return rep;
}

}  // namespace restrlab

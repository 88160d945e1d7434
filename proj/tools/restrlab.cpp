// restrlab: command-line front end for the experiments and the acceptance suite.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "restrlab/acceptance.hpp"
#include "restrlab/errors.hpp"
#include "restrlab/faadibruno.hpp"
#include "restrlab/numerics.hpp"
#include "restrlab/polynomial.hpp"
#include "restrlab/report.hpp"
#include "restrlab/runner.hpp"

using namespace restrlab;
using json = nlohmann::json;

namespace {

struct Common {
  std::string config, out, format = "csv";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool with_timing = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config: {\"seed\": ..., \"params\": {...}}")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output file (stdout when omitted)");
  app->add_option("--seed", c.seed, "64-bit seed (overrides the config)");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", c.threads, "worker threads (default: RESTRLAB_THREADS or hardware)");
  app->add_flag("--with-timing", c.with_timing, "include wall time in JSON output");
}

ExperimentConfig base_config(const std::string& experiment, const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  if (!cfg.experiment.empty() && cfg.experiment != experiment && experiment != "run")
    throw ConfigInvalid("config names experiment '" + cfg.experiment + "' but the subcommand is '" + experiment + "'");
  if (experiment != "run") cfg.experiment = experiment;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

int emit_report(const Report& r, const Common& c) {
  const Format f = c.format == "json" ? Format::Json : Format::Csv;
  if (c.out.empty()) {
    std::cout << (f == Format::Json ? to_json(r, c.with_timing).dump(2) + "\n" : to_csv(r));
  } else {
    emit(r, f, c.out, c.with_timing);
  }
  std::fprintf(stderr, "%s: %s  (config %s, %.2f s)\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
               r.config_hash.c_str(), r.wall_time);
  return r.pass ? 0 : 1;
}

std::vector<int> parse_index(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ConfigInvalid("--alpha expects comma-separated integers");
    }
    if (out.back() < 0) throw ConfigInvalid("--alpha entries must be non-negative");
  }
  if (out.empty()) throw ConfigInvalid("--alpha is empty");
  return out;
}

std::string rational_text(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

// Terms of the chain-rule expansion for alpha, optionally evaluated on a small
// polynomial pair and compared with the composed polynomial.
json faa_terms(const MultiIndex& alpha, int m, bool demo) {
  json terms = json::array();
  const auto gammas = sub_indices(alpha);
  for (const auto& a : all_assignments(alpha, m)) {
    json k = json::array();
    for (int j = 0; j < m; ++j)
      for (std::size_t g = 0; g < gammas.size(); ++g)
        if (a.k[j][g]) k.push_back({{"component", j + 1}, {"gamma", gammas[g]}, {"power", a.k[j][g]}});
    terms.push_back({{"beta", a.beta}, {"coefficient", rational_text(a.coefficient)}, {"factors", k}});
  }
  json out = {{"alpha", alpha}, {"m", m}, {"terms", terms}};
  if (demo) {
    const int n = static_cast<int>(alpha.size());
    // f(y) = (1 + y1 + ... + ym)^3, g_j(x) = sum_i (i + j + 1) x_i^2 + x_i.
    Polynomial base = Polynomial::constant(m, 1);
    for (int j = 0; j < m; ++j) base = base + Polynomial::variable(m, j);
    const Polynomial f = base.pow(3);
    std::vector<Polynomial> g;
    for (int j = 0; j < m; ++j) {
      Polynomial gj(n);
      for (int i = 0; i < n; ++i) {
        const Polynomial xi = Polynomial::variable(n, i);
        gj = gj + xi * xi * Polynomial::constant(n, Rational(i + j + 1)) + xi;
      }
      g.push_back(gj);
    }
    std::vector<Rational> x;
    for (int i = 0; i < n; ++i) x.push_back(Rational(i + 1, 2));
    std::vector<Rational> gx;
    for (const auto& gj : g) gx.push_back(gj.evaluate(x));
    const Rational val = faa_derivative<Rational>(
        alpha, m, [&](const MultiIndex& b) { return f.derivative(b).evaluate(gx); },
        [&](int j, const MultiIndex& gam) { return g[static_cast<std::size_t>(j)].derivative(gam).evaluate(x); });
    const Rational ref = f.compose(g).derivative(alpha).evaluate(x);
    std::vector<std::string> gs;
    for (const auto& gj : g) gs.push_back(gj.str());
    out["demo"] = {{"f", f.str()}, {"g", gs}, {"x", [&] {
                     std::vector<std::string> v;
                     for (const auto& xi : x) v.push_back(rational_text(xi));
                     return v;
                   }()},
                   {"formula", rational_text(val)}, {"symbolic", rational_text(ref)}, {"equal", val == ref}};
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restrlab: numerical checks for restriction estimates on finite-type surfaces"};
  app.require_subcommand(1);
  Common c;

  auto* region = app.add_subcommand("region", "boundary lines of the admissible (1/s, 1/p) region");
  std::optional<double> m1, m2;
  region->add_option("--m1", m1, "first finite-type order");
  region->add_option("--m2", m2, "second finite-type order");
  add_common(region, c);

  auto* decay = app.add_subcommand("decay", "Fourier decay of patch measures under the linear map T");
  add_common(decay, c);
  auto* lower = app.add_subcommand("lowerbound", "oscillatory-integral lower bounds");
  add_common(lower, c);
  auto* nec = app.add_subcommand("necessary", "necessary-condition constructions");
  std::optional<std::string> kind;
  nec->add_option("--kind", kind, "p_gt_h1 | secondnec | critline_strongtype | knapp_PT");
  add_common(nec, c);
  auto* knapp = app.add_subcommand("knapp", "lower bound from the P_T Knapp example");
  add_common(knapp, c);
  auto* wave = app.add_subcommand("wavepacket", "wave-packet decomposition properties");
  add_common(wave, c);
  auto* bil = app.add_subcommand("bilinear", "empirical bilinear norms against the dyadic-pair bound");
  add_common(bil, c);
  auto* sums = app.add_subcommand("sums", "numerical checks of the summation lemmas");
  std::optional<std::string> lemma;
  sums->add_option("--lemma", lemma, "5.2 | J | reduction | balance")
      ->check(CLI::IsMember({"5.2", "J", "reduction", "balance"}));
  add_common(sums, c);

  auto* faa = app.add_subcommand("faa", "chain-rule expansion and its verification");
  std::string alpha_text, demo;
  int faa_m = 1;
  faa->add_option("--alpha", alpha_text, "multi-index, e.g. 2,1: print the expansion instead of running checks");
  faa->add_option("--m", faa_m, "number of inner components")->check(CLI::Range(1, 3));
  faa->add_option("--demo", demo, "poly: also evaluate on a polynomial pair")->check(CLI::IsMember({"poly"}));
  add_common(faa, c);

  auto* run = app.add_subcommand("run", "run the experiment named in --config (any registered experiment)");
  add_common(run, c);

  auto* all = app.add_subcommand("all", "acceptance suite: one PASS/FAIL line per criterion");
  std::vector<int> only;
  all->add_option("--only", only, "criterion ids to run");
  std::string all_out, all_format = "csv";
  unsigned all_threads = 0;
  all->add_option("--out", all_out, "also write the results as a report");
  all->add_option("--format", all_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  all->add_option("--threads", all_threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (all->parsed()) {
      if (all_threads) set_default_threads(all_threads);
      Report rep;
      rep.name = "acceptance";
      rep.columns = {"id", "criterion", "pass", "seconds", "budget", "detail"};
      const auto results = run_acceptance(only, [](const CriterionResult& r) {
        std::cout << format_line(r) << std::endl;
      });
      bool ok = true;
      for (const auto& r : results) {
        ok = ok && r.pass();
        rep.add_row({double(r.id), r.title, std::string(r.pass() ? "PASS" : "FAIL"), r.seconds, r.budget, r.detail});
      }
      rep.pass = ok;
      if (!all_out.empty()) emit(rep, all_format == "json" ? Format::Json : Format::Csv, all_out, true);
      return ok ? 0 : 1;
    }

    if (faa->parsed() && !alpha_text.empty()) {
      const json out = faa_terms(parse_index(alpha_text), faa_m, demo == "poly");
      if (c.out.empty())
        std::cout << out.dump(2) << "\n";
      else
        write_atomic(c.out, out.dump(2) + "\n");
      return !out.contains("demo") || out["demo"]["equal"].get<bool>() ? 0 : 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (c.threads) set_default_threads(c.threads);
    ExperimentConfig cfg = base_config(sub->get_name(), c);
    if (sub == run && cfg.experiment.empty()) throw ConfigInvalid("run: the config must name an experiment");
    if (m1) cfg.params["m1"] = *m1;
    if (m2) cfg.params["m2"] = *m2;
    if (kind) cfg.params["kind"] = *kind;
    if (lemma) cfg.params["lemma"] = *lemma;
    return emit_report(run_experiment(cfg), c);
  } catch (const ConfigInvalid& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 1;
  }
}

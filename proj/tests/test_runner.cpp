#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "restrlab/errors.hpp"
#include "restrlab/numerics.hpp"
#include "restrlab/report.hpp"
#include "restrlab/runner.hpp"

using namespace restrlab;
using json = nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig cfg(const std::string& name, json params = json::object(), std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.experiment = name;
  c.params = std::move(params);
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Report, FormatNumberUsesTwelveDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(Report, EmptyReportIsHeaderOnly) {
  Report r;
  r.columns = {"a", "b"};
  EXPECT_EQ(to_csv(r), "a,b\n");
}

TEST(Report, OneRowIsTwoLines) {
  Report r;
  r.columns = {"x", "label"};
  r.add_row({0.5, std::string("ok")});
  EXPECT_EQ(to_csv(r), "x,label\n0.5,ok\n");
}

TEST(Report, FailingCheckClearsPass) {
  Report r;
  r.check("fine", true);
  EXPECT_TRUE(r.pass);
  r.check("broken", false);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.summary["checks"]["broken"].get<bool>());
}

TEST(Report, JsonRoundTrip) {
  Report r;
  r.name = "demo";
  r.config_hash = config_hash(json{{"x", 1}});
  r.columns = {"v", "s"};
  r.add_row({1.0 / 7.0, std::string("a,b")});
  r.add_row({-3e-9, std::string("z")});
  r.summary["m"] = 2.5;
  r.check("ok", true);
  const auto text = to_json(r).dump();
  const Report back = report_from_json(nlohmann::ordered_json::parse(text));
  EXPECT_EQ(back.name, r.name);
  EXPECT_EQ(back.config_hash, r.config_hash);
  EXPECT_EQ(back.columns, r.columns);
  EXPECT_EQ(back.summary, r.summary);
  EXPECT_EQ(back.pass, r.pass);
  ASSERT_EQ(back.rows.size(), r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(format_number(std::get<double>(back.rows[i][0])), format_number(std::get<double>(r.rows[i][0])));
    EXPECT_EQ(back.rows[i][1], r.rows[i][1]);
  }
  // serializing the parsed report reproduces the text byte for byte
  EXPECT_EQ(to_json(back).dump(), text);
}

TEST(Report, ConfigHashIgnoresKeyOrder) {
  const json a = json::parse(R"({"a": 1, "b": [1, 2]})");
  const json b = json::parse(R"({"b": [1, 2], "a": 1})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(json{{"a", 2}, {"b", {1, 2}}}));
}

TEST(Report, AtomicWriteAndFailure) {
  const auto dir = std::filesystem::temp_directory_path() / "restrlab_test_emit";
  std::filesystem::create_directories(dir);
  Report r;
  r.columns = {"a"};
  r.add_row({1.0});
  emit(r, Format::Csv, dir / "r.csv");
  EXPECT_EQ(slurp(dir / "r.csv"), "a\n1\n");
  emit(r, Format::Json, dir / "r.json");
  EXPECT_EQ(report_from_json(nlohmann::ordered_json::parse(slurp(dir / "r.json"))).rows, r.rows);
  EXPECT_THROW(emit(r, Format::Csv, dir / "missing" / "r.csv"), IoFailure);
  std::filesystem::remove_all(dir);
}

TEST(Config, ParseAndReject) {
  const auto c = parse_config(json::parse(R"({"experiment": "region", "seed": 7, "params": {"m1": 3}})"));
  EXPECT_EQ(c.experiment, "region");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.params["m1"], 3);
  EXPECT_THROW(parse_config(json::parse(R"({"experiment": "region", "sed": 7})")), ConfigInvalid);
  EXPECT_EQ(parse_config(c.to_json()).to_json(), c.to_json());
}

TEST(Runner, UnknownExperimentOrParameter) {
  EXPECT_THROW(run_experiment(cfg("nonsense")), ConfigInvalid);
  EXPECT_THROW(run_experiment(cfg("region", {{"m3", 2}})), ConfigInvalid);
  EXPECT_THROW(run_experiment(cfg("region", {{"m1", "two"}})), ConfigInvalid);
}

TEST(Runner, RegistryCoversSubcommands) {
  const auto& names = experiment_names();
  for (const char* n : {"region", "decay", "lowerbound", "necessary", "knapp", "wavepacket", "bilinear", "sums", "faa"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST(Runner, RegionReportHasThreeEdges) {
  const Report r = run_experiment(cfg("region", {{"m1", 2}, {"m2", 2}}));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.rows.size(), 3000u);
  std::set<double> edges;
  for (const auto& row : r.rows) edges.insert(std::get<double>(row[2]));
  EXPECT_EQ(edges, (std::set<double>{1, 2, 3}));
  EXPECT_FALSE(r.config_hash.empty());
}

TEST(Runner, SameSeedSameBytes) {
  const auto c = cfg("lemma63", {{"draws", 50}}, 42);
  EXPECT_EQ(to_csv(run_experiment(c)), to_csv(run_experiment(c)));
  EXPECT_EQ(to_json(run_experiment(c)).dump(), to_json(run_experiment(c)).dump());
  EXPECT_NE(to_csv(run_experiment(c)), to_csv(run_experiment(cfg("lemma63", {{"draws", 50}}, 43))));
}

TEST(Runner, ThreadCountDoesNotChangeOutput) {
  const auto c = cfg("sums", {{"lemma", "J"}});
  set_default_threads(1);
  const std::string one = to_csv(run_experiment(c));
  set_default_threads(4);
  const std::string four = to_csv(run_experiment(c));
  set_default_threads(0);
  EXPECT_EQ(one, four);
}

TEST(Numerics, SubSeedsDiffer) {
  EXPECT_NE(sub_seed(1, 0), sub_seed(1, 1));
  EXPECT_EQ(sub_seed(5, 9), sub_seed(5, 9));
}

TEST(Numerics, LogLogFitRecoversPower) {
  std::vector<double> x{1, 2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3 * std::pow(v, -0.75));
  const auto f = fit_loglog(x, y);
  EXPECT_NEAR(f.slope, -0.75, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
}

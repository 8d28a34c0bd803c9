#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlab/corpus.hpp"
#include "mlab/error.hpp"
#include "mlab/experiments.hpp"
#include "mlab/io.hpp"

using namespace mlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(MLAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WEXITSTATUS(st);
}

std::string config_error(const json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const auto c = ExperimentConfig::from_json({{"experiment", "bergman-tv"}});
  EXPECT_EQ(c.t_nodes, 65u);
  EXPECT_EQ(c.corpus_size, 22u);
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  const auto e = ExperimentConfig::from_json({{"experiment", "entropy-duality"}});
  EXPECT_TRUE(e.to_json()["k_list"].is_null());
  EXPECT_NO_THROW(ExperimentConfig::from_json(e.to_json()));
}

TEST(Config, SchemaErrorsNameEveryField) {
  const std::string msg = config_error({{"experiment", "nope"}, {"grid", {{"N", "big"}}}, {"colour", 1}});
  EXPECT_NE(msg.find("colour"), std::string::npos);
  EXPECT_NE(msg.find("grid"), std::string::npos);
  EXPECT_NE(config_error({{"grid", {{"N", 64}}}}).find("experiment"), std::string::npos);
  EXPECT_NE(config_error({{"experiment", "nope"}}).find("unknown"), std::string::npos);
  EXPECT_NE(config_error({{"experiment", "convexity"}, {"grid", {{"depth", 3}}}}).find("grid.depth"), std::string::npos);
  EXPECT_THROW(ExperimentConfig::from_json(json::array()), ConfigError);
}

TEST(Config, KListRules) {
  EXPECT_NE(config_error({{"experiment", "bergman-tv"}, {"k_list", json::array()}}).find("k_list"), std::string::npos);
  EXPECT_NE(config_error({{"experiment", "bergman-tv"}, {"k_list", {16, 2}}}).find(">= 3"), std::string::npos);
  EXPECT_EQ(config_error({{"experiment", "bergman-tv"}, {"k_list", {16, 32}}}), "");
}

TEST(Config, ToleranceRules) {
  EXPECT_NE(config_error({{"experiment", "convexity"}, {"tolerances", {{"bogus", 1.0}}}}).find("bogus"), std::string::npos);
  const std::string neg = config_error({{"experiment", "convexity"}, {"tolerances", {{"second_diff", -1.0}}}});
  EXPECT_NE(neg.find("tolerances"), std::string::npos);
  for (const auto& name : experiment_names()) EXPECT_FALSE(default_tolerances(name).empty()) << name;
}

TEST(Config, FifteenExperiments) {
  EXPECT_EQ(experiment_names().size(), 15u);
  for (const auto& name : experiment_names()) EXPECT_NE(csv_documentation().find(name), std::string::npos);
}

TEST(Corpus, DeterministicAndShaped) {
  const auto a = generate_corpus(7, 6, 256), b = generate_corpus(7, 6, 256), c = generate_corpus(8, 6, 256);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(to_json(a[2]).dump(), to_json(b[2]).dump());
  EXPECT_NE(to_json(a[2]).dump(), to_json(c[2]).dump());
  EXPECT_EQ(a.front().g(), SymplecticPotential::fubini_study(256).g());
  EXPECT_EQ(a.back().g(), glued_profile(256).g());
  for (const auto& u : a)
    for (double v : u.gpp()) EXPECT_LE(std::abs(v), 1.8 + 1e-12);
  EXPECT_THROW(generate_corpus(1, 0), ConfigError);
}

TEST(Run, ByteIdenticalArtifacts) {
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  json j = {{"experiment", "gradient-checks"}, {"grid", {{"N", 256}}}, {"seed", 3}};
  j["output_dir"] = d1.string();
  const auto r1 = run(ExperimentConfig::from_json(j));
  j["output_dir"] = d2.string();
  const auto r2 = run(ExperimentConfig::from_json(j));
  ASSERT_EQ(r1.artifacts, r2.artifacts);
  for (const auto& a : r1.artifacts) EXPECT_EQ(slurp(d1 / a), slurp(d2 / a)) << a;
  const json m = json::parse(slurp(d1 / "manifest.json"));
  EXPECT_EQ(m["manifest_version"], kManifestVersion);
  EXPECT_EQ(m["library_version"], kLibraryVersion);
  EXPECT_EQ(m["status"], r1.ok() ? "pass" : "fail");
}

TEST(Run, NoWriteLeavesNothing) {
  const fs::path d = scratch("nowrite");
  auto c = ExperimentConfig::from_json({{"experiment", "entropy-duality"}, {"grid", {{"N", 256}}}});
  c.output_dir = d.string();
  const auto r = run(c, false);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(fs::exists(d));
}

TEST(Run, ImpossibleToleranceFails) {
  auto c = ExperimentConfig::from_json(
      {{"experiment", "gradient-checks"}, {"grid", {{"N", 256}}}, {"tolerances", {{"order", 10.0}}}});
  const auto r = run(c, false);
  EXPECT_FALSE(r.ok());
  ASSERT_NE(r.first_failure(), nullptr);
  EXPECT_EQ(r.first_failure()->name, "order of E");
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("cli");
  EXPECT_EQ(cli("run entropy-duality --grid-n 256 --out " + (d / "a").string()), 0);
  EXPECT_EQ(cli("run gradient-checks --grid-n 256 --tol-override order=10 --out " + (d / "b").string()), 1);
  EXPECT_EQ(cli("run bergman-mass --k 2 --out " + (d / "c").string()), 2);
  EXPECT_EQ(cli("run convexity --tol-override bogus=1"), 2);
  EXPECT_EQ(cli("run convexity --config " + (d / "missing.json").string()), 3);
  EXPECT_NE(cli("run no-such-experiment"), 0);
}

TEST(Cli, ConfigFileAndCorpus) {
  const fs::path d = scratch("cfg");
  fs::create_directories(d);
  std::ofstream(d / "c.json") << R"({"experiment": "entropy-duality", "grid": {"N": 256}})";
  EXPECT_EQ(cli("run entropy-duality --config " + (d / "c.json").string() + " --out " + (d / "o").string()), 0);
  EXPECT_TRUE(fs::exists(d / "o" / "manifest.json"));
  EXPECT_EQ(cli("run gradient-checks --config " + (d / "c.json").string()), 2);
  EXPECT_EQ(cli("generate-corpus --seed 5 --count 3 --grid-n 64 --out " + (d / "u1.json").string()), 0);
  EXPECT_EQ(cli("generate-corpus --seed 5 --count 3 --grid-n 64 --out " + (d / "u2.json").string()), 0);
  EXPECT_EQ(slurp(d / "u1.json"), slurp(d / "u2.json"));
  const json j = json::parse(slurp(d / "u1.json"));
  ASSERT_EQ(j["potentials"].size(), 3u);
  EXPECT_EQ(symplectic_from_json(j["potentials"][1]).g(), generate_corpus(5, 3, 64)[1].g());
}

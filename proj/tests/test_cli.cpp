#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "rlrepro/distributions.hpp"
#include "rlrepro/ingest.hpp"

using namespace rlrepro;
namespace fs = std::filesystem;

namespace {

const std::string data_dir = RLREPRO_DATA_DIR;

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rlrepro");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rlrepro_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> run_files(const fs::path& dir, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back((dir / (synth_run_id(i) + ".csv")).string());
  return out;
}

TEST(Cli, VersionAndHelp) {
  auto r = run_cli({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(tool_version), std::string::npos);
  r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("analyze"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  const auto r = run_cli({"fit", "x.csv"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error[validation]"), std::string::npos);
}

TEST(Cli, ValidatePrintsDigest) {
  const auto path = data_dir + "/configs/trpo_c1.yaml";
  const auto r = run_cli({"validate", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, config_hash(parse_config(read_text_file(path))) + "  " + path + "\n");
}

TEST(Cli, ValidateTable) {
  std::vector<std::string> args{"validate", "--table"};
  for (int i = 1; i <= 5; ++i) args.push_back(data_dir + "/configs/ppo_c" + std::to_string(i) + ".yaml");
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("optim_batch_size"), std::string::npos);
  EXPECT_NE(r.out.find("ppo-c3              1         2048         512    0.00011"), std::string::npos);
}

TEST(Cli, ValidateRejectsBadConfig) {
  const auto dir = scratch("badcfg");
  write_text_file(dir / "bad.yaml", "schema_version: 1\nname: x\n");
  const auto r = run_cli({"validate", (dir / "bad.yaml").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("algorithm"), std::string::npos);
  EXPECT_EQ(run_cli({"validate", (dir / "missing.yaml").string()}).code, 3);
  fs::remove_all(dir);
}

TEST(Cli, SeedIsRequired) {
  const auto dir = scratch("seed");
  auto r = run_cli({"synth", data_dir + "/synth_reacher.yaml", "--out", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--seed"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir));
  write_text_file(dir / "m.csv", "value\n1\n2\n");
  EXPECT_EQ(run_cli({"fit", (dir / "m.csv").string(), "--family", "normal"}).code, 1);
  EXPECT_EQ(run_cli({"analyze", data_dir + "/configs/ppo_c4.yaml", (dir / "m.csv").string()}).code, 1);
  fs::remove_all(dir);
}

TEST(Cli, SynthCurvesAnalyzeRoundTrip) {
  const auto dir = scratch("pipeline");
  auto r = run_cli({"synth", data_dir + "/synth_reacher.yaml", "--seed", "11", "--out", (dir / "runs").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "10 runs of 1500 episodes written to " + (dir / "runs").string() + "\n");

  std::vector<std::string> args{"curves", data_dir + "/configs/ppo_c4.yaml"};
  for (const auto& f : run_files(dir / "runs", 10)) args.push_back(f);
  args.insert(args.end(), {"--out", (dir / "curves").string()});
  r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("band over 9 runs"), std::string::npos);
  EXPECT_NE(r.out.find("excluded run 8 (run_08)"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "curves" / "band.csv"));
  EXPECT_TRUE(fs::exists(dir / "curves" / "curves" / "run_09.csv"));

  args = {"analyze", data_dir + "/configs/ppo_c4.yaml"};
  for (const auto& f : run_files(dir / "runs", 10)) args.push_back(f);
  args.insert(args.end(), {"--seed", "7", "--resamples", "400", "--families", "normal,skewnorm", "--reported",
                           "137.26", "--out", (dir / "bundle").string()});
  r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("9 runs analyzed\n", 0), 0u);
  EXPECT_NE(r.out.find("excluded run 8 (run_08)"), std::string::npos);
  EXPECT_NE(r.out.find("rejected"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "bundle" / "manifest.txt"));
  EXPECT_TRUE(fs::exists(dir / "bundle" / "fits" / "ppo-c4" / "skewnorm.yaml"));

  // A stored fit feeds `verify`.
  r = run_cli({"verify", (dir / "bundle" / "fits" / "ppo-c4" / "normal.yaml").string(), "--reported", "-1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("P_v: 1\n"), std::string::npos);

  // Threads do not change the bundle.
  args.back() = (dir / "bundle4").string();
  args.insert(args.end(), {"--threads", "4"});
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(read_text_file(dir / "bundle" / "manifest.txt"), read_text_file(dir / "bundle4" / "manifest.txt"));
  fs::remove_all(dir);
}

TEST(Cli, AnalyzeRejectsWrongRunCount) {
  const auto dir = scratch("count");
  ASSERT_EQ(run_cli({"synth", data_dir + "/synth_reacher.yaml", "--seed", "1", "--out", dir.string()}).code, 0);
  std::vector<std::string> args{"analyze", data_dir + "/configs/trpo_c1.yaml"};
  for (const auto& f : run_files(dir, 9)) args.push_back(f);
  args.insert(args.end(), {"--seed", "1"});
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("declares 10 runs"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, FitRecoversBetaParameters) {
  const auto dir = scratch("fit");
  const auto truth = make_distribution(Family::beta, {18.83, 8.83, 89.22, 74.13});
  SeededRng rng(2024);
  std::string csv = "mean\n";
  for (double x : sample(truth, 10000, rng)) csv += fmt::shortest(x) + "\n";
  write_text_file(dir / "means.csv", csv);
  auto r = run_cli({"fit", (dir / "means.csv").string(), "--family", "beta", "--seed", "3", "--out",
                    (dir / "beta.yaml").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("family: beta"), std::string::npos);
  const auto f = parse_fit_record(read_text_file(dir / "beta.yaml"));
  // Beta shape/loc/scale trade off along a ridge, so compare the mean and a
  // few quantiles rather than the raw parameters.
  EXPECT_NEAR(mean(f.dist), mean(truth), 0.2);
  for (double p : {0.05, 0.5, 0.95}) EXPECT_NEAR(quantile(f.dist, p), quantile(truth, p), 0.4) << p;
  EXPECT_GT(f.ks_pvalue, 0.05);
  EXPECT_EQ(f.sample_size, 10000u);

  r = run_cli({"verify", (dir / "beta.yaml").string(), "--reported", "138.58"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("decision: Failed to reject"), std::string::npos);
  r = run_cli({"verify", (dir / "beta.yaml").string(), "--reported", "165"});
  EXPECT_NE(r.out.find("decision: Rejected"), std::string::npos);
  EXPECT_EQ(run_cli({"verify", (dir / "beta.yaml").string(), "--reported", "1", "--alpha", "2"}).code, 1);
  fs::remove_all(dir);
}

TEST(Cli, FitInputErrors) {
  const auto dir = scratch("fiterr");
  write_text_file(dir / "short.csv", "value\n1\n2\n3\n");
  write_text_file(dir / "junk.csv", "value\n1\nabc\n");
  EXPECT_EQ(run_cli({"fit", (dir / "short.csv").string(), "--family", "normal", "--seed", "1"}).code, 1);
  EXPECT_EQ(run_cli({"fit", (dir / "junk.csv").string(), "--family", "normal", "--seed", "1"}).code, 1);
  EXPECT_EQ(run_cli({"fit", (dir / "short.csv").string(), "--family", "cauchy", "--seed", "1"}).code, 1);
  EXPECT_EQ(run_cli({"fit", (dir / "nope.csv").string(), "--family", "normal", "--seed", "1"}).code, 3);
  fs::remove_all(dir);
}

TEST(Cli, DoesNotModifyInputs) {
  const auto path = data_dir + "/configs/ppo_c4.yaml";
  const auto before = read_text_file(path);
  run_cli({"validate", path, "--table"});
  EXPECT_EQ(read_text_file(path), before);
}

}  // namespace

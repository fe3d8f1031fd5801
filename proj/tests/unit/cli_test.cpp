#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "fixtures.hpp"
#include "sxcad_cli/cli.hpp"

namespace sxcad {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "sxcad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& rel) { return (test::data_dir() / rel).string(); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    tmp = fs::temp_directory_path() / ("sxcad_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(tmp);
    fs::create_directories(tmp);
  }
  void TearDown() override { fs::remove_all(tmp); }
  fs::path tmp;
};

TEST_F(Cli, ParseEmitsProgramJson) {
  const Invocation r = run({"parse", data("backrest.cad")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["parts"][0]["label"], "unlabeled");
}

TEST_F(Cli, ParseFailureIsExitTwoWithErrorJson) {
  const fs::path bad = tmp / "bad.cad";
  std::ofstream(bad) << "E: (0,0,1,0,0,0,2,NewBody,OneSided)\n";
  const Invocation r = run({"parse", bad.string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"], "parse");
  EXPECT_EQ(e["exit_code"], 2);
  EXPECT_FALSE(e["details"].empty());
}

TEST_F(Cli, ValidateExitCodes) {
  EXPECT_EQ(run({"validate", data("three_cubes.cad")}).code, 0);
  const Invocation bad = run({"validate", data("progsucc/03_backrest_oversized_cut.txt")});
  EXPECT_EQ(bad.code, cli::kExitValidation);
  EXPECT_EQ(json::parse(bad.out)["valid"], false);
}

TEST_F(Cli, MeshMatchesGoldenTriangleCount) {
  const Invocation r = run({"--out", tmp.string(), "mesh", data("backrest.cad")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(r.out);
  EXPECT_EQ(s["triangles"], 184);
  EXPECT_EQ(s["vertices"], 92);
  EXPECT_EQ(s["watertight"], true);
  EXPECT_TRUE(fs::is_regular_file(tmp / "backrest.obj"));
  EXPECT_TRUE(fs::is_regular_file(tmp / "backrest.labels.json"));
}

TEST_F(Cli, SampleIsDeterministic) {
  const Invocation a = run({"--samples", "100", "--seed", "3", "sample", data("backrest.cad")});
  const Invocation b = run({"--samples", "100", "--seed", "3", "sample", data("backrest.cad")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run({"--samples", "100", "--seed", "4", "sample", data("backrest.cad")}).out);
}

TEST_F(Cli, MetricsSelfComparison) {
  const Invocation r = run({"--samples", "1000", "metrics", data("backrest.cad"), data("backrest.cad")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = json::parse(r.out);
  EXPECT_EQ(m["chamfer"], 0.0);
  EXPECT_EQ(m["seg_acc"], 1.0);
  EXPECT_EQ(m["seg_miou"], 1.0);
  const Invocation row = run({"--samples", "1000", "metrics", "--row", data("backrest.cad"), data("backrest.cad")});
  EXPECT_NE(row.out.find("0.000000\t1.000000\t1.000000"), std::string::npos);
}

TEST_F(Cli, MetricsAcceptsCloudFiles) {
  const Invocation cloud = run({"--samples", "500", "--out", tmp.string(), "sample", data("backrest.cad")});
  ASSERT_EQ(cloud.code, 0) << cloud.err;
  const Invocation r = run({"--samples", "500", "metrics", data("backrest.cad"), (tmp / "backrest.pts").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["chamfer"], 0.0);
}

TEST_F(Cli, InferWithFixtureProvider) {
  const Invocation r = run({"--fixtures", data("fixtures"), "--out", tmp.string(), "infer", "backrest_demo", "--template", "cot"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["ok"], true);
  EXPECT_EQ(j["template"], "cot");
  EXPECT_EQ(test::read_file(tmp / "backrest_demo.txt"), test::read_file(test::data_dir() / "backrest.cad"));
  EXPECT_TRUE(fs::is_regular_file(tmp / "backrest_demo.json"));
}

TEST_F(Cli, ProviderErrorsAreExitThree) {
  EXPECT_EQ(run({"--fixtures", data("fixtures"), "infer", "missing"}).code, cli::kExitProvider);
  const Invocation r = run({"--provider", "http", "--endpoint", "http://127.0.0.1:9/v1", "--api-key-env", "SXCAD_UNSET_KEY_VAR",
                     "infer", data("backrest.cad")});
  EXPECT_EQ(r.code, cli::kExitProvider);
  EXPECT_EQ(json::parse(r.err)["error"], "config");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--tess-tol", "-1", "mesh", data("backrest.cad")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"parse", (tmp / "nope.cad").string()}).code, cli::kExitUsage);
}

TEST_F(Cli, CadifyWritesProgramAndAudit) {
  const Invocation r = run({"--out", tmp.string(), "cadify", data("cadify")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["written"], 1);
  const json audit = json::parse(test::read_file(tmp / "audit.json"));
  EXPECT_EQ(audit["items"][0]["parts"].size(), 6u);
  EXPECT_EQ(run({"validate", (tmp / "chair.cad").string()}).code, 0);
}

TEST_F(Cli, EvalCsv) {
  const Invocation r = run({"--samples", "1000", "eval", data("corpus")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "model,items,CD,Seg Acc,Seg mIoU,Prog Succ,Part IoU");
  EXPECT_EQ(lines[1], "model_a,3,0.000000,1.000000,1.000000,1.000000,1.000000");
  EXPECT_EQ(lines[2].rfind("model_b,3,", 0), 0u);
  EXPECT_NE(lines[2].find(",0.666667,"), std::string::npos);
  EXPECT_EQ(lines[3].rfind("mean,6,", 0), 0u);
  EXPECT_EQ(r.out, run({"--samples", "1000", "--jobs", "4", "eval", data("corpus")}).out);
}

}  // namespace
}  // namespace sxcad

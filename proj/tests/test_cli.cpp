#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gower/matrix_io.hpp"

namespace fs = std::filesystem;
using gower::cli::kFatal;
using gower::cli::kOk;
using gower::cli::kWarnings;

namespace {

const std::string kData = GOWER_TEST_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = gower::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gower_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::vector<std::string> kTinyGa{"--ga-pop", "10", "--ga-gens", "4", "--ga-stall", "3"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(Cli, ValidateExitCodes) {
  auto ok = run({"validate", "--data", data("mixed.csv"), "--schema", data("mixed.schema")});
  EXPECT_EQ(ok.code, kOk) << ok.out;
  EXPECT_NE(ok.out.find("rows: 12"), std::string::npos);
  EXPECT_NE(ok.out.find("ok"), std::string::npos);

  auto warn = run({"validate", "--data", data("constant.csv"), "--schema", data("constant.schema")});
  EXPECT_EQ(warn.code, kWarnings) << warn.out;
  EXPECT_NE(warn.out.find("zero range"), std::string::npos);

  auto bad = run({"validate", "--data", data("allmissing.csv"), "--schema", data("constant.schema")});
  EXPECT_EQ(bad.code, kFatal);
  EXPECT_NE(bad.out.find("row 2"), std::string::npos) << bad.out;

  auto missing = run({"validate", "--data", data("nope.csv"), "--schema", data("mixed.schema")});
  EXPECT_EQ(missing.code, kFatal);
  EXPECT_EQ(run({"no-such-command"}).code, kFatal);
  EXPECT_EQ(run({"--help"}).code, kOk);
}

TEST_F(Cli, DistWorkedExample) {
  auto r = run({"dist", "--data", data("smoke.csv"), "--schema", data("smoke.schema"), "--layout",
                "condensed"});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "i,j,d");
  std::getline(in, line);
  ASSERT_EQ(line.substr(0, 4), "1,2,");
  EXPECT_NEAR(std::stod(line.substr(4)), 0.3706, 5e-5);
  std::getline(in, line);
  EXPECT_EQ(line, "1,3,0.5");
}

TEST_F(Cli, DistUniformWeightsMatchUnweighted) {
  const std::vector<std::string> base{"dist", "--data", data("mixed.csv"), "--schema",
                                      data("mixed.schema")};
  auto plain = run(base);
  auto uniform = run(cat(base, {"--weights", "uniform"}));
  ASSERT_EQ(plain.code, kOk) << plain.err;
  EXPECT_EQ(plain.out, uniform.out);
  auto pretty = run(cat(base, {"--format", "pretty"}));
  EXPECT_EQ(pretty.code, kOk);
  EXPECT_NE(pretty.out, plain.out);
}

TEST_F(Cli, DistWeightsFile) {
  std::ofstream(tmp("w.csv")) << "variable,weight\nincome,2\nage,1\nregion,1\neducation,1\nowner,0\n";
  auto r = run({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema"), "--weights",
                tmp("w.csv")});
  EXPECT_EQ(r.code, kOk) << r.err;
  std::ofstream(tmp("short.csv")) << "income,1\n";
  auto bad = run({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema"),
                  "--weights", tmp("short.csv")});
  EXPECT_EQ(bad.code, kFatal);
  EXPECT_NE(bad.err.find("age"), std::string::npos);
}

TEST_F(Cli, BinaryDumpRoundTripsThroughConvert) {
  const std::string bin = tmp("m.gwdm");
  auto r = run({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema"), "--format",
                "bin", "--out", bin});
  ASSERT_EQ(r.code, kOk) << r.err;
  const std::string raw = slurp(bin);
  EXPECT_EQ(raw.substr(0, 4), "GWDM");
  EXPECT_EQ(raw.size(), 4u + 1u + 8u + 8u + 66u * 8u);

  auto csv = run({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema")});
  auto conv = run({"convert", "--in", bin});
  ASSERT_EQ(conv.code, kOk) << conv.err;
  EXPECT_EQ(conv.out, csv.out);

  auto nobin = run({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema"),
                    "--format", "bin"});
  EXPECT_EQ(nobin.code, kFatal);
}

TEST_F(Cli, DistZeroRangeWarns) {
  auto r = run({"dist", "--data", data("constant.csv"), "--schema", data("constant.schema")});
  EXPECT_EQ(r.code, kWarnings);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(Cli, WeightsOutputAndDeterminism) {
  const auto args = cat({"weights", "--data", data("mixed.csv"), "--schema", data("mixed.schema"),
                         "--mode", "wSbG", "--seed", "7"},
                        kTinyGa);
  auto a = run(args);
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "variable,weight,correlation");
  EXPECT_NE(a.err.find("path: genetic"), std::string::npos) << a.err;
  auto b = run(cat(args, {"--threads", "3"}));
  EXPECT_EQ(a.out, b.out);

  auto trace = run(cat(args, {"--trace", tmp("trace.csv")}));
  EXPECT_EQ(trace.code, kOk);
  EXPECT_EQ(slurp(tmp("trace.csv")).substr(0, 16), "generation,best\n");
  EXPECT_EQ(run({"weights", "--data", data("mixed.csv"), "--schema", data("mixed.schema")}).code,
            kFatal);
}

TEST_F(Cli, WeightsSingleVariableWarns) {
  auto r = run({"weights", "--data", data("single.csv"), "--schema", data("single.schema"),
                "--mode", "wPG"});
  EXPECT_EQ(r.code, kWarnings) << r.err;
  EXPECT_EQ(r.out, "variable,weight,correlation\nx,1,1\n");
}

TEST_F(Cli, WeightsAnalyticPathIsLogged) {
  auto r = run({"weights", "--data", data("numeric.csv"), "--schema", data("numeric.schema"),
                "--mode", "wPG"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.err.find("path: analytic"), std::string::npos) << r.err;
  auto ga = run(cat({"weights", "--data", data("numeric.csv"), "--schema", data("numeric.schema"),
                     "--mode", "wPG", "--no-analytic"},
                    kTinyGa));
  EXPECT_NE(ga.err.find("path: genetic"), std::string::npos) << ga.err;
}

TEST_F(Cli, DistFitsWeightsForWeightedModes) {
  auto r = run(cat({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema"), "--mode",
                    "wPbG"},
                   kTinyGa));
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.err.find("objective at fitted weights"), std::string::npos);
  EXPECT_EQ(run({"dist", "--data", data("mixed.csv"), "--schema", data("mixed.schema"), "--mode",
                 "bogus"})
                .code,
            kFatal);
}

TEST_F(Cli, KnnSimDeterministicAndSeedSensitive) {
  const auto args = cat({"knn-sim", "--iters", "2", "--k", "3,5", "--modes", "unwG,wPG"}, kTinyGa);
  auto a = run(cat(args, {"--seed", "4"}));
  ASSERT_EQ(a.code, kOk) << a.err;
  auto b = run(cat(args, {"--seed", "4", "--threads", "2"}));
  EXPECT_EQ(a.out, b.out);
  auto c = run(cat(args, {"--seed", "5"}));
  EXPECT_NE(a.out, c.out);
  // header + 2 modes x 2 k
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 5);
  auto noisy = run(cat(args, {"--seed", "4", "--noisy"}));
  EXPECT_EQ(std::count(noisy.out.begin(), noisy.out.end(), '\n'), 9);
}

TEST_F(Cli, ImputeSimFlags) {
  const auto base = cat({"impute-sim", "--reps", "2", "--units", "80", "--modes", "unwG,wSbG",
                         "--seed", "3"},
                        kTinyGa);
  auto a = run(base);
  ASSERT_EQ(a.code, kOk) << a.err;
  EXPECT_NE(a.err.find("mean missing fraction"), std::string::npos);
  EXPECT_EQ(a.out, run(cat(base, {"--threads", "2"})).out);
  auto two = run(cat(base, {"--vars", "2"}));
  EXPECT_NE(two.out.find("w_2,srB"), std::string::npos);
  auto zero = run(cat(base, {"--zero-missing"}));
  ASSERT_EQ(zero.code, kOk) << zero.err;
  EXPECT_NE(zero.out.find("0.0000,0.0000,0.00"), std::string::npos) << zero.out;
  EXPECT_EQ(run(cat(base, {"--vars", "3"})).code, kFatal);
}

TEST_F(Cli, ImputeSimOnExportedProxy) {
  auto exp = run({"export-proxy", "--seed", "2", "--units", "60", "--out-data", tmp("p.csv"),
                  "--out-schema", tmp("p.schema")});
  ASSERT_EQ(exp.code, kOk) << exp.err;
  auto v = run({"validate", "--data", tmp("p.csv"), "--schema", tmp("p.schema")});
  EXPECT_EQ(v.code, kOk) << v.out;
  auto r = run(cat({"impute-sim", "--reps", "2", "--modes", "unwG", "--data", tmp("p.csv"),
                    "--schema", tmp("p.schema")},
                   kTinyGa));
  EXPECT_EQ(r.code, kOk) << r.err;
}

TEST_F(Cli, SeedFromEnvironment) {
  const auto args = cat({"knn-sim", "--iters", "1", "--k", "3", "--modes", "unwG"}, kTinyGa);
  ::setenv("GOWER_SEED", "9", 1);
  auto env = run(args);
  ::unsetenv("GOWER_SEED");
  auto flag = run(cat(args, {"--seed", "9"}));
  auto other = run(cat(args, {"--seed", "10"}));
  ASSERT_EQ(env.code, kOk) << env.err;
  EXPECT_EQ(env.out, flag.out);
  EXPECT_NE(env.out, other.out);
}

TEST_F(Cli, OutputFileMatchesStdout) {
  const std::vector<std::string> base{"dist", "--data", data("mixed.csv"), "--schema",
                                      data("mixed.schema")};
  auto a = run(base);
  auto b = run(cat(base, {"--out", tmp("d.csv")}));
  ASSERT_EQ(b.code, kOk);
  EXPECT_TRUE(b.out.empty());
  EXPECT_EQ(slurp(tmp("d.csv")), a.out);
}

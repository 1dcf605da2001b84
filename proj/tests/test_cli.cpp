// Copyright gridres contributors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "fixtures.hpp"
#include "gridres/io.hpp"

namespace fs = std::filesystem;

namespace gridres::test {
namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI inside `dir`; stderr is folded into the captured text.
Run gridres(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd =
      "cd '" + dir.string() + "' && " + env + " '" GRIDRES_CLI "' " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("gridres_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    spit(dir_ / "raw.csv", ingest_fixture().csv);
    const auto r = gridres(dir_, "--out base ingest --input raw.csv --start 2008-09-12T07:00 "
                                 "--end 2008-09-14T04:00");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto f = gridres(dir_, "--out base --seed 1 fit --dataset base/dataset.csv "
                                 "--boundaries 0,12,20,28,36,45 --components 2");
    ASSERT_EQ(f.code, 0) << f.out;
    const auto s = gridres(dir_, "--out base --seed 4 simulate --model base/model.json --replicas 20");
    ASSERT_EQ(s.code, 0) << s.out;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static fs::path dir_;
};
fs::path Cli::dir_;

TEST_F(Cli, IngestReportsProvenance) {
  const auto r = gridres(dir_, "--out ing ingest --input raw.csv --start 2008-09-12T07:00 "
                               "--end 2008-09-14T04:00");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("raw=5152"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("emitted=463"), std::string::npos) << r.out;
  const auto prov = slurp(dir_ / "ing" / "provenance.json");
  EXPECT_NE(prov.find("\"timezone\": \"CDT\""), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "ing" / "dataset.csv").substr(0, 44),
            "id,timestamp,duration_hours,failure_time_hou");
}

TEST_F(Cli, EmptyInputIsValidationError) {
  spit(dir_ / "empty.csv", "id,timestamp,duration_hours\n");
  const auto r = gridres(dir_, "--out e ingest --input empty.csv --start 2008-09-12T07:00 "
                               "--end 2008-09-14T04:00");
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST_F(Cli, SparseIntervalIsValidationError) {
  const auto r = gridres(dir_, "--out sp fit --dataset base/dataset.csv --boundaries 0,44.9,45");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("sparse"), std::string::npos) << r.out;
}

TEST_F(Cli, NonConvergenceExitsThree) {
  const auto r = gridres(dir_, "--out nc fit --dataset base/dataset.csv --starts 1 --max-iter 2");
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(slurp(dir_ / "nc" / "model.json").find("\"converged\": false"), std::string::npos);
}

TEST_F(Cli, BadFlagsAndUnknownConfigKeys) {
  EXPECT_EQ(gridres(dir_, "fit --dataset base/dataset.csv --tau -1").code, 2);
  EXPECT_EQ(gridres(dir_, "frobnicate").code, 2);
  EXPECT_EQ(gridres(dir_, "--help").code, 0);
  spit(dir_ / "bad.toml", "[fit]\nbogus = 1\n");
  EXPECT_EQ(gridres(dir_, "--config bad.toml fit --dataset base/dataset.csv").code, 2);
}

TEST_F(Cli, FlagsOverrideConfigOverrideDefaults) {
  spit(dir_ / "c.toml", "seed = 9\n[fit]\ntau = 3\nstarts = 2\n");
  ASSERT_EQ(gridres(dir_, "--config c.toml --out cf fit --dataset base/dataset.csv --tau 4").code, 0);
  const auto model = slurp(dir_ / "cf" / "model.json");
  EXPECT_NE(model.find("\"tau\": \"4\""), std::string::npos);
  EXPECT_NE(model.find("\"starts\": \"2\""), std::string::npos);
  EXPECT_NE(model.find("\"seed\": \"9\""), std::string::npos);
  EXPECT_NE(model.find("\"max-iter\": \"1000\""), std::string::npos);
}

TEST_F(Cli, TestPrintsSummaryLine) {
  const auto r = gridres(dir_, "--out t test --dataset base/sim_dataset.csv --model base/model.json");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::regex_search(
      r.out, std::regex(R"(^chi2=\d+\.\d\d dof=\d+ threshold=\d+\.\d\d -> (not )?rejected\n$)")))
      << r.out;
  EXPECT_NE(slurp(dir_ / "t" / "qq.csv").find("exp_quantile,rescaled_interarrival"), std::string::npos);
}

TEST_F(Cli, ModelWithoutRateIsRejectedByTest) {
  spit(dir_ / "norate.json", "{\"format\": \"gridres-model/1\"}");
  EXPECT_EQ(gridres(dir_, "test --dataset base/dataset.csv --model norate.json").code, 2);
}

TEST_F(Cli, ResilienceFromCurveFile) {
  std::string csv = "x,s\n";
  for (int i = 0; i <= 192; ++i) {
    const double x = 0.25 * i;
    csv += io::fmt(x) + "," + io::fmt(x <= 13 ? 0.035 * x : 0.455 + 0.005 * (x - 13)) + "\n";
  }
  spit(dir_ / "curve_in.csv", csv);
  const auto r = gridres(dir_, "--out rc resilience --curve curve_in.csv");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("d0=13 "), std::string::npos) << r.out;
}

TEST_F(Cli, SurgeSimulationWritesClosedForm) {
  const auto r = gridres(dir_, "--out su simulate --base-rate 5 --surge-peak 45 --surge-end 2 "
                               "--horizon 20 --weibull-scale 10 --weibull-shape 2 --replicas 50");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(dir_ / "su" / "paths.csv").find("n_closed_form"), std::string::npos);
  EXPECT_EQ(gridres(dir_, "simulate --surge-peak 45 --horizon 20 --weibull-scale 10 "
                          "--weibull-shape 2").code, 2);
}

// Every command, run twice with the same seed and config, writes identical bytes.
TEST_F(Cli, RerunsAreByteIdentical) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cmds{
      {"ingest --input raw.csv --start 2008-09-12T07:00 --end 2008-09-14T04:00",
       {"dataset.csv", "provenance.json"}},
      {"--seed 3 fit --dataset base/dataset.csv --boundaries 0,20,45 --components 2",
       {"model.json", "rate.csv"}},
      {"test --dataset base/sim_dataset.csv --model base/model.json",
       {"test_report.json", "qq.csv"}},
      {"resilience --model base/model.json", {"curve.csv", "resilience.json"}},
      {"--seed 8 simulate --model base/model.json --replicas 50 --event-replicas 3",
       {"events.csv", "paths.csv", "simulate.json", "sim_dataset.csv"}},
      {"reconstruct --model base/model.json --dataset base/dataset.csv --grid-step 1",
       {"reconstruct.csv", "reconstruct.json"}},
  };
  int k = 0;
  for (const auto& [args, files] : cmds) {
    const std::string a = "rep" + std::to_string(k) + "a", b = "rep" + std::to_string(k) + "b";
    ++k;
    const auto ra = gridres(dir_, "--out " + a + " " + args, "GRIDRES_THREADS=1");
    const auto rb = gridres(dir_, "--out " + b + " " + args, "GRIDRES_THREADS=4");
    ASSERT_EQ(ra.code, 0) << args << "\n" << ra.out;
    ASSERT_EQ(rb.code, 0) << args << "\n" << rb.out;
    EXPECT_EQ(ra.out, rb.out) << args;
    for (const auto& f : files) {
      const auto x = slurp(dir_ / a / f);
      EXPECT_FALSE(x.empty()) << args << " " << f;
      EXPECT_EQ(x, slurp(dir_ / b / f)) << args << " " << f;
    }
  }
}

}  // namespace
}  // namespace gridres::test

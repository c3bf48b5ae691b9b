#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using fracfield::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "fracfield");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracfield_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Cli, ConstantsPrintsNoiseConstant) {
  const auto r = call({"constants", "--H", "0.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(first_line(r.out), "c_H = 0.159155");
  const auto a = call({"constants", "--H", "0.3", "--alpha", "0", "--T", "1"});
  EXPECT_EQ(a.code, 0);
  EXPECT_NE(a.out.find("lemma35_C_wave = 16"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("A_T[wave]"), std::string::npos);
}

TEST(Cli, ParseAndValidationErrorsExitOne) {
  EXPECT_EQ(call({}).code, 1);
  EXPECT_EQ(call({"frobnicate"}).code, 1);
  EXPECT_EQ(call({"constants"}).code, 1);
  EXPECT_EQ(call({"constants", "--H", "1.5"}).code, 1);
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, MissingConfigFieldIsNamed) {
  const fs::path dir = scratch("missing");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"eqn":"heat","grid":{"T":1,"L":1,"nt":2,"nx":2},"seed":1,"replicates":1})";
  }
  const auto r = call({"simulate", "--config", (dir / "bad.json").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'H'"), std::string::npos) << r.err;
}

TEST(Cli, NumericalFailureExitsTwo) {
  const fs::path dir = scratch("numfail");
  const auto r = call({"solve-det", "--eqn", "heat", "--drift", "tanh_scaled", "--drift-params", "3", "--eta",
                       "const:1", "--max-iter", "1", "--tol", "1e-15", "--out", dir.string()});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("numerical failure"), std::string::npos);
}

TEST(Cli, SolveDetWritesFullPrecisionCsv) {
  const fs::path dir = scratch("solve");
  const auto r = call({"solve-det", "--eqn", "heat", "--drift", "const", "--drift-params", "1", "--eta", "const:0",
                       "--T", "1", "--L", "1", "--nt", "4", "--nx", "4", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "solution.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x,z");
  bool saw_t1 = false;
  while (std::getline(in, line)) {
    double t = 0, x = 0, z = 0;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &z), 3);
    EXPECT_NEAR(z, t, 1e-12);
    if (t == 1.0) saw_t1 = true;
  }
  EXPECT_TRUE(saw_t1);
  EXPECT_TRUE(fs::exists(dir / "picard.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Cli, VerifyLemmasWritesSummary) {
  const fs::path dir = scratch("lemmas");
  const auto r = call({"verify-lemmas", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  EXPECT_TRUE(summary.at("all_pass").get<bool>());
  EXPECT_LE(summary.at("max_ratio").get<double>(), 1.0 + 1e-6);
  EXPECT_EQ(first_line(slurp(dir / "lemma_margins.csv")), "lemma,eqn,alpha,T,h,lhs,rhs,ratio,pass");
}

TEST(Cli, SampleIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path a = scratch("sample_a"), b = scratch("sample_b");
  const std::vector<std::string> base{"sample", "--eqn", "wave", "--H", "0.6", "--points", "0.5,0;1,0.2;1,-0.3",
                                      "--seed", "5", "--replicates", "16"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--out", a.string(), "--threads", "1"});
  args_b.insert(args_b.end(), {"--out", b.string(), "--threads", "3"});
  ASSERT_EQ(call(args_a).code, 0);
  ASSERT_EQ(call(args_b).code, 0);
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest.at("master_seed").get<std::uint64_t>(), 5u);
}

TEST(Cli, SimulateConfigRunsAndIsReproducible) {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const std::string cfg = std::string(FRACFIELD_CONFIGS) + "/wave_small.json";
  ASSERT_EQ(call({"simulate", "--config", cfg, "--replicates", "4", "--out", a.string()}).code, 0);
  ASSERT_EQ(call({"simulate", "--config", cfg, "--replicates", "4", "--out", b.string(), "--threads", "2"}).code, 0);
  EXPECT_EQ(slurp(a / "replicates.csv"), slurp(b / "replicates.csv"));
  EXPECT_EQ(first_line(slurp(a / "replicates.csv")), "replicate,t,x,value");
  EXPECT_TRUE(fs::exists(a / "summary.json"));
}

TEST(Cli, BinaryRunsStandalone) {
  const fs::path dir = scratch("binary");
  fs::create_directories(dir);
  const std::string cmd = std::string(FRACFIELD_CLI) + " constants --H 0.5 > " + (dir / "o.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_EQ(first_line(slurp(dir / "o.txt")), "c_H = 0.159155");
}

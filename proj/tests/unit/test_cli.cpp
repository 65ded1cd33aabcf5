#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>

#include <coupled_tools/harness.hpp>

using namespace coupled;
namespace ct = coupled::tools;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("coupled_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
    return file(name);
  }

 private:
  fs::path path_;
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COUPLED_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunConfig, ParsesGeneratorAndSolver) {
  const ct::RunConfig cfg = ct::parse_run_config(R"({
    "instance": {"kind": "synthetic", "n": 5, "d": 2, "m": 3, "graph": {"topology": "ring"}},
    "solver": {"max_iters": 77, "tol_x": 1e-9},
    "seed": 4, "reference": "none", "output": "x.csv",
    "faults": {"theta_scale": 2.0}
  })");
  ASSERT_TRUE(cfg.generator_json);
  EXPECT_FALSE(cfg.instance_path);
  EXPECT_EQ(cfg.solver.limits.max_iters, 77u);
  EXPECT_DOUBLE_EQ(cfg.solver.limits.tol_x, 1e-9);
  EXPECT_EQ(cfg.seed, 4u);
  EXPECT_FALSE(cfg.reference_kkt);
  EXPECT_EQ(cfg.output, "x.csv");
  EXPECT_DOUBLE_EQ(cfg.faults.theta_scale, 2.0);
  const ProblemInstance inst = ct::build_instance(cfg);
  EXPECT_EQ(inst.n(), 5u);
  EXPECT_EQ(inst.m(), 3);
}

TEST(RunConfig, RejectsMalformedInput) {
  EXPECT_THROW(ct::parse_run_config("{not json"), ct::UsageError);
  EXPECT_THROW(ct::parse_run_config(R"({"instance": 3})"), ct::UsageError);
  EXPECT_THROW(ct::parse_run_config(R"({"reference": "magic"})"), ct::UsageError);
  EXPECT_THROW(ct::parse_run_config(R"({"sweep": {"param": "kappa_x", "values": [1]}})"),
               ct::UsageError);
  EXPECT_THROW(ct::load_run_config("/nonexistent/config.json"), ct::UsageError);
  EXPECT_THROW(ct::build_instance(ct::parse_run_config(R"({"instance": {"kind": "nope"}})")),
               ct::UsageError);
  EXPECT_THROW(ct::build_instance(ct::RunConfig{}), ct::UsageError);
}

TEST(BuildInstance, AllGeneratorKinds) {
  const std::string data = COUPLED_TEST_DATA;
  const std::vector<std::pair<std::string, std::size_t>> specs = {
      {R"({"kind": "synthetic", "n": 4, "d": 2, "m": 2})", 4},
      {R"({"kind": "resource", "n": 3, "d": 2, "budget": [1, 2]})", 3},
      {R"({"kind": "vfl", "libsvm": ")" + data + R"(/sample.libsvm", "n": 3})", 3},
      {R"({"kind": "lowerbound", "n": 6, "dim": 4})", 6},
      {R"({"kind": "conditioned", "n": 4, "d": 3, "kappa_f": 50, "kappa_A": 3})", 4},
  };
  for (const auto& [spec, n] : specs) {
    const ct::RunConfig cfg = ct::parse_run_config(R"({"instance": )" + spec + "}");
    EXPECT_EQ(ct::build_instance(cfg).n(), n) << spec;
  }
}

TEST(BuildInstance, LowerBoundNeedsMultipleOfThree) {
  const ct::RunConfig cfg = ct::parse_run_config(R"({"instance": {"kind": "lowerbound", "n": 5}})");
  EXPECT_THROW(ct::build_instance(cfg), InvalidParam);
}

TEST(Harness, SolveReportReachesReference) {
  ct::RunConfig cfg = ct::parse_run_config(R"({
    "instance": {"kind": "resource", "n": 2, "d": 1, "budget": [1]},
    "solver": {"max_iters": 5000, "tol_x": 1e-12, "tol_feas": 1e-10}})");
  const ProblemInstance inst = ct::build_instance(cfg);
  const ct::SolveReport rep = ct::run_solve(inst, cfg);
  ASSERT_TRUE(rep.reference);
  EXPECT_LE(rep.rel_err(), 1e-6);
}

TEST(Harness, VerifyDefaultPasses) {
  for (const auto& c : ct::run_verify(ct::RunConfig{})) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}

TEST(Harness, VerifyDetectsPerturbedGossip) {
  ct::RunConfig cfg;
  cfg.faults.perturb_W = true;
  bool any_fail = false;
  for (const auto& c : ct::run_verify(cfg)) any_fail = any_fail || !c.pass;
  EXPECT_TRUE(any_fail);
}

TEST(Harness, BenchSinglePoint) {
  ct::SweepConfig sw;
  sw.param = "kappa_f";
  sw.values = {10.0};
  const auto rows = ct::run_bench(sw, 0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].reached);
  EXPECT_NEAR(rows[0].kappa_f, 10.0, 1e-8);
  const std::string csv = ct::bench_csv(rows);
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "value,iters,grad_calls,matmul_rounds,comm_rounds,kappa_f,kappa_A,kappa_W");
  EXPECT_EQ(std::stod(line.substr(0, line.find(','))), 10.0);
}

TEST(Binary, GenerateThenSolve) {
  TempDir dir;
  const std::string inst = dir.file("inst.json");
  const std::string gen = dir.write("gen.json", R"({"instance": {"kind": "resource", "n": 3, "d": 1, "budget": [3]}})");
  ASSERT_EQ(run_cli("generate --config " + gen + " --out " + inst), 0);
  ASSERT_TRUE(fs::exists(inst));
  const ProblemInstance loaded = load_instance(inst);
  EXPECT_EQ(loaded.n(), 3u);

  const std::string trace = dir.file("trace.csv");
  const std::string sol = dir.write("solve.json", R"({"instance": ")" + inst + R"(", "solver": {"max_iters": 3000}})");
  ASSERT_EQ(run_cli("solve --config " + sol + " --out " + trace), 0);
  std::ifstream tin(trace);
  const ConvergenceTrace t = read_trace_csv(tin);
  ASSERT_FALSE(t.records.empty());
  EXPECT_TRUE(t.has_dist());
  EXPECT_EQ(t.records.front().iter, 0u);
}

TEST(Binary, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_cli("verify"), 0);
  EXPECT_EQ(run_cli("verify --config " + dir.write("f.json", R"({"faults": {"perturb_W": true}})")), 1);
  EXPECT_EQ(run_cli("solve --config /nonexistent.json"), 2);
  EXPECT_EQ(run_cli("solve --config " + dir.write("bad.json", "{")), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("bench --config " + dir.write("nb.json", "{}")), 2);
  const std::string diverge = dir.write("d.json", R"({
    "instance": {"kind": "synthetic", "n": 6, "d": 2, "m": 3, "graph": {"topology": "ring"}},
    "solver": {"max_iters": 5000}, "faults": {"theta_scale": 10}})");
  EXPECT_EQ(run_cli("solve --quiet --config " + diverge), 1);
}

TEST(Binary, BenchWritesCsv) {
  TempDir dir;
  const std::string out = dir.file("bench.csv");
  const std::string cfg = dir.write("b.json", R"({"sweep": {"param": "kappa_A", "values": [2, 4], "n": 4}})");
  ASSERT_EQ(run_cli("bench --quiet --config " + cfg + " --out " + out), 0);
  const std::string csv = slurp(out);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

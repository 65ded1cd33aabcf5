#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <coupled/coupled.hpp>

namespace coupled::tools {

// Raised for unreadable or malformed configuration and files (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct SolverConfig {
  bool use_theorem1 = true;
  std::optional<double> tau, eta, theta, alpha;
  SolverLimits limits;
  std::optional<double> target_rel_err;
};

struct SweepConfig {
  std::string param;  // kappa_f | kappa_A | path_n
  std::vector<double> values;
  std::size_t n = 6;
  Eigen::Index d = 3;
  double kappa_f = 10.0;
  double kappa_A = 4.0;
  std::string topology = "ring";
  double target_rel_err = 1e-6;
  std::size_t max_iters = 200000;
};

struct FaultConfig {
  bool perturb_W = false;
  double theta_scale = 1.0;
};

struct RunConfig {
  std::optional<std::string> instance_path;
  std::optional<std::string> generator_json;  // inline generator spec
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  bool reference_kkt = true;
  std::optional<SweepConfig> sweep;
  FaultConfig faults;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

ProblemInstance build_instance(const RunConfig& cfg);

// Everything derived once per instance.
struct Prepared {
  GossipMatrix gossip;
  DerivedConstants dc;
  SolverParams params;
  int n_B = 1;
  int n_W = 1;
};

Prepared prepare(const ProblemInstance& inst, const SolverConfig& sc);

// "L_f=... mu_f=... kappa_f=... L_A=... mu_A=... kappa_A=... kappa_W=..."
std::string spectral_summary(const ProblemInstance& inst);

struct SolveReport {
  SolveResult result;
  std::optional<ReferenceSolution> reference;
  Prepared prep;
  double rel_err() const;  // NaN without a reference
};

SolveReport run_solve(const ProblemInstance& inst, const RunConfig& cfg);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_verify(const RunConfig& cfg);

struct BenchRow {
  double value = 0.0;
  std::size_t iters = 0;
  Counters counters;
  double kappa_f = 0.0;
  double kappa_A = 0.0;
  double kappa_W = 0.0;
  bool reached = false;
};

std::vector<BenchRow> run_bench(const SweepConfig& sweep, std::uint64_t seed);
std::string bench_csv(const std::vector<BenchRow>& rows);

// Probe helpers shared with the acceptance suite.
LiftedVector lifted_from_stacked(const Vector& v, const ProblemInstance& inst);
// Matrix of the implemented W' (columns: mul_wprime of unit vectors, m = 1).
Matrix operator_wprime(const GossipMatrix& gossip, const Graph& g);
// Matrix of u -> k_chebyshev(u) - k_chebyshev(0), i.e. P_B(B'B).
Matrix operator_pb(const ProblemInstance& inst, const DerivedConstants& dc,
                   const GossipMatrix& gossip);
// Eigenvalues of sym restricted to the span of `basis` (orthonormal columns).
Vector restricted_eigenvalues(const Matrix& sym, const Matrix& basis);
// Orthonormal basis of range(M) via SVD.
Matrix range_basis(const Matrix& M);

}  // namespace coupled::tools

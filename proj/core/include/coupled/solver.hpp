#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"
#include "coupled/simnet.hpp"
#include "coupled/spectral.hpp"

namespace coupled {

struct SolverLimits {
  std::size_t max_iters = 10000;
  double tol_x = 1e-10;
  double tol_feas = 1e-8;
};

struct SolverParams {
  double tau = 1.0;
  double eta = 1.0;
  double theta = 1.0;
  double alpha = 0.0;
  double r = 0.0;
  double gamma = 0.0;
  std::size_t max_iters = 10000;
  double tol_x = 1e-10;
  double tol_feas = 1e-8;
  // With a reference solution, also stop once ||x - x*|| / ||x0 - x*|| falls
  // to this value.
  std::optional<double> target_rel_err;
  DerivedConstants dc;
};

SolverParams theorem1_params(double L_f, double mu_f, const SolverLimits& limits,
                             const DerivedConstants& dc);
// tau = min{1, sqrt(kappa_K/kappa_G)/2}, eta = 1/(4 tau L_G),
// theta = 1/(eta L_K), alpha = mu_G.
SolverParams proposition1_params(const SolverLimits& limits,
                                 const DerivedConstants& dc);

// (1 + min{1/sqrt(kappa_G kappa_K), 1/kappa_K}/4)^(-1)
double proposition1_rate(const DerivedConstants& dc);

// Gradient of G at u: z = r(A x + gamma W' y - b), returns
// (grad F(x) + A' z, gamma W' z).
LiftedVector grad_G(const LiftedVector& u, const ProblemInstance& inst,
                    const SolverParams& p, SimNet& net);

struct TraceRecord {
  std::size_t iter = 0;
  Counters counters;
  double objective = 0.0;
  double feas_residual = 0.0;
  std::optional<double> dist_to_opt;
  // max over u, u_f, z of ||sum_i y_i|| / max_{j <= iter} ||y^j||
  double block_sum_ratio = 0.0;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  bool has_dist() const {
    return !records.empty() && records.front().dist_to_opt.has_value();
  }
};

enum class StopReason { max_iters, converged, target_reached };
std::string to_string(StopReason r);

struct SolveResult {
  Vector x;
  LiftedVector u;
  ConvergenceTrace trace;
  std::size_t iterations = 0;
  StopReason reason = StopReason::max_iters;
  double max_block_sum_ratio = 0.0;
};

inline constexpr double kTolBlockSum = 1e-8;

// Accelerated primal-dual iteration from x0 (zero by default), y0 = 0, z0 = 0.
// Throws NonFiniteIterate on overflow and InvariantViolation if a y-part
// leaves the zero-block-sum subspace.
SolveResult solve(const ProblemInstance& inst, const SolverParams& p, SimNet& net,
                  const std::optional<Vector>& reference = std::nullopt,
                  const std::optional<Vector>& x0 = std::nullopt);

// Counts after k outer iterations with Chebyshev degrees n_B and n_W.
Counters expected_counters(std::uint64_t k, int n_B, int n_W);

// CSV with columns iter, grad_calls, matmul_rounds, comm_rounds, objective,
// feas_residual[, dist_to_opt]; reals printed with 17 significant digits.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);
ConvergenceTrace read_trace_csv(std::istream& in);

}  // namespace coupled

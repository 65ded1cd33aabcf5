#include "coupled/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "coupled/chebyshev.hpp"
#include "coupled/errors.hpp"

namespace coupled {

namespace {

void apply_limits(SolverParams& p, const SolverLimits& limits) {
  p.max_iters = limits.max_iters;
  p.tol_x = limits.tol_x;
  p.tol_feas = limits.tol_feas;
}

}  // namespace

SolverParams theorem1_params(double L_f, double mu_f, const SolverLimits& limits,
                             const DerivedConstants& dc) {
  if (!(L_f >= mu_f && mu_f > 0.0)) throw InvalidParam("need L_f >= mu_f > 0");
  const double kappa_f = L_f / mu_f;
  SolverParams p;
  p.tau = std::min(1.0, 0.5 * std::sqrt(19.0 / (60.0 * std::max(1.0 + kappa_f, 8.0))));
  p.eta = 1.0 / (4.0 * p.tau * std::max(L_f + mu_f, 8.0 * mu_f));
  p.theta = 15.0 / (19.0 * p.eta);
  p.alpha = mu_f / 4.0;
  p.r = dc.r;
  p.gamma = dc.gamma;
  p.dc = dc;
  apply_limits(p, limits);
  return p;
}

SolverParams proposition1_params(const SolverLimits& limits, const DerivedConstants& dc) {
  SolverParams p;
  p.tau = std::min(1.0, 0.5 * std::sqrt(dc.kappa_K / dc.kappa_G_bound));
  p.eta = 1.0 / (4.0 * p.tau * dc.L_G);
  p.theta = 1.0 / (p.eta * dc.L_K);
  p.alpha = dc.mu_G;
  p.r = dc.r;
  p.gamma = dc.gamma;
  p.dc = dc;
  apply_limits(p, limits);
  return p;
}

double proposition1_rate(const DerivedConstants& dc) {
  const double m = std::min(1.0 / std::sqrt(dc.kappa_G_bound * dc.kappa_K), 1.0 / dc.kappa_K);
  return 1.0 / (1.0 + 0.25 * m);
}

LiftedVector grad_G(const LiftedVector& u, const ProblemInstance& inst,
                    const SolverParams& p, SimNet& net) {
  Matrix z = net.apply_A(inst, u.x) + p.gamma * mul_wprime(u.y, net) - inst.b_columns();
  z *= p.r;
  Vector gx = net.gradient(inst, u.x) + net.apply_At(inst, z);
  return {std::move(gx), p.gamma * mul_wprime(z, net)};
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::converged: return "converged";
    case StopReason::target_reached: return "target_reached";
  }
  return "unknown";
}

namespace {

// ||sum_i y_i|| relative to the largest ||y|| the sequence has reached.
// Rounding drift scales with the summands, and the y-part of the dual
// iterate itself tends to zero, so the current norm is the wrong yardstick.
class BlockSumMonitor {
 public:
  double operator()(const Matrix& y) {
    scale_ = std::max(scale_, y.norm());
    if (scale_ == 0.0) return 0.0;
    return y.rowwise().sum().norm() / scale_;
  }

 private:
  double scale_ = 0.0;
};

}  // namespace

SolveResult solve(const ProblemInstance& inst, const SolverParams& p, SimNet& net,
                  const std::optional<Vector>& reference, const std::optional<Vector>& x0) {
  if (!(p.tau > 0.0 && p.tau <= 1.0)) throw InvalidParam("tau must lie in (0, 1]");
  if (!(p.eta > 0.0) || !(p.theta > 0.0) || !(p.alpha > 0.0))
    throw InvalidParam("eta, theta and alpha must be positive");
  if (reference && reference->size() != inst.total_dim())
    throw ShapeMismatch("reference solution has the wrong size");
  if (x0 && x0->size() != inst.total_dim()) throw ShapeMismatch("x0 has the wrong size");

  const Eigen::Index m = inst.m();
  const auto n = static_cast<Eigen::Index>(inst.n());
  LiftedVector u = LiftedVector::zeros(inst.total_dim(), m, n);
  if (x0) u.x = *x0;
  LiftedVector u_f = u;
  LiftedVector z = LiftedVector::zeros(inst.total_dim(), m, n);

  const double shrink = 1.0 / (1.0 + p.eta * p.alpha);
  const double extrap = 2.0 * p.tau / (2.0 - p.tau);
  const double dist0 = reference ? (u.x - *reference).norm() : 0.0;

  SolveResult res;
  auto record = [&](std::size_t iter, double bs_ratio) {
    TraceRecord rec;
    rec.iter = iter;
    rec.counters = net.counters();
    rec.objective = inst.objective(u.x);
    rec.feas_residual = inst.feasibility_residual(u.x);
    if (reference) rec.dist_to_opt = (u.x - *reference).norm();
    rec.block_sum_ratio = bs_ratio;
    res.trace.records.push_back(rec);
  };
  record(0, 0.0);
  BlockSumMonitor bs_u, bs_uf, bs_z;

  std::size_t k = 0;
  while (k < p.max_iters) {
    const Vector x_prev = u.x;
    LiftedVector u_g = p.tau * u + (1.0 - p.tau) * u_f;
    LiftedVector g = grad_G(u_g, inst, p, net);
    g -= p.alpha * u_g;

    LiftedVector half = u - p.eta * (g + z);
    half *= shrink;
    z += p.theta * k_chebyshev(half, inst, p.dc, net);
    LiftedVector next = u - p.eta * (g + z);
    next *= shrink;
    u_f = u_g + extrap * (next - u);
    u = std::move(next);
    ++k;

    if (!u.all_finite() || !u_f.all_finite() || !z.all_finite()) throw NonFiniteIterate(k);
    const double bs = std::max({bs_u(u.y), bs_uf(u_f.y), bs_z(z.y)});
    if (bs > kTolBlockSum)
      throw InvariantViolation("y-part left the zero-block-sum subspace at iteration " +
                               std::to_string(k));
    res.max_block_sum_ratio = std::max(res.max_block_sum_ratio, bs);
    record(k, bs);

    const TraceRecord& last = res.trace.records.back();
    if (p.target_rel_err && reference) {
      const double rel = dist0 > 0.0 ? *last.dist_to_opt / dist0 : 0.0;
      if (rel <= *p.target_rel_err) {
        res.reason = StopReason::target_reached;
        break;
      }
    }
    if ((u.x - x_prev).norm() <= p.tol_x * (1.0 + u.x.norm()) &&
        last.feas_residual <= p.tol_feas) {
      res.reason = StopReason::converged;
      break;
    }
  }
  res.iterations = k;
  res.x = u.x;
  res.u = std::move(u);
  return res;
}

Counters expected_counters(std::uint64_t k, int n_B, int n_W) {
  Counters c;
  const auto nb = static_cast<std::uint64_t>(n_B);
  const auto nw = static_cast<std::uint64_t>(n_W);
  c.grad_calls = k;
  c.matmul_rounds = 2 * k * (1 + nb);
  c.comm_rounds = 2 * k * nw * (1 + nb);
  return c;
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  const bool dist = trace.has_dist();
  out << "iter,grad_calls,matmul_rounds,comm_rounds,objective,feas_residual";
  if (dist) out << ",dist_to_opt";
  out << '\n';
  char buf[64];
  for (const auto& r : trace.records) {
    out << r.iter << ',' << r.counters.grad_calls << ',' << r.counters.matmul_rounds << ','
        << r.counters.comm_rounds;
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.objective, r.feas_residual);
    out << buf;
    if (dist) {
      std::snprintf(buf, sizeof buf, ",%.17g", r.dist_to_opt.value_or(0.0));
      out << buf;
    }
    out << '\n';
  }
}

ConvergenceTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 1, "empty trace file");
  const std::string base = "iter,grad_calls,matmul_rounds,comm_rounds,objective,feas_residual";
  bool dist = false;
  if (line == base + ",dist_to_opt") {
    dist = true;
  } else if (line != base) {
    throw ParseError(1, 1, "unexpected trace header");
  }
  ConvergenceTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != (dist ? 7u : 6u)) throw ParseError(line_no, 1, "wrong column count");
    try {
      TraceRecord r;
      r.iter = std::stoull(cells[0]);
      r.counters.grad_calls = std::stoull(cells[1]);
      r.counters.matmul_rounds = std::stoull(cells[2]);
      r.counters.comm_rounds = std::stoull(cells[3]);
      r.objective = std::stod(cells[4]);
      r.feas_residual = std::stod(cells[5]);
      if (dist) r.dist_to_opt = std::stod(cells[6]);
      trace.records.push_back(r);
    } catch (const std::exception&) {
      throw ParseError(line_no, 1, "non-numeric trace cell");
    }
  }
  return trace;
}

}  // namespace coupled

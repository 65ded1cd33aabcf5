#include "coupled/chebyshev.hpp"

#include <algorithm>
#include <cmath>

#include "coupled/errors.hpp"

namespace coupled {

int chebyshev_degree(double ratio) {
  if (!(ratio >= 1.0) || !std::isfinite(ratio))
    throw InvalidParam("condition ratio must be finite and >= 1");
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(ratio) - 1e-9)));
}

ChebyshevSchedule make_schedule(double L, double mu) {
  if (!(L >= mu && mu > 0.0)) throw InvalidParam("schedule needs L >= mu > 0");
  ChebyshevSchedule s;
  s.L = L;
  s.mu = mu;
  s.degree = chebyshev_degree(L / mu);
  s.rho = (L - mu) * (L - mu) / 16.0;
  s.nu = (L + mu) / 2.0;
  return s;
}

ChebyshevSchedule wprime_schedule(const GossipMatrix& gossip) {
  return make_schedule(std::sqrt(gossip.L_W), std::sqrt(gossip.mu_W));
}

ChebyshevSchedule b_schedule(const DerivedConstants& dc) {
  return make_schedule(dc.L_B, dc.mu_B);
}

namespace {

// T_n(x) for |x| <= 1 by the three-term recurrence.
double chebyshev_t(int n, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double eval_scaled_chebyshev(double t, const ChebyshevSchedule& s) {
  if (s.L == s.mu) return t / s.L;
  const int n = s.degree;
  const double x0 = (s.L + s.mu) / (s.L - s.mu);  // > 1
  const double x = (s.L + s.mu - 2.0 * t) / (s.L - s.mu);
  const double a0 = std::acosh(x0);
  if (std::abs(x) <= 1.0) {
    // T_n(x0) = cosh(n a0); the ratio is bounded by 1 / cosh(n a0).
    return 1.0 - chebyshev_t(n, x) / std::cosh(n * a0);
  }
  // |x| > 1: T_n(x) = sign^n cosh(n acosh|x|). Ratio of cosh values in
  // exponential form to stay finite for large n.
  const double a = std::acosh(std::abs(x));
  const double sign = (x < 0.0 && (n % 2 == 1)) ? -1.0 : 1.0;
  const double ratio = std::exp(n * (a - a0)) * (1.0 + std::exp(-2.0 * n * a)) /
                       (1.0 + std::exp(-2.0 * n * a0));
  return 1.0 - sign * ratio;
}

Vector chebyshev_iterate(const Matrix& M, const Vector& r, const Vector& v,
                         const ChebyshevSchedule& s) {
  auto residual_grad = [&](const Vector& w) -> Vector {
    return M.transpose() * (M * w - r);
  };
  Vector p = -residual_grad(v) / s.nu;
  Vector cur = v + p;
  double delta = -s.nu / 2.0;
  for (int i = 1; i < s.degree; ++i) {
    const double beta = s.rho / delta;
    delta = -(s.nu + beta);
    p = (residual_grad(cur) + beta * p) / delta;
    cur += p;
  }
  return cur;
}

Matrix mul_wprime(const Matrix& y, SimNet& net) {
  const ChebyshevSchedule s = wprime_schedule(net.gossip());
  Matrix p = -net.gossip(y) / s.nu;
  Matrix cur = y + p;
  double delta = -s.nu / 2.0;
  for (int i = 1; i < s.degree; ++i) {
    const double beta = s.rho / delta;
    delta = -(s.nu + beta);
    p = (net.gossip(cur) + beta * p) / delta;
    cur += p;
  }
  return y - cur;
}

namespace {

// B'(B u - b) in the lifted layout: (A' q, gamma W' q) with
// q = A x + gamma W' y - b.
LiftedVector lifted_normal_residual(const LiftedVector& u,
                                    const ProblemInstance& inst,
                                    double gamma, SimNet& net) {
  const Matrix q = net.apply_A(inst, u.x) + gamma * mul_wprime(u.y, net) -
                   inst.b_columns();
  return {net.apply_At(inst, q), gamma * mul_wprime(q, net)};
}

}  // namespace

LiftedVector k_chebyshev(const LiftedVector& u, const ProblemInstance& inst,
                         const DerivedConstants& dc, SimNet& net) {
  const ChebyshevSchedule s = b_schedule(dc);
  LiftedVector p = lifted_normal_residual(u, inst, dc.gamma, net);
  p *= -1.0 / s.nu;
  LiftedVector cur = u + p;
  double delta = -s.nu / 2.0;
  for (int i = 1; i < s.degree; ++i) {
    const double beta = s.rho / delta;
    delta = -(s.nu + beta);
    LiftedVector g = lifted_normal_residual(cur, inst, dc.gamma, net);
    g += beta * p;
    g *= 1.0 / delta;
    p = std::move(g);
    cur += p;
  }
  return u - cur;
}

Matrix dense_wprime(const GossipMatrix& gossip) {
  const ChebyshevSchedule s = wprime_schedule(gossip);
  return symmetric_function(gossip.W,
                            [&](double t) { return eval_scaled_chebyshev(t, s); });
}

Matrix dense_B(const ProblemInstance& inst, const DerivedConstants& dc,
               const GossipMatrix& gossip) {
  const Eigen::Index n = static_cast<Eigen::Index>(inst.n());
  const Eigen::Index m = inst.m();
  const Eigen::Index d = inst.total_dim();
  Matrix B = Matrix::Zero(n * m, d + n * m);
  for (std::size_t i = 0; i < inst.n(); ++i)
    B.block(static_cast<Eigen::Index>(i) * m, inst.offset(i), m, inst.dims()[i]) =
        inst.node(i).A;
  const Matrix Wp = dense_wprime(gossip);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (Wp(i, j) != 0.0)
        B.block(i * m, d + j * m, m, m) = dc.gamma * Wp(i, j) * Matrix::Identity(m, m);
  return B;
}

}  // namespace coupled

#include "coupled/lower_bound.hpp"

#include <cmath>
#include <vector>

#include "coupled/errors.hpp"
#include "coupled/graph.hpp"

namespace coupled {

namespace {

// dim x m pairing matrix with rows e_k - e_{k+1} for k = start, start+2, ...
// (1-based) as long as k+1 <= dim; other rows are zero.
Matrix pairing(std::size_t dim, std::size_t m, std::size_t start) {
  Matrix E = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(m));
  for (std::size_t k = start; k + 1 <= dim; k += 2) {
    const auto row = static_cast<Eigen::Index>(k - 1);
    E(row, row) = 1.0;
    E(row, row + 1) = -1.0;
  }
  return E;
}

}  // namespace

ProblemInstance gen_lower_bound_instance(std::size_t n, double L_f, double mu_f,
                                         double L_A, double mu_A,
                                         std::size_t dim) {
  if (n < 3 || n % 3 != 0) throw InvalidParam("node count must be a positive multiple of 3");
  if (dim < 2) throw InvalidParam("dim must be >= 2");
  if (!(L_f >= mu_f && mu_f > 0.0)) throw InvalidParam("need L_f >= mu_f > 0");
  if (!(mu_A > 0.0)) throw InvalidParam("need mu_A > 0");
  const double L_hat = 0.5 * L_A - 0.75 * mu_A;
  const double mu_hat = 1.5 * mu_A;
  if (!(L_hat >= 0.0)) throw InvalidParam("need L_A >= 1.5 mu_A");

  const std::size_t m = dim + 1;
  const auto di = static_cast<Eigen::Index>(dim);
  const auto mi = static_cast<Eigen::Index>(m);
  const double sl = std::sqrt(L_hat);
  const double sm = std::sqrt(mu_hat);

  const Matrix E1 = pairing(dim, m, 1);
  const Matrix E2 = pairing(dim, m, 2);

  Matrix A1(mi, di + mi), A2 = Matrix::Zero(mi, di + mi), A3(mi, di + mi);
  A1 << sl * E1.transpose(), sm * Matrix::Identity(mi, mi);
  A2(0, 0) = sl;
  A3 << sl * E2.transpose(), sm * Matrix::Identity(mi, mi);

  Vector qdiag(di + mi);
  qdiag << Vector::Constant(di, mu_f), Vector::Constant(mi, L_f);
  const double shift = sl / (2.0 * mu_f);
  Vector c = Vector::Zero(di + mi);
  c[0] = -mu_f * shift;
  const double offset = 0.5 * mu_f * shift * shift;

  std::vector<NodeData> nodes;
  const std::size_t g = n / 3;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& A = i < g ? A1 : (i < 2 * g ? A2 : A3);
    nodes.push_back({ObjectiveBlock::quadratic(qdiag.asDiagonal().toDenseMatrix(), c, offset),
                     A, Vector::Zero(mi)});
  }
  return ProblemInstance(make_graph(Topology::path, n), std::move(nodes));
}

double lower_bound_rate_q(double mu_A, double mu_f, double L_A, double L_f) {
  const double s = std::sqrt(mu_A * mu_f / (mu_A * mu_f + 2.0 * L_A * L_f));
  return (1.0 - s) / (1.0 + s);
}

Vector dual_minimizer(const ProblemInstance& inst) {
  if (!inst.all_quadratic()) throw InvalidParam("dual minimizer needs quadratic blocks");
  const Eigen::Index m = inst.m();
  Matrix H = Matrix::Zero(m, m);
  Vector rhs = inst.b_sum();
  for (const auto& nd : inst.nodes()) {
    Eigen::LDLT<Matrix> Qf(nd.f.Q());
    const Matrix QiAt = Qf.solve(nd.A.transpose());
    H += nd.A * QiAt;
    rhs += nd.A * Qf.solve(nd.f.c());
  }
  return H.ldlt().solve(rhs);
}

double geometric_decay_ratio(const Vector& z, Eigen::Index first, Eigen::Index last) {
  if (first < 0 || last >= z.size() || last - first < 1)
    throw InvalidParam("decay fit needs at least two coordinates in range");
  const Eigen::Index k = last - first + 1;
  Matrix X(k, 2);
  Vector y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = static_cast<double>(first + i);
    y[i] = std::log(std::abs(z[first + i]));
  }
  const Vector coef = X.colPivHouseholderQr().solve(y);
  return std::exp(coef[1]);
}

}  // namespace coupled

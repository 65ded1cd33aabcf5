#include "coupled/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "coupled/errors.hpp"

namespace coupled {

ObjectiveBlock ObjectiveBlock::quadratic(Matrix Q, Vector c, double offset) {
  if (Q.rows() != Q.cols() || Q.rows() != c.size() || Q.rows() == 0)
    throw ShapeMismatch("quadratic block: Q must be square and match c");
  if ((Q - Q.transpose()).norm() > 1e-12 * std::max(1.0, Q.norm()))
    throw InvalidParam("quadratic block: Q is not symmetric");
  Q = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw InvalidParam("quadratic block: Q is not positive definite");

  ObjectiveBlock b;
  b.kind_ = ObjectiveKind::quadratic;
  b.dim_ = Q.rows();
  b.L_ = hi;
  b.mu_ = lo;
  b.Q_ = std::move(Q);
  b.c_ = std::move(c);
  b.offset_ = offset;
  return b;
}

ObjectiveBlock ObjectiveBlock::oracle(std::string tag, Eigen::Index dim,
                                      GradFn grad, double L, double mu,
                                      ValueFn value) {
  if (dim <= 0) throw InvalidParam("oracle block: dimension must be positive");
  if (!grad) throw InvalidParam("oracle block: gradient callback is empty");
  if (!(L >= mu && mu > 0.0)) throw InvalidParam("oracle block: need L >= mu > 0");
  ObjectiveBlock b;
  b.kind_ = ObjectiveKind::oracle;
  b.dim_ = dim;
  b.L_ = L;
  b.mu_ = mu;
  b.tag_ = std::move(tag);
  b.grad_ = std::move(grad);
  b.value_ = std::move(value);
  return b;
}

Vector ObjectiveBlock::gradient(const Vector& x) const {
  if (x.size() != dim_) throw ShapeMismatch("gradient: wrong block size");
  if (kind_ == ObjectiveKind::quadratic) return Q_ * x + c_;
  Vector g = grad_(x);
  if (g.size() != dim_) throw ShapeMismatch("oracle gradient returned wrong size");
  return g;
}

double ObjectiveBlock::value(const Vector& x) const {
  if (kind_ == ObjectiveKind::quadratic)
    return 0.5 * x.dot(Q_ * x) + c_.dot(x) + offset_;
  if (value_) return value_(x);
  return std::numeric_limits<double>::quiet_NaN();
}

ProblemInstance::ProblemInstance(Graph graph, std::vector<NodeData> nodes)
    : graph_(std::move(graph)), nodes_(std::move(nodes)) {
  if (nodes_.size() != graph_.size())
    throw ShapeMismatch("block count must equal the graph's node count");
  if (nodes_.empty()) throw InvalidParam("instance has no nodes");
  m_ = nodes_.front().A.rows();
  if (m_ < 1) throw InvalidParam("constraint dimension m must be >= 1");

  L_f_ = 0.0;
  mu_f_ = std::numeric_limits<double>::infinity();
  b_cols_.resize(m_, static_cast<Eigen::Index>(nodes_.size()));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    if (nd.A.rows() != m_ || nd.b.size() != m_)
      throw ShapeMismatch("node " + std::to_string(i) + ": A_i/b_i row count differs from m");
    if (nd.A.cols() != nd.f.dim())
      throw ShapeMismatch("node " + std::to_string(i) + ": A_i columns differ from d_i");
    dims_.push_back(nd.f.dim());
    offsets_.push_back(total_dim_);
    total_dim_ += nd.f.dim();
    b_cols_.col(static_cast<Eigen::Index>(i)) = nd.b;
    L_f_ = std::max(L_f_, nd.f.L());
    mu_f_ = std::min(mu_f_, nd.f.mu());
  }

  const Matrix Abar = coupled_matrix();
  const Vector rhs = b_sum();
  const Vector x = Abar.completeOrthogonalDecomposition().solve(rhs);
  certificate_ = (Abar * x - rhs).norm();
  if (certificate_ > kTolFeas * (1.0 + rhs.norm()))
    throw InfeasibleInstance("coupled constraint has no solution (residual " +
                             std::to_string(certificate_) + ")");
}

bool ProblemInstance::all_quadratic() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const NodeData& nd) {
    return nd.f.kind() == ObjectiveKind::quadratic;
  });
}

Matrix ProblemInstance::coupled_matrix() const {
  Matrix out(m_, total_dim_);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    out.middleCols(offsets_[i], dims_[i]) = nodes_[i].A;
  return out;
}

double ProblemInstance::objective(const Vector& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    total += nodes_[i].f.value(block(x, i));
  return total;
}

Vector ProblemInstance::constraint_residual(const Vector& x) const {
  Vector r = Vector::Zero(m_);
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    r += nodes_[i].A * block(x, i) - nodes_[i].b;
  return r;
}

namespace {

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

Matrix random_orthogonal(std::mt19937_64& rng, Eigen::Index k) {
  const Matrix g = gaussian(rng, k, k);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(k, k);
  // Sign fix so the distribution does not depend on the QR convention.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

}  // namespace

ProblemInstance gen_synthetic_regression(std::size_t n, Eigen::Index d,
                                         Eigen::Index m, double theta,
                                         const Graph& graph, std::uint64_t seed,
                                         SyntheticOptions opts) {
  if (!(theta > 0.0)) throw InvalidParam("theta must be positive");
  if (graph.size() != n) throw InvalidParam("graph size differs from n");
  if (d < 1 || m < 1) throw InvalidParam("d and m must be >= 1");

  std::mt19937_64 rng(seed);
  std::vector<Matrix> As;
  std::vector<Vector> bs;
  std::vector<ObjectiveBlock> fs;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix C = gaussian(rng, d, d);
    Matrix A = gaussian(rng, m, d);
    Vector target = gaussian(rng, d, 1);
    Vector b = gaussian(rng, m, 1);
    if (opts.zero_C) C.setZero();
    Matrix Q = C.transpose() * C + theta * Matrix::Identity(d, d);
    Vector c = -C.transpose() * target;
    fs.push_back(ObjectiveBlock::quadratic(std::move(Q), std::move(c),
                                           0.5 * target.squaredNorm()));
    As.push_back(std::move(A));
    bs.push_back(std::move(b));
  }

  // Project sum_i b_i onto range [A_1 ... A_n]; the correction is split
  // equally across nodes.
  Matrix Abar(m, d * static_cast<Eigen::Index>(n));
  Vector bsum = Vector::Zero(m);
  for (std::size_t i = 0; i < n; ++i) {
    Abar.middleCols(d * static_cast<Eigen::Index>(i), d) = As[i];
    bsum += bs[i];
  }
  const Vector xls = Abar.completeOrthogonalDecomposition().solve(bsum);
  const Vector correction = bsum - Abar * xls;
  if (correction.norm() > 0.1 * kTolFeas * (1.0 + bsum.norm())) {
    for (auto& b : bs) b -= correction / static_cast<double>(n);
  }

  std::vector<NodeData> nodes;
  for (std::size_t i = 0; i < n; ++i)
    nodes.push_back({std::move(fs[i]), std::move(As[i]), std::move(bs[i])});
  return ProblemInstance(graph, std::move(nodes));
}

ProblemInstance gen_resource_allocation(std::size_t n, Eigen::Index d,
                                        const std::vector<Vector>& centers,
                                        const Vector& budget,
                                        const Graph& graph) {
  if (centers.size() != n) throw InvalidParam("need one center per node");
  if (graph.size() != n) throw InvalidParam("graph size differs from n");
  if (budget.size() != d) throw InvalidParam("budget dimension differs from d");
  std::vector<NodeData> nodes;
  for (const auto& c : centers) {
    if (c.size() != d) throw InvalidParam("center dimension differs from d");
    nodes.push_back({ObjectiveBlock::quadratic(Matrix::Identity(d, d), -c,
                                               0.5 * c.squaredNorm()),
                     Matrix::Identity(d, d), budget / static_cast<double>(n)});
  }
  return ProblemInstance(graph, std::move(nodes));
}

std::vector<Vector> resource_allocation_optimum(
    const std::vector<Vector>& centers, const Vector& budget) {
  Vector total = Vector::Zero(budget.size());
  for (const auto& c : centers) total += c;
  const Vector shift = (total - budget) / static_cast<double>(centers.size());
  std::vector<Vector> out;
  for (const auto& c : centers) out.push_back(c - shift);
  return out;
}

ProblemInstance gen_conditioned_quadratic(std::size_t n, Eigen::Index d,
                                          double kappa_f, double kappa_A,
                                          const Graph& graph,
                                          std::uint64_t seed) {
  if (graph.size() != n) throw InvalidParam("graph size differs from n");
  if (d < 2) throw InvalidParam("conditioned instances need d >= 2");
  if (!(kappa_f >= 1.0) || !(kappa_A >= 1.0))
    throw InvalidParam("condition numbers must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Matrix U = random_orthogonal(rng, d);
  Vector sigma(d);
  for (Eigen::Index k = 0; k < d; ++k)
    sigma[k] = std::sqrt(std::pow(kappa_A, static_cast<double>(k) / static_cast<double>(d - 1)));

  std::vector<NodeData> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix V = random_orthogonal(rng, d);
    const Matrix R = random_orthogonal(rng, d);
    Vector expo(d);
    for (Eigen::Index k = 0; k < d; ++k) expo[k] = unit(rng);
    if (i == 0) {
      expo[0] = 0.0;
      expo[1] = 1.0;
    }
    const Vector c = gaussian(rng, d, 1);
    const Vector b = gaussian(rng, d, 1);
    Vector eig(d);
    for (Eigen::Index k = 0; k < d; ++k) eig[k] = std::pow(kappa_f, expo[k]);
    Matrix Q = V * eig.asDiagonal() * V.transpose();
    Q = 0.5 * (Q + Q.transpose());
    Matrix A = U * sigma.asDiagonal() * R.transpose();
    nodes.push_back({ObjectiveBlock::quadratic(std::move(Q), c), std::move(A), b});
  }
  return ProblemInstance(graph, std::move(nodes));
}

}  // namespace coupled

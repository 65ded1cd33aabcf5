#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coupled/graph.hpp"
#include "coupled/linalg.hpp"

namespace coupled {

enum class ObjectiveKind { quadratic, oracle };

// Local objective f_i of one node. Quadratic blocks are
// f(x) = 1/2 x'Qx + c'x + offset; oracle blocks wrap a gradient callback
// with caller-certified smoothness and strong-convexity constants.
class ObjectiveBlock {
 public:
  using GradFn = std::function<Vector(const Vector&)>;
  using ValueFn = std::function<double(const Vector&)>;

  // Throws InvalidParam unless Q is symmetric positive definite.
  static ObjectiveBlock quadratic(Matrix Q, Vector c, double offset = 0.0);
  static ObjectiveBlock oracle(std::string tag, Eigen::Index dim, GradFn grad,
                               double L, double mu, ValueFn value = {});

  ObjectiveKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  double L() const { return L_; }
  double mu() const { return mu_; }

  // Quadratic-kind data; empty for oracle blocks.
  const Matrix& Q() const { return Q_; }
  const Vector& c() const { return c_; }
  double offset() const { return offset_; }
  const std::string& tag() const { return tag_; }

  Vector gradient(const Vector& x) const;
  // NaN for oracle blocks without a value callback.
  double value(const Vector& x) const;

 private:
  ObjectiveBlock() = default;

  ObjectiveKind kind_ = ObjectiveKind::quadratic;
  Eigen::Index dim_ = 0;
  double L_ = 0.0;
  double mu_ = 0.0;
  Matrix Q_;
  Vector c_;
  double offset_ = 0.0;
  std::string tag_;
  GradFn grad_;
  ValueFn value_;
};

struct NodeData {
  ObjectiveBlock f;
  Matrix A;  // m x d_i
  Vector b;  // m
};

inline constexpr double kTolFeas = 1e-10;

// min sum_i f_i(x_i)  s.t.  sum_i (A_i x_i - b_i) = 0  over a graph.
class ProblemInstance {
 public:
  // Validates shapes and certifies feasibility by least squares on the
  // row-concatenated system [A_1 ... A_n] x = sum_i b_i.
  ProblemInstance(Graph graph, std::vector<NodeData> nodes);

  const Graph& graph() const { return graph_; }
  std::size_t n() const { return nodes_.size(); }
  Eigen::Index m() const { return m_; }
  const std::vector<Eigen::Index>& dims() const { return dims_; }
  Eigen::Index offset(std::size_t i) const { return offsets_[i]; }
  Eigen::Index total_dim() const { return total_dim_; }
  const NodeData& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<NodeData>& nodes() const { return nodes_; }

  double L_f() const { return L_f_; }
  double mu_f() const { return mu_f_; }
  bool all_quadratic() const;

  // Per-node right-hand sides as the columns of an m x n matrix.
  const Matrix& b_columns() const { return b_cols_; }
  Vector b_sum() const { return b_cols_.rowwise().sum(); }
  // [A_1 ... A_n], m x total_dim.
  Matrix coupled_matrix() const;
  // Least-squares residual of the feasibility certificate.
  double feasibility_certificate() const { return certificate_; }

  auto block(Vector& x, std::size_t i) const {
    return x.segment(offsets_[i], dims_[i]);
  }
  auto block(const Vector& x, std::size_t i) const {
    return x.segment(offsets_[i], dims_[i]);
  }

  double objective(const Vector& x) const;
  Vector constraint_residual(const Vector& x) const;  // sum_i (A_i x_i - b_i)
  double feasibility_residual(const Vector& x) const {
    return constraint_residual(x).norm();
  }

 private:
  Graph graph_;
  std::vector<NodeData> nodes_;
  Eigen::Index m_ = 0;
  std::vector<Eigen::Index> dims_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index total_dim_ = 0;
  Matrix b_cols_;
  double L_f_ = 0.0;
  double mu_f_ = 0.0;
  double certificate_ = 0.0;
};

struct SyntheticOptions {
  bool zero_C = false;  // test hook: forces C_i = 0
};

// Regularized least squares sum_i 1/2||C_i x_i - d_i||^2 + theta/2||x_i||^2
// with standard normal C_i, A_i, d_i, b_i.
ProblemInstance gen_synthetic_regression(std::size_t n, Eigen::Index d,
                                         Eigen::Index m, double theta,
                                         const Graph& graph, std::uint64_t seed,
                                         SyntheticOptions opts = {});

// f_i = 1/2||x_i - c_i||^2, A_i = I, b_i = budget / n.
ProblemInstance gen_resource_allocation(std::size_t n, Eigen::Index d,
                                        const std::vector<Vector>& centers,
                                        const Vector& budget,
                                        const Graph& graph);

// Instance with exactly prescribed kappa_f and kappa_A (m = d, mu_f = 1,
// L_f = kappa_f, mu_A = 1, L_A = kappa_A). The random draws depend only on
// the seed, so sweeping one condition number keeps all other data fixed.
ProblemInstance gen_conditioned_quadratic(std::size_t n, Eigen::Index d,
                                          double kappa_f, double kappa_A,
                                          const Graph& graph,
                                          std::uint64_t seed);

// Closed-form optimum of the resource allocation problem.
std::vector<Vector> resource_allocation_optimum(
    const std::vector<Vector>& centers, const Vector& budget);

}  // namespace coupled

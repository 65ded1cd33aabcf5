#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>

namespace coupled {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A point (x, y) of the lifted space. x stacks the per-node primal blocks
// x_i in node order; y holds one m-vector per node as the columns of an
// m x n matrix, so its column-major storage is the node-major stacking.
struct LiftedVector {
  Vector x;
  Matrix y;

  LiftedVector() = default;
  LiftedVector(Vector x_part, Matrix y_part)
      : x(std::move(x_part)), y(std::move(y_part)) {}

  static LiftedVector zeros(Eigen::Index total_dim, Eigen::Index m,
                            Eigen::Index n) {
    return {Vector::Zero(total_dim), Matrix::Zero(m, n)};
  }

  LiftedVector& operator+=(const LiftedVector& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  LiftedVector& operator-=(const LiftedVector& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  LiftedVector& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  double squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }
  double dot(const LiftedVector& o) const {
    return x.dot(o.x) + (y.array() * o.y.array()).sum();
  }
  bool all_finite() const { return x.allFinite() && y.allFinite(); }

  // ||sum_i y_i||, the distance of the y-part from the zero-block-sum subspace
  // scaled by sqrt(n).
  double block_sum_norm() const { return y.rowwise().sum().norm(); }

  // Flattened (x, y) in node-major order.
  Vector stacked() const {
    Vector out(x.size() + y.size());
    out << x, Eigen::Map<const Vector>(y.data(), y.size());
    return out;
  }
};

inline LiftedVector operator+(LiftedVector a, const LiftedVector& b) {
  a += b;
  return a;
}
inline LiftedVector operator-(LiftedVector a, const LiftedVector& b) {
  a -= b;
  return a;
}
inline LiftedVector operator*(double s, LiftedVector a) {
  a *= s;
  return a;
}

// Extreme eigenvalues of a symmetric matrix; `min_positive` is the smallest
// eigenvalue above rel_tol * max(|lambda|), or 0 when none exists.
struct SymmetricSpectrum {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors;
  double max = 0.0;
  double min_positive = 0.0;
  std::size_t near_zero = 0;  // count of |lambda| <= rel_tol * max(|lambda|)
};

SymmetricSpectrum symmetric_spectrum(const Matrix& sym, double rel_tol,
                                     bool with_vectors = false);

// Applies a scalar function to the eigenvalues of a symmetric matrix.
template <typename Fn>
Matrix symmetric_function(const Matrix& sym, Fn&& fn) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector mapped = es.eigenvalues().unaryExpr(fn);
  return es.eigenvectors() * mapped.asDiagonal() *
         es.eigenvectors().transpose();
}

// Orthonormal basis (n x (n-1)) of the complement of the all-ones vector.
Matrix consensus_complement_basis(Eigen::Index n);

}  // namespace coupled

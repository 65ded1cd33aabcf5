#include "coupled/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "coupled/chebyshev.hpp"
#include "coupled/errors.hpp"

namespace coupled {

ReferenceSolution kkt_oracle(const ProblemInstance& inst) {
  if (!inst.all_quadratic()) throw InvalidParam("KKT oracle needs quadratic blocks");
  const Eigen::Index d = inst.total_dim();
  const Matrix Abar = inst.coupled_matrix();
  const Vector bsum = inst.b_sum();

  // Row-space basis: Abar = U S V', keep the rows of S V' with nonzero S.
  Eigen::BDCSVD<Matrix> svd(Abar, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = 1e-12 * std::max(1.0, s.size() > 0 ? s[0] : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > cutoff) ++rank;
  const Matrix U = svd.matrixU().leftCols(rank);
  const Matrix C = s.head(rank).asDiagonal() * svd.matrixV().leftCols(rank).transpose();
  const Vector rhs_c = U.transpose() * bsum;

  Matrix K = Matrix::Zero(d + rank, d + rank);
  Vector rhs(d + rank);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const auto& f = inst.node(i).f;
    K.block(inst.offset(i), inst.offset(i), f.dim(), f.dim()) = f.Q();
    rhs.segment(inst.offset(i), f.dim()) = -f.c();
  }
  K.topRightCorner(d, rank) = C.transpose();
  K.bottomLeftCorner(rank, d) = C;
  rhs.tail(rank) = rhs_c;

  Eigen::PartialPivLU<Matrix> lu(K);
  const double rcond = lu.rcond();
  if (!(rcond >= kKktRcond)) throw SingularKKT("KKT matrix is singular (rcond " + std::to_string(rcond) + ")");
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite()) throw SingularKKT("KKT solve produced non-finite values");

  ReferenceSolution out;
  out.x_star = sol.head(d);
  // Sign convention: stationarity Q x + c = Abar' lambda.
  out.multiplier = U * sol.tail(rank);
  out.multiplier *= -1.0;
  const Vector stat_res = [&] {
    Vector g(d);
    for (std::size_t i = 0; i < inst.n(); ++i)
      g.segment(inst.offset(i), inst.dims()[i]) =
          inst.node(i).f.gradient(inst.block(out.x_star, i));
    return Vector(g - Abar.transpose() * out.multiplier);
  }();
  const double feas_res = (Abar * out.x_star - bsum).norm();
  out.kkt_residual = std::sqrt(stat_res.squaredNorm() + feas_res * feas_res);
  return out;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& fn, const Vector& x,
                        double h) {
  if (!(h > 0.0)) throw InvalidParam("finite-difference step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = fn(probe);
    probe[i] = x[i] - h;
    const double down = fn(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

DenseLiftedOperators dense_lifted_operators(const ProblemInstance& inst,
                                            const DerivedConstants& dc,
                                            const GossipMatrix& gossip) {
  const Eigen::Index lifted =
      inst.total_dim() + static_cast<Eigen::Index>(inst.n()) * inst.m();
  if (lifted > kMaxDenseLiftedDim)
    throw DimensionTooLarge("lifted dimension " + std::to_string(lifted) +
                            " exceeds " + std::to_string(kMaxDenseLiftedDim));
  DenseLiftedOperators ops;
  ops.W_prime = dense_wprime(gossip);
  ops.B = dense_B(inst, dc, gossip);
  const ChebyshevSchedule sched = b_schedule(dc);
  const Matrix BtB = ops.B.transpose() * ops.B;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (BtB + BtB.transpose()));
  const Vector lam = es.eigenvalues();
  // Eigenvalues below rounding level belong to ker B and map to 0.
  const double floor = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  Vector p(lam.size()), root(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    p[i] = lam[i] <= floor ? 0.0 : eval_scaled_chebyshev(lam[i], sched);
    root[i] = std::sqrt(std::max(0.0, p[i]));
  }
  const Matrix& V = es.eigenvectors();
  ops.P_B_of_BtB = V * p.asDiagonal() * V.transpose();
  ops.K = V * root.asDiagonal() * V.transpose();
  return ops;
}

double lifted_objective(const ProblemInstance& inst, const DerivedConstants& dc,
                        const Matrix& W_prime, const LiftedVector& u) {
  Matrix q = -inst.b_columns();
  for (std::size_t i = 0; i < inst.n(); ++i)
    q.col(static_cast<Eigen::Index>(i)) += inst.node(i).A * inst.block(u.x, i);
  q += dc.gamma * u.y * W_prime;  // W' symmetric: column i gets sum_j W'_ij y_j
  return inst.objective(u.x) + 0.5 * dc.r * q.squaredNorm();
}

}  // namespace coupled

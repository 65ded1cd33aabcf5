#pragma once

#include <functional>

#include "coupled/graph.hpp"
#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"
#include "coupled/spectral.hpp"

namespace coupled {

struct ReferenceSolution {
  Vector x_star;
  Vector multiplier;  // m
  double kkt_residual = 0.0;
};

inline constexpr double kKktRcond = 1e-14;

// Dense solve of [blockdiag(Q), Abar'; Abar, 0] [x; lambda] = [-c; sum b].
// Rank-deficient Abar is first reduced to an orthonormal basis of its row
// space, so the multiplier is the minimum-norm one.
ReferenceSolution kkt_oracle(const ProblemInstance& inst);

Vector finite_diff_grad(const std::function<double(const Vector&)>& fn,
                        const Vector& x, double h);

struct DenseLiftedOperators {
  Matrix W_prime;     // n x n
  Matrix B;           // nm x (d + nm)
  Matrix P_B_of_BtB;  // (d + nm) square
  Matrix K;           // principal square root of P_B_of_BtB
};

inline constexpr Eigen::Index kMaxDenseLiftedDim = 2000;

DenseLiftedOperators dense_lifted_operators(const ProblemInstance& inst,
                                            const DerivedConstants& dc,
                                            const GossipMatrix& gossip);

// G(x, y) = F(x) + r/2 ||A x + gamma W' y - b||^2 evaluated densely.
double lifted_objective(const ProblemInstance& inst, const DerivedConstants& dc,
                        const Matrix& W_prime, const LiftedVector& u);

}  // namespace coupled

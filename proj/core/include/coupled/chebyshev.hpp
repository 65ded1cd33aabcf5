#pragma once

#include "coupled/graph.hpp"
#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"
#include "coupled/simnet.hpp"
#include "coupled/spectral.hpp"

namespace coupled {

// Schedule of the Chebyshev iteration for a matrix M whose nonzero squared
// singular values lie in [mu, L].
struct ChebyshevSchedule {
  int degree = 1;
  double rho = 0.0;  // (L - mu)^2 / 16
  double nu = 0.0;   // (L + mu) / 2
  double L = 0.0;
  double mu = 0.0;
};

// ceil(sqrt(ratio)), at least 1; ratios within rounding of a perfect square
// are not bumped up.
int chebyshev_degree(double ratio);

ChebyshevSchedule make_schedule(double L, double mu);
// Schedule for M = sqrt(W): bounds sqrt(L_W), sqrt(mu_W), degree ceil(sqrt(kappa_W)).
ChebyshevSchedule wprime_schedule(const GossipMatrix& gossip);
ChebyshevSchedule b_schedule(const DerivedConstants& dc);

// P(t) = 1 - T_n((L + mu - 2t)/(L - mu)) / T_n((L + mu)/(L - mu)), and t/L
// when L = mu.
double eval_scaled_chebyshev(double t, const ChebyshevSchedule& sched);

// Generic Chebyshev iteration on a dense M with right-hand side r:
// returns v^n, so that v - v^n = P(M'M)(v - v0) for any v0 with M v0 = r.
Vector chebyshev_iterate(const Matrix& M, const Vector& r, const Vector& v,
                         const ChebyshevSchedule& sched);

// W' y with W' = P(W) for the sqrt(W) schedule; uses exactly
// ceil(sqrt(kappa_W)) communication rounds.
Matrix mul_wprime(const Matrix& y, SimNet& net);

// K'(K u - b') for K = sqrt(P_B(B'B)), B = [A, gamma W'].
LiftedVector k_chebyshev(const LiftedVector& u, const ProblemInstance& inst,
                         const DerivedConstants& dc, SimNet& net);

// Dense W' = P(W) via eigendecomposition of W.
Matrix dense_wprime(const GossipMatrix& gossip);
// Dense B = [blockdiag(A_i), gamma (W' kron I_m)], of size nm x (d + nm).
Matrix dense_B(const ProblemInstance& inst, const DerivedConstants& dc,
               const GossipMatrix& gossip);

}  // namespace coupled

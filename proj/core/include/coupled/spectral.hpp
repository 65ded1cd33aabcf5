#pragma once

#include <vector>

#include "coupled/graph.hpp"
#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"

namespace coupled {

struct ConstraintSpectrum {
  double L_A = 0.0;   // max_i lambda_max(A_i A_i')
  double mu_A = 0.0;  // lambda_min^+(S)
  double kappa_A = 0.0;
  Matrix S;           // (1/n) sum_i A_i A_i'
};

ConstraintSpectrum constraint_spectrum(const std::vector<Matrix>& blocks);
ConstraintSpectrum constraint_spectrum(const ProblemInstance& inst);

// Constants of the lifted problem and its Chebyshev-preconditioned operators.
struct DerivedConstants {
  double L_f = 0.0;
  double mu_f = 0.0;
  double L_A = 0.0;
  double mu_A = 0.0;
  double r = 0.0;
  double gamma = 0.0;
  double L_Wp = 0.0;
  double mu_Wp = 0.0;
  double mu_G = 0.0;
  double L_G = 0.0;
  double kappa_G_bound = 0.0;  // L_G / mu_G
  double mu_B = 0.0;
  double L_B = 0.0;
  double kappa_B = 0.0;
  double L_K = 0.0;
  double mu_K = 0.0;
  double kappa_K = 0.0;
};

inline constexpr double kUpperCompression = 19.0 / 15.0;
inline constexpr double kLowerCompression = 11.0 / 15.0;

DerivedConstants derived_constants(double L_f, double mu_f,
                                   const ConstraintSpectrum& cs);
DerivedConstants derived_constants(const ProblemInstance& inst);

// 1e-8 * (1 + |bound|)
double bound_tolerance(double bound);

struct BoundReport {
  double lambda_min = 0.0;  // smallest eigenvalue on the relevant subspace
  double lambda_max = 0.0;
  double lower = 0.0;       // certified lower bound
  double upper = 0.0;       // certified upper bound
  bool ok() const;
};

// Hessian of G projected onto R^d x {y : sum_i y_i = 0}. Throws
// BoundViolated unless its spectrum lies in [mu_G, L_G] (up to tolerance).
BoundReport verify_lemma1_bounds(const ProblemInstance& inst,
                                 const DerivedConstants& dc,
                                 const GossipMatrix& gossip);

// Nonzero squared singular values of B = [A, gamma W'] against
// [mu_B, L_B]. Throws BoundViolated on failure.
BoundReport verify_lemma2_bounds(const ProblemInstance& inst,
                                 const DerivedConstants& dc,
                                 const GossipMatrix& gossip);

}  // namespace coupled

#pragma once

#include <cstddef>

#include "coupled/linalg.hpp"
#include "coupled/problem.hpp"

namespace coupled {

// Worst-case instance on a path of n nodes (n divisible by 3) split into
// three equal groups. Node variables are (p, t) with p in R^dim and
// t in R^(dim+1); the constraint dimension is m = dim + 1. With
// L_hat = L_A/2 - 3 mu_A/4 and mu_hat = 3 mu_A/2:
//   group 1: A_i = [sqrt(L_hat) E1', sqrt(mu_hat) I]
//   group 2: A_i = [sqrt(L_hat) e1 e1', 0]
//   group 3: A_i = [sqrt(L_hat) E2', sqrt(mu_hat) I]
// E1 pairs coordinates (1,2), (3,4), ...; E2 pairs (2,3), (4,5), ... within
// the first dim coordinates. The last constraint coordinate is left unpaired
// so that lambda_min^+(S) equals mu_A exactly.
// f_i(p, t) = mu_f/2 ||p - sqrt(L_hat)/(2 mu_f) e1||^2 + L_f/2 ||t||^2, b_i = 0.
ProblemInstance gen_lower_bound_instance(std::size_t n, double L_f, double mu_f,
                                         double L_A, double mu_A,
                                         std::size_t dim);

// Closed-form decay rate of the dual minimizer of the idealized instance:
// q = (1 - s)/(1 + s), s = sqrt(mu_A mu_f / (mu_A mu_f + 2 L_A L_f)).
double lower_bound_rate_q(double mu_A, double mu_f, double L_A, double L_f);

// Minimizer of sum_i f_i^*(A_i' z) - z' sum_i b_i for quadratic blocks.
Vector dual_minimizer(const ProblemInstance& inst);

// exp(slope) of a least-squares fit of log|z_k| over k in [first, last]
// (0-based, inclusive).
double geometric_decay_ratio(const Vector& z, Eigen::Index first,
                             Eigen::Index last);

}  // namespace coupled

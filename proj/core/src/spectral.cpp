#include "coupled/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "coupled/chebyshev.hpp"
#include "coupled/errors.hpp"

namespace coupled {

ConstraintSpectrum constraint_spectrum(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw InvalidParam("no constraint blocks");
  const Eigen::Index m = blocks.front().rows();
  if (m < 1) throw InvalidParam("constraint dimension m must be >= 1");
  ConstraintSpectrum cs;
  cs.S = Matrix::Zero(m, m);
  for (const auto& A : blocks) {
    if (A.rows() != m) throw ShapeMismatch("constraint blocks differ in row count");
    const Matrix AAt = A * A.transpose();
    cs.S += AAt;
    if (AAt.size() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(AAt, Eigen::EigenvaluesOnly);
      cs.L_A = std::max(cs.L_A, es.eigenvalues().maxCoeff());
    }
  }
  cs.S /= static_cast<double>(blocks.size());
  const SymmetricSpectrum sp = symmetric_spectrum(cs.S, kTolPsd);
  if (!(sp.max > 0.0)) throw DegenerateConstraints("all constraint blocks are zero");
  cs.mu_A = sp.min_positive;
  cs.kappa_A = cs.L_A / cs.mu_A;
  return cs;
}

ConstraintSpectrum constraint_spectrum(const ProblemInstance& inst) {
  std::vector<Matrix> blocks;
  blocks.reserve(inst.n());
  for (const auto& nd : inst.nodes()) blocks.push_back(nd.A);
  return constraint_spectrum(blocks);
}

DerivedConstants derived_constants(double L_f, double mu_f,
                                   const ConstraintSpectrum& cs) {
  if (!(L_f >= mu_f && mu_f > 0.0)) throw InvalidParam("need L_f >= mu_f > 0");
  DerivedConstants dc;
  dc.L_f = L_f;
  dc.mu_f = mu_f;
  dc.L_A = cs.L_A;
  dc.mu_A = cs.mu_A;
  dc.L_Wp = kUpperCompression * kUpperCompression;
  dc.mu_Wp = kLowerCompression * kLowerCompression;
  dc.r = mu_f / (2.0 * cs.L_A);
  dc.gamma = std::sqrt((cs.mu_A + cs.L_A) / dc.mu_Wp);
  const double w_ratio = dc.L_Wp / dc.mu_Wp;
  dc.mu_G = mu_f * std::min(0.5, (cs.mu_A + cs.L_A) / (4.0 * cs.L_A));
  dc.L_G = std::max(L_f + mu_f, mu_f * ((cs.mu_A + cs.L_A) / cs.L_A) * w_ratio);
  dc.kappa_G_bound = dc.L_G / dc.mu_G;
  dc.mu_B = cs.mu_A / 2.0;
  dc.L_B = cs.L_A + (cs.L_A + cs.mu_A) * w_ratio;
  dc.kappa_B = dc.L_B / dc.mu_B;
  dc.L_K = kUpperCompression;
  dc.mu_K = kLowerCompression;
  dc.kappa_K = dc.L_K / dc.mu_K;
  return dc;
}

DerivedConstants derived_constants(const ProblemInstance& inst) {
  return derived_constants(inst.L_f(), inst.mu_f(), constraint_spectrum(inst));
}

double bound_tolerance(double bound) { return 1e-8 * (1.0 + std::abs(bound)); }

bool BoundReport::ok() const {
  return lambda_min >= lower - bound_tolerance(lower) &&
         lambda_max <= upper + bound_tolerance(upper);
}

namespace {

void require(const BoundReport& rep, const char* what) {
  if (rep.lambda_min < rep.lower - bound_tolerance(rep.lower))
    throw BoundViolated(std::string(what) + " lower", rep.lambda_min, rep.lower);
  if (rep.lambda_max > rep.upper + bound_tolerance(rep.upper))
    throw BoundViolated(std::string(what) + " upper", rep.lambda_max, rep.upper);
}

}  // namespace

BoundReport verify_lemma1_bounds(const ProblemInstance& inst,
                                 const DerivedConstants& dc,
                                 const GossipMatrix& gossip) {
  if (!inst.all_quadratic())
    throw InvalidParam("Hessian check needs quadratic objective blocks");
  const Eigen::Index n = static_cast<Eigen::Index>(inst.n());
  const Eigen::Index m = inst.m();
  const Eigen::Index d = inst.total_dim();

  Matrix Qbd = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < inst.n(); ++i)
    Qbd.block(inst.offset(i), inst.offset(i), inst.dims()[i], inst.dims()[i]) =
        inst.node(i).f.Q();

  // Hessian of G = F + r/2 ||B u - b||^2 is blockdiag(Q, 0) + r B'B.
  const Matrix B = dense_B(inst, dc, gossip);
  Matrix H = dc.r * (B.transpose() * B);
  H.topLeftCorner(d, d) += Qbd;

  // Basis of R^d x {y : sum_i y_i = 0}.
  const Matrix helmert = consensus_complement_basis(n);
  Matrix P = Matrix::Zero(d + n * m, d + (n - 1) * m);
  P.topLeftCorner(d, d).setIdentity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n - 1; ++k)
      if (helmert(i, k) != 0.0)
        P.block(d + i * m, d + k * m, m, m) = helmert(i, k) * Matrix::Identity(m, m);

  const Matrix Hp = P.transpose() * H * P;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Hp + Hp.transpose()),
                                           Eigen::EigenvaluesOnly);
  BoundReport rep;
  rep.lambda_min = es.eigenvalues().minCoeff();
  rep.lambda_max = es.eigenvalues().maxCoeff();
  rep.lower = dc.mu_G;
  rep.upper = dc.L_G;
  require(rep, "projected Hessian of G");
  return rep;
}

BoundReport verify_lemma2_bounds(const ProblemInstance& inst,
                                 const DerivedConstants& dc,
                                 const GossipMatrix& gossip) {
  const Matrix B = dense_B(inst, dc, gossip);
  Eigen::BDCSVD<Matrix> svd(B);
  const Vector sigma = svd.singularValues();  // descending
  BoundReport rep;
  rep.lambda_max = sigma[0] * sigma[0];
  rep.lambda_min = rep.lambda_max;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    const double s2 = sigma[k] * sigma[k];
    if (s2 > kTolPsd * rep.lambda_max) rep.lambda_min = s2;
  }
  rep.lower = dc.mu_B;
  rep.upper = dc.L_B;
  require(rep, "squared singular values of B");
  return rep;
}

}  // namespace coupled

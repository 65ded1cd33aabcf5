#include "coupled/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace coupled {

SymmetricSpectrum symmetric_spectrum(const Matrix& sym, double rel_tol,
                                     bool with_vectors) {
  SymmetricSpectrum out;
  if (sym.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      sym, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  if (with_vectors) out.eigenvectors = es.eigenvectors();
  const double scale = out.eigenvalues.cwiseAbs().maxCoeff();
  out.max = out.eigenvalues.maxCoeff();
  const double cut = rel_tol * scale;
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    const double lam = out.eigenvalues[i];
    if (std::abs(lam) <= cut) {
      ++out.near_zero;
    } else if (lam > 0.0 && (out.min_positive == 0.0 || lam < out.min_positive)) {
      out.min_positive = lam;
    }
  }
  return out;
}

Matrix consensus_complement_basis(Eigen::Index n) {
  // Helmert-style basis: column k is orthogonal to ones and to columns < k.
  Matrix basis = Matrix::Zero(n, std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 1; k < n; ++k) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(k * (k + 1)));
    for (Eigen::Index i = 0; i < k; ++i) basis(i, k - 1) = scale;
    basis(k, k - 1) = -static_cast<double>(k) * scale;
  }
  return basis;
}

}  // namespace coupled

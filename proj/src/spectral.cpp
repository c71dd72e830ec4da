#include "lps/operators.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace lps {

CMatrix SpectralDecomposition::reconstruct() const { return reconstruct(sigma); }

CMatrix SpectralDecomposition::reconstruct(const RVector& values) const {
  if (values.size() != sigma.size())
    throw ValidationError("replacement spectrum has length " + std::to_string(values.size()) +
                          ", expected " + std::to_string(sigma.size()));
  return U * values.cast<Complex>().asDiagonal() * V.adjoint();
}

SpectralDecomposition svd(const CMatrix& m) {
  if (m.rows() < m.cols())
    throw ValidationError("svd expects a tall matrix (rows >= cols), got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  if (!all_finite(m)) throw NumericalError("svd: input contains non-finite values");

  Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw NumericalError("svd: factorization did not converge");

  SpectralDecomposition out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  if (!out.sigma.allFinite()) throw NumericalError("svd: non-finite singular values");
  return out;
}

CMatrix sv_threshold(const CMatrix& m, double lambda) {
  if (!(lambda >= 0.0)) throw ValidationError("threshold must be >= 0");
  const auto dec = svd(m);
  const RVector shrunk = dec.sigma.unaryExpr([lambda](double s) { return std::max(s - lambda, 0.0); });
  return dec.reconstruct(shrunk);
}

CMatrix apply_sigma_prior(const CMatrix& m, const RVector& sigma_prev, double lambda_p) {
  if (!(lambda_p >= 0.0 && lambda_p <= 1.0)) throw ValidationError("lambda_p must lie in [0, 1]");
  if (sigma_prev.size() != m.cols())
    throw ValidationError("prior spectrum has length " + std::to_string(sigma_prev.size()) +
                          ", expected " + std::to_string(m.cols()));
  const auto dec = svd(m);
  // Gradient step on 0.5 * ||sigma - sigma_prev||^2.
  const RVector stepped = dec.sigma - lambda_p * (dec.sigma - sigma_prev);
  return dec.reconstruct(stepped.cwiseMax(0.0));
}

CMatrix sv_threshold_with_prior(const CMatrix& m, double lambda, const RVector& sigma_prev,
                                double lambda_p) {
  if (!(lambda >= 0.0)) throw ValidationError("threshold must be >= 0");
  if (!(lambda_p >= 0.0 && lambda_p <= 1.0)) throw ValidationError("lambda_p must lie in [0, 1]");
  if (sigma_prev.size() != m.cols())
    throw ValidationError("prior spectrum has length " + std::to_string(sigma_prev.size()) +
                          ", expected " + std::to_string(m.cols()));
  const auto dec = svd(m);
  const RVector shrunk = dec.sigma.unaryExpr([lambda](double s) { return std::max(s - lambda, 0.0); });
  if (lambda_p == 0.0) return dec.reconstruct(shrunk);
  const RVector stepped = shrunk - lambda_p * (shrunk - sigma_prev);
  return dec.reconstruct(stepped.cwiseMax(0.0));
}

SupportSet extract_support(const CMatrix& w, double support_eps) {
  if (!(support_eps > 0.0 && support_eps < 1.0))
    throw ValidationError("support_eps must lie in (0, 1)");
  const double peak = w.size() > 0 ? w.cwiseAbs().maxCoeff() : 0.0;
  if (peak == 0.0) return {};
  const double cut = support_eps * peak;
  std::vector<MatrixIndex> idx;
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      if (std::abs(w(r, c)) > cut)
        idx.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
  return SupportSet(std::move(idx));
}

}  // namespace lps

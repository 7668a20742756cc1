#include "binaural/linalg.hpp"

#include <cmath>

#include "binaural/errors.hpp"

namespace binaural {

namespace {

void require_square(const CMatrix& A, const char* who) {
  if (A.rows() != A.cols())
    throw DimensionMismatch(std::string(who) + ": matrix must be square");
  if (A.rows() == 0) throw DimensionMismatch(std::string(who) + ": empty matrix");
}

void require_finite(const CMatrix& A, const char* who) {
  if (!A.allFinite())
    throw NonFiniteInput(std::string(who) + ": matrix has NaN/Inf entries");
}

void require_finite(const CVector& v, const char* who) {
  if (!v.allFinite())
    throw NonFiniteInput(std::string(who) + ": vector has NaN/Inf entries");
}

// LLT with the loading schedule from the header comment.
Eigen::LLT<CMatrix> llt_with_loading(const CMatrix& A) {
  Eigen::LLT<CMatrix> llt(A);
  if (llt.info() == Eigen::Success) return llt;

  const Index m = A.rows();
  double eps = 1e-10 * A.real().trace() / static_cast<double>(m);
  if (!(eps > 0.0)) eps = 1e-300;  // zero/negative trace: start from denormal floor
  for (int attempt = 0; attempt < 3; ++attempt) {
    CMatrix loaded = A;
    loaded.diagonal().array() += Complex(eps, 0.0);
    llt.compute(loaded);
    if (llt.info() == Eigen::Success) return llt;
    eps *= 10.0;
  }
  throw NotPositiveDefinite("cholesky_pd: matrix not positive definite after diagonal loading");
}

}  // namespace

bool is_hermitian(const CMatrix& A, double rel_tol) {
  if (A.rows() != A.cols()) return false;
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  const double asym = (A - A.adjoint()).cwiseAbs().maxCoeff();
  return asym <= rel_tol * scale;
}

bool check_psd(const CMatrix& A, double tol) {
  require_square(A, "check_psd");
  require_finite(A, "check_psd");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NoConvergence("check_psd: eigensolver failed");
  const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
  return es.eigenvalues().minCoeff() >= -tol * norm;
}

Eigen::LLT<CMatrix> cholesky_pd(const CMatrix& A) {
  require_square(A, "cholesky_pd");
  require_finite(A, "cholesky_pd");
  return llt_with_loading(A);
}

CVector herm_solve(const CMatrix& A, const CVector& b) {
  require_square(A, "herm_solve");
  if (b.size() != A.rows())
    throw DimensionMismatch("herm_solve: rhs length does not match matrix");
  require_finite(A, "herm_solve");
  require_finite(b, "herm_solve");
  return cholesky_pd(A).solve(b);
}

HermSolver::HermSolver(const CMatrix& A) : llt_(cholesky_pd(A)) {}

CVector HermSolver::solve(const CVector& b) const {
  if (b.size() != dim()) throw DimensionMismatch("HermSolver: rhs length mismatch");
  return llt_.solve(b);
}

GevdResult gevd_principal(const CMatrix& A, const CMatrix& B) {
  require_square(A, "gevd_principal");
  require_square(B, "gevd_principal");
  if (A.rows() != B.rows())
    throw DimensionMismatch("gevd_principal: pencil matrices differ in size");
  require_finite(A, "gevd_principal");
  require_finite(B, "gevd_principal");

  const auto llt = cholesky_pd(B);
  const CMatrix L = llt.matrixL();
  // S = L^{-1} A L^{-H}, symmetrized to keep the solver on the Hermitian path.
  CMatrix S = L.triangularView<Eigen::Lower>().solve(A);
  S = L.triangularView<Eigen::Lower>().solve(S.adjoint().eval()).adjoint();
  S = 0.5 * (S + S.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  if (es.info() != Eigen::Success)
    throw NoConvergence("gevd_principal: eigensolver failed");

  const Index last = S.rows() - 1;  // eigenvalues ascending
  GevdResult out;
  out.eigenvalue = es.eigenvalues()(last);
  CVector phi = es.eigenvectors().col(last);
  // Back-substitute to the generalized eigenvector: v = L^{-H} phi.
  CVector v = L.adjoint().triangularView<Eigen::Upper>().solve(phi);
  out.eigenvector = v / v.norm();
  return out;
}

}  // namespace binaural

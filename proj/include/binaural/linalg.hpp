// linalg.hpp
// Complex Hermitian kernel: positive-definite solves with diagonal loading,
// dominant generalized eigenpair, and PSD checks. Everything downstream
// (beamformers, RTF estimation) funnels its R_n^{-1}-style products through
// herm_solve so the loading policy lives in one place.

#ifndef BINAURAL_LINALG_HPP
#define BINAURAL_LINALG_HPP

#include "binaural/types.hpp"

namespace binaural {

// Relative symmetry error max|A - A^H| / max|A|; zero matrix counts as Hermitian.
bool is_hermitian(const CMatrix& A, double rel_tol = 1e-12);

// True iff the smallest eigenvalue of Hermitian A is >= -tol * ||A||_2.
bool check_psd(const CMatrix& A, double tol);

// Cholesky factor of A, retrying with diagonal loading eps = 1e-10 tr(A)/M,
// eps *= 10 per retry (3 retries). Throws NotPositiveDefinite when all fail.
Eigen::LLT<CMatrix> cholesky_pd(const CMatrix& A);

// Solves A x = b for Hermitian positive definite A via Cholesky.
CVector herm_solve(const CMatrix& A, const CVector& b);

// Convenience for repeated right-hand sides against the same matrix.
class HermSolver {
 public:
  explicit HermSolver(const CMatrix& A);
  CVector solve(const CVector& b) const;
  Index dim() const { return llt_.matrixL().rows(); }

 private:
  Eigen::LLT<CMatrix> llt_;
};

struct GevdResult {
  double eigenvalue = 0.0;
  CVector eigenvector;  // unit 2-norm, satisfies A v = eigenvalue * B v
};

// Dominant generalized eigenpair of (A, B), A Hermitian, B Hermitian PD.
// Realized as a standard Hermitian EVD of L^{-1} A L^{-H} with B = L L^H.
GevdResult gevd_principal(const CMatrix& A, const CMatrix& B);

}  // namespace binaural

#endif

#include "binaural/beamformers.hpp"

#include <cmath>

#include "binaural/errors.hpp"
#include "binaural/linalg.hpp"

namespace binaural {

namespace {

void require_steering(const CMatrix& R_n, const CVector& a, const char* who) {
  if (a.size() != R_n.rows())
    throw DimensionMismatch(std::string(who) + ": steering vector length mismatch");
  if (!a.allFinite()) throw NonFiniteInput(std::string(who) + ": steering vector not finite");
  if (a.norm() == 0.0) throw ZeroAtf(std::string(who) + ": zero steering vector");
}

void require_eta(double eta, const char* who) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw PreconditionError(std::string(who) + ": eta must lie in [0, 1]");
}

// Solves the 2x2 Hermitian system G t = g with partial pivoting, where
// G = C^H R_n^{-1} C = [[gamma_a, gamma_ab], [gamma_ab^*, gamma_b]].
void solve_constraint_system(const Gammas& g, Complex rhs0, Complex rhs1, Complex& t0,
                             Complex& t1) {
  if (g.psi >= 1.0 - kPsiDegenerate)
    throw DegenerateConstraints("blcmv: steering vectors are numerically collinear");

  Complex m00(g.gamma_a, 0.0), m01 = g.gamma_ab;
  Complex m10 = std::conj(g.gamma_ab), m11(g.gamma_b, 0.0);
  Complex r0 = rhs0, r1 = rhs1;
  bool swapped = false;
  if (std::abs(m10) > std::abs(m00)) {
    std::swap(m00, m10);
    std::swap(m01, m11);
    std::swap(r0, r1);
    swapped = true;
  }
  (void)swapped;
  const Complex factor = m10 / m00;
  const Complex denom = m11 - factor * m01;
  t1 = (r1 - factor * r0) / denom;
  t0 = (r0 - m01 * t1) / m00;
}

// Shared two-constraint minimizer: w = ra t0 + rb t1 with
// [t0, t1] = (C^H R_n^{-1} C)^{-1} [rhs0, rhs1].
CVector constrained_filter(const HermSolver& solver, const CVector& a, const CVector& b,
                           Complex rhs0, Complex rhs1) {
  const CVector ra = solver.solve(a);
  const CVector rb = solver.solve(b);
  Gammas g;
  g.gamma_a = std::real(a.dot(ra));
  g.gamma_b = std::real(b.dot(rb));
  g.gamma_ab = a.dot(rb);
  g.psi = std::norm(g.gamma_ab) / (g.gamma_a * g.gamma_b);
  Complex t0, t1;
  solve_constraint_system(g, rhs0, rhs1, t0, t1);
  return ra * t0 + rb * t1;
}

}  // namespace

Gammas gammas(const CMatrix& R_n, const CVector& a, const CVector& b) {
  require_steering(R_n, a, "gammas");
  require_steering(R_n, b, "gammas");
  const HermSolver solver(R_n);
  const CVector ra = solver.solve(a);
  const CVector rb = solver.solve(b);
  Gammas g;
  g.gamma_a = std::real(a.dot(ra));
  g.gamma_b = std::real(b.dot(rb));
  g.gamma_ab = a.dot(rb);  // a^H R_n^{-1} b
  g.psi = std::norm(g.gamma_ab) / (g.gamma_a * g.gamma_b);
  return g;
}

CVector bmvdr(const CMatrix& R_n, const CVector& a, Complex a_ref) {
  require_steering(R_n, a, "bmvdr");
  const CVector ra = herm_solve(R_n, a);
  const double gamma_a = std::real(a.dot(ra));
  return ra * (std::conj(a_ref) / gamma_a);
}

CVector blcmv(const CMatrix& R_n, const CVector& a, const CVector& b, Complex a_ref,
              Complex b_ref, double delta) {
  require_steering(R_n, a, "blcmv");
  require_steering(R_n, b, "blcmv");
  const HermSolver solver(R_n);
  return constrained_filter(solver, a, b, std::conj(a_ref), delta * std::conj(b_ref));
}

CVector bmvdr_n(const CMatrix& R_n, const CVector& a, Complex a_ref, Index ref_index,
                double eta) {
  require_eta(eta, "bmvdr_n");
  if (ref_index < 0 || ref_index >= a.size())
    throw PreconditionError("bmvdr_n: reference index out of range");
  CVector w = (1.0 - eta) * bmvdr(R_n, a, a_ref);
  w(ref_index) += eta;
  return w;
}

double adjusted_delta(double delta, double eta) {
  if (eta >= 1.0)
    throw EtaOneDeltaNotOne("adjusted_delta: undefined for eta = 1");
  return (delta - eta) / (1.0 - eta);
}

CVector blcmv_n(const CMatrix& R_n, const CVector& a, const CVector& b, Complex a_ref,
                Complex b_ref, Index ref_index, double delta, double eta) {
  require_eta(eta, "blcmv_n");
  require_steering(R_n, a, "blcmv_n");
  require_steering(R_n, b, "blcmv_n");
  if (ref_index < 0 || ref_index >= a.size())
    throw PreconditionError("blcmv_n: reference index out of range");

  if (eta == 1.0) {
    // Mixing everything back in leaves no freedom; only delta = 1 is feasible.
    if (delta != 1.0)
      throw EtaOneDeltaNotOne("blcmv_n: eta = 1 requires delta = 1");
    CVector w = CVector::Zero(a.size());
    w(ref_index) = 1.0;
    return w;
  }

  // Direct Lagrangian form: the response vector already carries the
  // (1-eta) / (delta-eta) scalings, so eta = 0 reproduces blcmv bit for bit.
  const HermSolver solver(R_n);
  CVector w = constrained_filter(solver, a, b, (1.0 - eta) * std::conj(a_ref),
                                 (delta - eta) * std::conj(b_ref));
  w(ref_index) += eta;
  return w;
}

SubBlcmv decompose_sub_blcmv(const CMatrix& R_n, const CVector& a, const CVector& b,
                             Complex a_ref, Complex b_ref) {
  require_steering(R_n, a, "decompose_sub_blcmv");
  require_steering(R_n, b, "decompose_sub_blcmv");
  const HermSolver solver(R_n);
  SubBlcmv out;
  out.w_x = constrained_filter(solver, a, b, std::conj(a_ref), Complex(0.0, 0.0));
  out.w_u = constrained_filter(solver, a, b, Complex(0.0, 0.0), std::conj(b_ref));
  return out;
}

CommonFilters common_filters(const CMatrix& R_n, const CVector& a, const CVector& b) {
  const Gammas g = gammas(R_n, a, b);
  if (g.psi >= 1.0 - kPsiDegenerate)
    throw DegenerateConstraints("common_filters: steering vectors are numerically collinear");
  const HermSolver solver(R_n);
  const CVector ra = solver.solve(a);
  const CVector rb = solver.solve(b);
  // psi / gamma_ab = gamma_ab^* / (gamma_a gamma_b), well-defined for
  // orthogonal steering vectors (gamma_ab = 0).
  const Complex psi_over_gab = std::conj(g.gamma_ab) / (g.gamma_a * g.gamma_b);
  const Complex psi_over_gab_conj = g.gamma_ab / (g.gamma_a * g.gamma_b);
  const double s = 1.0 / (1.0 - g.psi);
  CommonFilters out;
  out.w_x = s * (ra / g.gamma_a - psi_over_gab * rb);
  out.w_u = s * (rb / g.gamma_b - psi_over_gab_conj * ra);
  return out;
}

CVector compute_filter(const BeamformerInputs& in, Algorithm algo, Side side, double delta,
                       double eta) {
  switch (algo) {
    case Algorithm::Bmvdr:
      return bmvdr(in.R_n, in.a, in.a_ref(side));
    case Algorithm::Blcmv:
      return blcmv(in.R_n, in.a, in.b, in.a_ref(side), in.b_ref(side), delta);
    case Algorithm::BmvdrN:
      return bmvdr_n(in.R_n, in.a, in.a_ref(side), in.ref(side), eta);
    case Algorithm::BlcmvN:
      return blcmv_n(in.R_n, in.a, in.b, in.a_ref(side), in.b_ref(side), in.ref(side), delta,
                     eta);
  }
  throw PreconditionError("compute_filter: unknown algorithm");
}

BeamformerPair compute_pair(const BeamformerInputs& in, Algorithm algo, double delta,
                            double eta) {
  BeamformerPair pair;
  pair.w_left = compute_filter(in, algo, Side::Left, delta, eta);
  pair.w_right = compute_filter(in, algo, Side::Right, delta, eta);
  pair.algorithm = algo;
  pair.delta = delta;
  pair.eta = eta;
  return pair;
}

}  // namespace binaural

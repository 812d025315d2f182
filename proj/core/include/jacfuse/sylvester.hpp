#pragma once

#include "jacfuse/matrix.hpp"

namespace jacfuse {

// Operands of the structured Sylvester equation A*W + W*B = B that the
// regularized Jacobian loss reduces to. A = kappa * J^2 is symmetric PSD,
// B = (W_head W_head^T)^-1 is symmetric PD, kappa = 1/gamma - 1 >= 0.
// The constructor validates symmetry and the spectral invariants.
class SylvesterOperands {
 public:
  SylvesterOperands(Matrix a, Matrix b, double kappa);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  double kappa() const { return kappa_; }
  std::size_t dim() const { return a_.rows(); }

 private:
  Matrix a_;
  Matrix b_;
  double kappa_ = 0.0;
};

// Production solver. Eigendecomposes both operands (A = U L U^T, B = V M V^T)
// and divides the transformed right-hand side entrywise by lambda_i + mu_j.
// Cost is O(K^3), matching the cost of inverting one K x K matrix.
// Throws DegenerateSpectrum when some lambda_i + mu_j <= 1e-12, i.e. when the
// operand spectra (numerically) share an eigenvalue and uniqueness is lost.
Matrix solve_structured(const SylvesterOperands& ops);

// Test oracle: vectorizes the equation as (I (x) A + B^T (x) I) vec(W) = vec(B)
// and solves the K^2 x K^2 dense system by LU. O(K^6); restricted to K <= 16.
// Retained as an independent route for cross-checking solve_structured.
Matrix solve_kronecker_oracle(const SylvesterOperands& ops);

// ||A*W + W*B - B||_F for a candidate solution W.
double residual(const SylvesterOperands& ops, const Matrix& w);

}  // namespace jacfuse

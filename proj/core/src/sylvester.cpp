#include "jacfuse/sylvester.hpp"

#include <cmath>
#include <string>

#include "jacfuse/errors.hpp"

namespace jacfuse {

namespace {

void require_symmetric(const Matrix& m, const char* what) {
  double asym = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = r + 1; c < m.cols(); ++c) {
      const double d = m(r, c) - m(c, r);
      asym += 2.0 * d * d;
    }
  const double fro = frobenius_norm(m);
  if (std::sqrt(asym) > 1e-9 * std::max(fro, 1e-300)) {
    throw DomainError(std::string(what) + ": not symmetric within 1e-9 relative");
  }
}

// Column-stacking vectorization, matching vec(AWB) = (B^T (x) A) vec(W).
Vector vec(const Matrix& m) {
  Vector out(m.rows() * m.cols(), 0.0);
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = 0; r < m.rows(); ++r) out[c * m.rows() + r] = m(r, c);
  return out;
}

Matrix unvec(const Vector& v, std::size_t rows, std::size_t cols) {
  Matrix out(rows, cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = v[c * rows + r];
  return out;
}

}  // namespace

SylvesterOperands::SylvesterOperands(Matrix a, Matrix b, double kappa)
    : a_(std::move(a)), b_(std::move(b)), kappa_(kappa) {
  if (a_.rows() != a_.cols() || b_.rows() != b_.cols() || a_.rows() != b_.rows()) {
    throw DimensionError("SylvesterOperands: operands must be square and same size");
  }
  if (!(kappa_ >= 0.0)) throw DomainError("SylvesterOperands: kappa must be >= 0");
  require_symmetric(a_, "SylvesterOperands.a");
  require_symmetric(b_, "SylvesterOperands.b");
  // Symmetrize exactly so the eigensolvers see clean inputs.
  a_ = scale(add(a_, transpose(a_)), 0.5);
  b_ = scale(add(b_, transpose(b_)), 0.5);
  const SymEig ea = sym_eig(a_);
  if (ea.eigenvalues[0] < -1e-9 * std::max(frobenius_norm(a_), 1e-300)) {
    throw DomainError("SylvesterOperands: a is not PSD");
  }
  const SymEig eb = sym_eig(b_);
  if (!(eb.eigenvalues[0] > 1e-12 * frobenius_norm(b_))) {
    throw DomainError("SylvesterOperands: b is not positive definite");
  }
}

Matrix solve_structured(const SylvesterOperands& ops) {
  const SymEig ea = sym_eig(ops.a());
  const SymEig eb = sym_eig(ops.b());
  const Matrix& u = ea.eigenvectors;
  const Matrix& v = eb.eigenvectors;

  // U^T (A W + W B) V = L Y + Y M with Y = U^T W V, so Y_ij = C_ij/(l_i+m_j).
  const Matrix c = matmul(transpose(u), matmul(ops.b(), v));
  const std::size_t k = ops.dim();
  Matrix y(k, k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double denom = ea.eigenvalues[i] + eb.eigenvalues[j];
      if (denom <= 1e-12) {
        throw DegenerateSpectrum(
            "solve_structured: eigenvalue sum " + std::to_string(denom) +
            " below uniqueness floor (operand spectra overlap)");
      }
      y(i, j) = c(i, j) / denom;
    }
  }
  return matmul(u, matmul(y, transpose(v)));
}

Matrix solve_kronecker_oracle(const SylvesterOperands& ops) {
  const std::size_t k = ops.dim();
  if (k > 16) throw DimensionError("solve_kronecker_oracle: K must be <= 16");
  const Matrix system = add(kron(Matrix::identity(k), ops.a()),
                            kron(transpose(ops.b()), Matrix::identity(k)));
  const Vector w_flat = solve_linear(system, vec(ops.b()));
  return unvec(w_flat, k, k);
}

double residual(const SylvesterOperands& ops, const Matrix& w) {
  if (w.rows() != ops.dim() || w.cols() != ops.dim()) {
    throw DimensionError("residual: candidate has wrong shape");
  }
  return frobenius_norm(sub(add(matmul(ops.a(), w), matmul(w, ops.b())), ops.b()));
}

}  // namespace jacfuse

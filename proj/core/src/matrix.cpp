#include "jacfuse/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "jacfuse/errors.hpp"

namespace jacfuse {

namespace {

void require_finite(const std::vector<double>& data, const char* what) {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(what) + ": non-finite entry");
    }
  }
}

// Max absolute row sum; scale reference for pivot tolerances.
double norm_inf(const Matrix& m) {
  double best = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += std::abs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

// LU factorization with partial pivoting, in place. Returns the row
// permutation. Throws SingularMatrix when a pivot falls below
// pivot_tol * ||a||_inf (of the original matrix).
std::vector<std::size_t> lu_factor(Matrix& a, double pivot_tol) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw DimensionError("lu_factor: matrix not square");
  const double scale_ref = norm_inf(a);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    double pivot_mag = std::abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a(r, k)) > pivot_mag) {
        pivot_mag = std::abs(a(r, k));
        pivot_row = r;
      }
    }
    if (pivot_mag <= pivot_tol * scale_ref || pivot_mag == 0.0) {
      throw SingularMatrix("lu_factor: pivot " + std::to_string(pivot_mag) +
                           " below tolerance at step " + std::to_string(k));
    }
    if (pivot_row != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(pivot_row, c));
      std::swap(perm[k], perm[pivot_row]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      a(r, k) = f;
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * a(k, c);
    }
  }
  return perm;
}

void lu_solve_one(const Matrix& lu, const std::vector<std::size_t>& perm,
                  const double* rhs, std::size_t stride, double* out) {
  const std::size_t n = lu.rows();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm[i] * stride];
    for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * y[j];
    y[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * out[j * stride];
    out[ii * stride] = s / lu(ii, ii);
  }
}

}  // namespace

Vector::Vector(std::size_t len, double fill) : data_(len, fill) {
  if (len == 0) throw DimensionError("Vector: length must be >= 1");
  if (!std::isfinite(fill)) throw DomainError("Vector: non-finite fill");
}

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  if (data_.empty()) throw DimensionError("Vector: length must be >= 1");
  require_finite(data_, "Vector");
}

Vector::Vector(std::vector<double> values) : data_(std::move(values)) {
  if (data_.empty()) throw DimensionError("Vector: length must be >= 1");
  require_finite(data_, "Vector");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw DimensionError("Matrix: rows/cols must be >= 1");
  if (!std::isfinite(fill)) throw DomainError("Matrix: non-finite fill");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw DimensionError("Matrix: rows/cols must be >= 1");
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: data length does not match rows*cols");
  }
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows.begin() == rows.end() ? 0 : rows.begin()->size();
  if (rows_ == 0 || cols_ == 0) throw DimensionError("Matrix: rows/cols must be >= 1");
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: dimensions differ");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("add: shapes differ");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("sub: shapes differ");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix scale(const Matrix& m, double s) {
  Matrix out = m;
  for (double& v : out.data()) v *= s;
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("add: lengths differ");
  Vector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("sub: lengths differ");
  Vector out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Vector scale(const Vector& v, double s) {
  Vector out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("dot: lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double trace(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("trace: matrix not square");
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i);
  return s;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

Matrix inverse(const Matrix& m, double pivot_tol) {
  if (m.rows() != m.cols()) throw DimensionError("inverse: matrix not square");
  return solve_linear(m, Matrix::identity(m.rows()), pivot_tol);
}

Vector solve_linear(const Matrix& a, const Vector& rhs, double pivot_tol) {
  if (a.rows() != rhs.size()) throw DimensionError("solve_linear: rhs length differs");
  Matrix lu = a;
  const auto perm = lu_factor(lu, pivot_tol);
  Vector out(rhs.size(), 0.0);
  lu_solve_one(lu, perm, rhs.data().data(), 1, out.data().data());
  return out;
}

Matrix solve_linear(const Matrix& a, const Matrix& rhs, double pivot_tol) {
  if (a.rows() != rhs.rows()) throw DimensionError("solve_linear: rhs rows differ");
  Matrix lu = a;
  const auto perm = lu_factor(lu, pivot_tol);
  Matrix out(rhs.rows(), rhs.cols(), 0.0);
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    lu_solve_one(lu, perm, rhs.data().data() + c, rhs.cols(), out.data().data() + c);
  }
  return out;
}

SymEig sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("sym_eig: matrix not square");
  const std::size_t n = m.rows();
  const double fro = frobenius_norm(m);

  double asym = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double d = m(r, c) - m(c, r);
      asym += 2.0 * d * d;
    }
  if (std::sqrt(asym) > 1e-9 * std::max(fro, 1e-300)) {
    throw DomainError("sym_eig: input is not symmetric within tolerance");
  }

  Matrix a = scale(add(m, transpose(m)), 0.5);
  Matrix q = Matrix::identity(n);
  const double off_target = 1e-12 * fro;
  constexpr int kMaxSweeps = 100;

  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r + 1; c < n; ++c) off += 2.0 * a(r, c) * a(r, c);
    if (std::sqrt(off) <= off_target) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (std::abs(apr) <= 1e-300) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p), qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = r + 1; c < n; ++c) off += 2.0 * a(r, c) * a(r, c);
    if (std::sqrt(off) > off_target) {
      throw NoConvergence("sym_eig: off-diagonal norm did not reach tolerance in 100 sweeps");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&a](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEig out;
  out.eigenvalues = Vector(n, 0.0);
  out.eigenvectors = Matrix(n, n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = q(r, order[c]);
  }
  return out;
}

}  // namespace jacfuse

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace jacfuse {

// Dense real vector. Entries supplied from outside the library are validated
// to be finite on construction; results of library operations stay finite by
// construction and are not re-validated.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t len, double fill = 0.0);
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::vector<double> data_;
};

// Dense row-major real matrix. K is a class count in this library, so sizes
// stay small and every algorithm here is an O(K^3) dense one.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  // Validating constructor: data.size() must equal rows*cols and every entry
  // must be finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Symmetric eigendecomposition M = Q diag(lambda) Q^T with eigenvalues
// ascending and orthonormal eigenvector columns.
struct SymEig {
  Vector eigenvalues;
  Matrix eigenvectors;
};

// Relative pivot tolerance used by inverse() and solve_linear(); pivots with
// magnitude <= tol * ||m||_inf raise SingularMatrix.
inline constexpr double kDefaultPivotTol = 1e-12;

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(const Vector& v, double s);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double trace(const Matrix& m);
double frobenius_norm(const Matrix& m);
Matrix kron(const Matrix& a, const Matrix& b);

Matrix inverse(const Matrix& m, double pivot_tol = kDefaultPivotTol);
Vector solve_linear(const Matrix& a, const Vector& rhs, double pivot_tol = kDefaultPivotTol);
Matrix solve_linear(const Matrix& a, const Matrix& rhs, double pivot_tol = kDefaultPivotTol);

// Cyclic Jacobi rotations, capped at 100 sweeps; the input must be symmetric
// within 1e-9 relative (it is symmetrized internally before iterating).
SymEig sym_eig(const Matrix& m);

inline Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }
inline Vector operator*(const Matrix& a, const Vector& x) { return matvec(a, x); }

}  // namespace jacfuse

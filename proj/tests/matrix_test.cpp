#include "jacfuse/matrix.hpp"

#include <cmath>
#include <limits>

#include <doctest.h>

#include "jacfuse/errors.hpp"
#include "jacfuse/rng.hpp"

using namespace jacfuse;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double s = 1.0) {
  Matrix m(rows, cols, 0.0);
  for (double& v : m.data()) v = rng.normal(0.0, s);
  return m;
}

Matrix random_spd(Rng& rng, std::size_t n) {
  const Matrix g = random_matrix(rng, n, n);
  Matrix m = matmul(g, transpose(g));
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 0.5;
  return m;
}

// Independent of the production matmul: plain index arithmetic over the
// raw buffers.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k)
        s += a.data()[i * a.cols() + k] * b.data()[k * b.cols() + j];
      out.data()[i * b.cols() + j] = s;
    }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace

TEST_CASE("matmul identity and permutation") {
  const Matrix m{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}, {7.0, 8.0, 9.0}};
  CHECK(max_abs_diff(matmul(Matrix::identity(3), m), m) == 0.0);

  const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix p{{0.0, 1.0}, {1.0, 0.0}};
  const Matrix expected{{2.0, 1.0}, {4.0, 3.0}};
  CHECK(max_abs_diff(matmul(a, p), expected) == 0.0);
}

TEST_CASE("matmul matches naive triple loop") {
  Rng rng(11);
  const Matrix a = random_matrix(rng, 5, 5);
  const Matrix b = random_matrix(rng, 5, 5);
  CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) <= 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes") {
  const Matrix a(2, 3, 1.0);
  const Matrix b(2, 3, 1.0);
  CHECK_THROWS_AS(matmul(a, b), DimensionError);
}

TEST_CASE("matmul associativity") {
  Rng rng(12);
  const Matrix a = random_matrix(rng, 4, 6);
  const Matrix b = random_matrix(rng, 6, 3);
  const Matrix c = random_matrix(rng, 3, 5);
  const Matrix left = matmul(matmul(a, b), c);
  const Matrix right = matmul(a, matmul(b, c));
  const double mag = std::max(frobenius_norm(left), 1.0);
  CHECK(max_abs_diff(left, right) <= 1e-10 * mag);
}

TEST_CASE("inverse on identity and diagonal") {
  CHECK(max_abs_diff(inverse(Matrix::identity(4)), Matrix::identity(4)) <= 1e-15);
  const Matrix d = Matrix::diagonal(Vector{2.0, 4.0});
  const Matrix expected = Matrix::diagonal(Vector{0.5, 0.25});
  CHECK(max_abs_diff(inverse(d), expected) <= 1e-15);
}

TEST_CASE("inverse residual on random SPD") {
  Rng rng(13);
  const Matrix m = random_spd(rng, 6);
  const Matrix r = sub(matmul(m, inverse(m)), Matrix::identity(6));
  CHECK(frobenius_norm(r) <= 1e-8 * 6);
}

TEST_CASE("inverse of inverse returns the original on well-conditioned input") {
  Rng rng(14);
  const Matrix m = random_spd(rng, 5);
  CHECK(max_abs_diff(inverse(inverse(m)), m) <= 1e-7 * 5);
}

TEST_CASE("inverse rejects singular input") {
  Matrix m(3, 3, 0.0);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;  // third row is zero
  CHECK_THROWS_AS(inverse(m), SingularMatrix);
  CHECK_THROWS_AS(inverse(Matrix(2, 2, 0.0)), SingularMatrix);
}

TEST_CASE("solve_linear basic cases") {
  const Vector v{3.0, -1.0, 2.0};
  const Vector x = solve_linear(Matrix::identity(3), v);
  for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(v[i]).epsilon(1e-15));

  const Vector y = solve_linear(Matrix::diagonal(Vector{2.0, 5.0}), Vector{4.0, 10.0});
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(2.0));
}

TEST_CASE("solve_linear residual on random system") {
  Rng rng(15);
  const Matrix a = random_spd(rng, 10);
  Vector rhs(10, 0.0);
  for (std::size_t i = 0; i < 10; ++i) rhs[i] = rng.normal();
  const Vector x = solve_linear(a, rhs);
  const Vector r = sub(matvec(a, x), rhs);
  CHECK(norm2(r) <= 1e-8 * norm2(rhs));
}

TEST_CASE("sym_eig diagonal input sorts ascending") {
  const SymEig e = sym_eig(Matrix::diagonal(Vector{3.0, 1.0, 2.0}));
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(e.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(e.eigenvalues[2] == doctest::Approx(3.0));
}

TEST_CASE("sym_eig rank-one outer product") {
  // 2 e e^T with e = (1,-1,0): eigenvalues {0, 0, 4}.
  const Vector e{1.0, -1.0, 0.0};
  Matrix m(3, 3, 0.0);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) m(r, c) = 2.0 * e[r] * e[c];
  const SymEig eig = sym_eig(m);
  CHECK(std::abs(eig.eigenvalues[0]) <= 1e-12);
  CHECK(std::abs(eig.eigenvalues[1]) <= 1e-12);
  CHECK(eig.eigenvalues[2] == doctest::Approx(4.0));
}

TEST_CASE("sym_eig reconstruction and orthonormality on random symmetric") {
  Rng rng(16);
  const std::size_t n = 8;
  Matrix m = random_matrix(rng, n, n);
  m = scale(add(m, transpose(m)), 0.5);
  const SymEig eig = sym_eig(m);

  const Matrix qtq = matmul(transpose(eig.eigenvectors), eig.eigenvectors);
  CHECK(frobenius_norm(sub(qtq, Matrix::identity(n))) <= 1e-10 * n);

  const Matrix rec = matmul(eig.eigenvectors,
                            matmul(Matrix::diagonal(eig.eigenvalues),
                                   transpose(eig.eigenvectors)));
  CHECK(frobenius_norm(sub(rec, m)) <= 1e-9 * frobenius_norm(m));
}

TEST_CASE("sym_eig PSD input has nonnegative spectrum") {
  Rng rng(17);
  const Matrix g = random_matrix(rng, 5, 3);
  const Matrix m = matmul(g, transpose(g));  // PSD, rank <= 3
  const SymEig eig = sym_eig(m);
  CHECK(eig.eigenvalues[0] >= -1e-10 * frobenius_norm(m));
}

TEST_CASE("sym_eig rejects asymmetric input") {
  Matrix m(2, 2, 0.0);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(sym_eig(m), DomainError);
}

TEST_CASE("frobenius, trace, kron basics") {
  CHECK(frobenius_norm(Matrix::identity(3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(trace(Matrix::diagonal(Vector{1.0, 2.0, 3.0})) == doctest::Approx(6.0));

  const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix k = kron(Matrix::identity(2), m);
  CHECK(k.rows() == 4);
  CHECK(k.cols() == 4);
  const Matrix expected{{1.0, 2.0, 0.0, 0.0},
                        {3.0, 4.0, 0.0, 0.0},
                        {0.0, 0.0, 1.0, 2.0},
                        {0.0, 0.0, 3.0, 4.0}};
  CHECK(max_abs_diff(k, expected) == 0.0);
}

TEST_CASE("construction validates shape and finiteness") {
  CHECK_THROWS_AS(Matrix(0, 2, 0.0), DimensionError);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1.0, std::nan("")}), DomainError);
  CHECK_THROWS_AS(Vector(std::vector<double>{}), DimensionError);
  CHECK_THROWS_AS((Vector{1.0, std::numeric_limits<double>::infinity()}), DomainError);
}

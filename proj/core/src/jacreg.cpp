#include "jacfuse/jacreg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jacfuse/errors.hpp"

namespace jacfuse {

namespace {

Matrix gram(const Matrix& w) { return matmul(w, transpose(w)); }

double infinity() { return std::numeric_limits<double>::infinity(); }

}  // namespace

void FusionConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("FusionConfig: gamma must be in (0,1]");
  }
  if (t_max < 1) throw DomainError("FusionConfig: t_max must be >= 1");
}

Matrix softmax_jacobian(const Prediction& p) {
  const std::size_t k = p.num_classes();
  Matrix j(k, k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      j(r, c) = p[r] * p[c] - (r == c ? p[r] : 0.0);
    }
  }
  return j;
}

SylvesterOperands build_operands(const Matrix& j, const UnimodalHead& head, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("build_operands: gamma must be in (0,1)");
  }
  if (j.rows() != j.cols() || j.rows() != head.w.rows()) {
    throw DimensionError("build_operands: Jacobian and head dimensions differ");
  }
  const double kappa = 1.0 / gamma - 1.0;
  Matrix a = scale(matmul(j, j), kappa);
  Matrix b = inverse(gram(head.w));
  a = scale(add(a, transpose(a)), 0.5);
  b = scale(add(b, transpose(b)), 0.5);
  return SylvesterOperands(std::move(a), std::move(b), kappa);
}

RecalibrationResult recalibrate(const Vector& za, const Vector& zb,
                                const UnimodalHead& head_a, const UnimodalHead& head_b,
                                const ClassFrequencies& freq, const FusionConfig& cfg) {
  cfg.validate();
  const std::size_t k = za.size();
  if (zb.size() != k || freq.num_classes() != k || head_a.w.rows() != k ||
      head_b.w.rows() != k) {
    throw DimensionError("recalibrate: inconsistent class dimensions");
  }

  const Prediction pa = softmax(za);
  const Prediction pb = softmax(zb);
  Prediction p = statistical_fuse(pa, pb, freq);

  Matrix w_a = Matrix::identity(k);
  Matrix w_b = Matrix::identity(k);
  Matrix j_last = softmax_jacobian(p);
  std::size_t iterations = 0;

  const bool active = (cfg.regularize_a || cfg.regularize_b) && cfg.gamma < 1.0;
  if (active) {
    for (std::size_t t = 0; t < cfg.t_max; ++t) {
      j_last = softmax_jacobian(p);
      if (cfg.regularize_a) {
        w_a = solve_structured(build_operands(j_last, head_a, cfg.gamma));
      }
      if (cfg.regularize_b) {
        w_b = solve_structured(build_operands(j_last, head_b, cfg.gamma));
      }
      p = statistical_fuse(softmax(matvec(w_a, za)), softmax(matvec(w_b, zb)), freq);
      ++iterations;
    }
  }

  RecalibrationResult out{p, std::move(w_a), std::move(w_b), 0.0, 0.0, iterations};
  const double norm_a =
      frobenius_norm(matmul(j_last, matmul(out.w_a, head_a.w)));
  const double norm_b =
      frobenius_norm(matmul(j_last, matmul(out.w_b, head_b.w)));
  if (cfg.regularize_a && cfg.regularize_b) {
    out.jac_norm_sq = std::max(norm_a * norm_a, norm_b * norm_b);
  } else if (cfg.regularize_b) {
    out.jac_norm_sq = norm_b * norm_b;
  } else {
    out.jac_norm_sq = norm_a * norm_a;
  }
  out.bound = cfg.gamma < 1.0
                  ? cfg.gamma * static_cast<double>(k) / (2.0 * (1.0 - cfg.gamma))
                  : infinity();
  return out;
}

Prediction unimodal_recalibrate(const Vector& z, const UnimodalHead& head, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("unimodal_recalibrate: gamma must be in (0,1]");
  }
  if (head.w.rows() != z.size()) {
    throw DimensionError("unimodal_recalibrate: head and logit dimensions differ");
  }
  if (gamma == 1.0) return softmax(z);

  const Prediction p = softmax(z);
  const Matrix j = softmax_jacobian(p);
  const double kappa = 1.0 / gamma - 1.0;
  const std::size_t k = z.size();

  Matrix w_x(k, k, 0.0);
  const Matrix g = gram(head.w);
  if (frobenius_norm(sub(g, Matrix::identity(k))) <= 1e-9) {
    // Orthonormal-row fast path: W_x = (kappa J^2 + I)^-1.
    w_x = inverse(add(scale(matmul(j, j), kappa), Matrix::identity(k)));
  } else {
    w_x = solve_structured(build_operands(j, head, gamma));
  }
  return softmax(matvec(w_x, z));
}

double prediction_change_bound(double l, double gamma, std::size_t k, double eps_norm) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("prediction_change_bound: gamma must be in (0,1)");
  }
  if (l < 0.0 || eps_norm < 0.0) {
    throw DomainError("prediction_change_bound: l and eps_norm must be >= 0");
  }
  return l * std::sqrt(gamma * static_cast<double>(k) / (2.0 * (1.0 - gamma))) * eps_norm;
}

std::pair<double, double> trace_identity_check(const Matrix& j, const Matrix& w_a,
                                               const UnimodalHead& head, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("trace_identity_check: gamma must be in (0,1)");
  }
  const double kappa = 1.0 / gamma - 1.0;
  const double lhs_norm = frobenius_norm(matmul(j, matmul(w_a, head.w)));
  const double rhs = trace(sub(w_a, matmul(w_a, transpose(w_a)))) / kappa;
  return {lhs_norm * lhs_norm, rhs};
}

OrderPreserving2d order_preserving_2d(const Prediction& p, const UnimodalHead& head,
                                      double gamma) {
  if (p.num_classes() != 2 || head.w.rows() != 2) {
    throw DimensionError("order_preserving_2d: requires K = 2");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw DomainError("order_preserving_2d: gamma must be in (0,1]");
  }
  const double kappa = 1.0 / gamma - 1.0;
  const Matrix g = gram(head.w);
  const double pp = p[0] * p[1];
  const double a = pp * g(0, 0);
  const double b = pp * g(0, 1);
  const double c = pp * g(1, 1);

  // [[G, H], [H, G]] rho = (1, 0, 0, 1) with G = I + kappa*[[a,b],[b,c]]
  // and H = -kappa*[[a,b],[b,c]].
  Matrix system(4, 4, 0.0);
  const double s[2][2] = {{a, b}, {b, c}};
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t cidx = 0; cidx < 2; ++cidx) {
      const double gs = (r == cidx ? 1.0 : 0.0) + kappa * s[r][cidx];
      const double hs = -kappa * s[r][cidx];
      system(r, cidx) = gs;
      system(r, 2 + cidx) = hs;
      system(2 + r, cidx) = hs;
      system(2 + r, 2 + cidx) = gs;
    }
  }
  const Vector rho = solve_linear(system, Vector{1.0, 0.0, 0.0, 1.0});

  const double numer = 2.0 * (a + 2.0 * b + c) * kappa + 2.0;
  const double denom =
      4.0 * (a * c - b * b) * kappa * kappa + 2.0 * (a + c) * kappa + 1.0;

  OrderPreserving2d out;
  out.rho = {rho[0], rho[1], rho[2], rho[3]};
  out.sum_expr = numer / denom;
  return out;
}

bool gamma_feasibility(const Matrix& j, double kappa, std::size_t i, std::size_t j_idx) {
  if (j.rows() != j.cols()) throw DimensionError("gamma_feasibility: J must be square");
  const std::size_t k = j.rows();
  if (i >= k || j_idx >= k) throw DimensionError("gamma_feasibility: index out of range");
  if (i == j_idx) throw DomainError("gamma_feasibility: requires i != j");
  if (kappa < 0.0) throw DomainError("gamma_feasibility: kappa must be >= 0");

  Vector e(k, 0.0);
  e[i] = 1.0;
  e[j_idx] = -1.0;
  Matrix ee(k, k, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) ee(r, c) = e[r] * e[c];

  const Matrix j2 = matmul(j, j);
  Matrix m = add(scale(ee, 2.0), scale(add(matmul(ee, j2), matmul(j2, ee)), kappa));
  m = scale(add(m, transpose(m)), 0.5);
  const SymEig eig = sym_eig(m);
  return eig.eigenvalues[0] >= -1e-10;
}

double relaxed_loss(const Matrix& j, const Matrix& w_a, const UnimodalHead& head,
                    double gamma) {
  const double jac = frobenius_norm(matmul(j, matmul(w_a, head.w)));
  const double reg = frobenius_norm(sub(w_a, Matrix::identity(w_a.rows())));
  return (1.0 - gamma) * jac * jac + gamma * reg * reg;
}

}  // namespace jacfuse

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jacfuse/errors.hpp"
#include "jacfuse/experiment.hpp"
#include "jacfuse/fusion.hpp"
#include "jacfuse/jacreg.hpp"
#include "jacfuse/rng.hpp"
#include "jacfuse/sylvester.hpp"

namespace jacfuse {

namespace {

// Every check draws through this context so the CI mutation mode can inject a
// sign error into the Jacobian all checks consume.
struct VerifyContext {
  Rng rng;
  int jacobian_sign;
  std::size_t scale;  // divides trial counts in --quick mode

  Matrix jac(const Prediction& p) {
    return scale_sign(softmax_jacobian(p));
  }
  Matrix scale_sign(Matrix j) const {
    if (jacobian_sign < 0) {
      for (double& v : j.data()) v = -v;
    }
    return j;
  }
  std::size_t count(std::size_t full) const { return std::max<std::size_t>(1, full / scale); }
};

Vector random_logits(Rng& rng, std::size_t k, double spread = 2.0) {
  Vector z(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) z[i] = rng.normal(0.0, spread);
  return z;
}

ClassFrequencies random_freq(Rng& rng, std::size_t k) {
  Vector f(k, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    f[i] = rng.uniform(0.2, 1.0);
    sum += f[i];
  }
  for (std::size_t i = 0; i < k; ++i) f[i] /= sum;
  return ClassFrequencies(std::move(f));
}

UnimodalHead random_head(Rng& rng, std::size_t k, std::size_t h) {
  Matrix w(k, h, 0.0);
  for (double& v : w.data()) v = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(h)));
  Vector b(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) b[i] = rng.normal(0.0, 0.1);
  return UnimodalHead{std::move(w), std::move(b), ""};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

CheckResult check_fusion_logit_equivalence(VerifyContext& ctx) {
  const std::size_t trials = ctx.count(1000);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t k = 2 + ctx.rng.below(6);
    const Vector za = random_logits(ctx.rng, k);
    const Vector zb = random_logits(ctx.rng, k);
    const ClassFrequencies freq = random_freq(ctx.rng, k);
    const Prediction lhs = statistical_fuse(softmax(za), softmax(zb), freq);
    const Prediction rhs = logit_fuse(za, zb, freq);
    for (std::size_t i = 0; i < k; ++i) {
      worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
    }
  }
  return {"fusion-logit-equivalence", worst <= 1e-12,
          "max deviation " + fmt(worst) + " over " + std::to_string(trials) + " triples"};
}

CheckResult check_sylvester_oracle(VerifyContext& ctx) {
  const std::size_t trials = ctx.count(200);
  const std::size_t sizes[] = {2, 3, 5, 8};
  double worst_diff = 0.0, worst_res = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t k = sizes[t % 4];
    const double gamma = ctx.rng.uniform(0.05, 0.95);
    const Prediction p = softmax(random_logits(ctx.rng, k));
    const UnimodalHead head = random_head(ctx.rng, k, k + 2);
    const SylvesterOperands ops = build_operands(ctx.jac(p), head, gamma);
    const Matrix w = solve_structured(ops);
    const Matrix w_oracle = solve_kronecker_oracle(ops);
    for (std::size_t i = 0; i < w.data().size(); ++i) {
      worst_diff = std::max(worst_diff, std::abs(w.data()[i] - w_oracle.data()[i]));
    }
    const double rel = residual(ops, w) /
                       (frobenius_norm(ops.a()) + frobenius_norm(ops.b()));
    worst_res = std::max(worst_res, rel);
  }
  const bool pass = worst_diff <= 1e-8 && worst_res <= 1e-9;
  return {"sylvester-oracle", pass,
          "max |structured - kronecker| " + fmt(worst_diff) + ", max relative residual " +
              fmt(worst_res)};
}

CheckResult check_trace_identity(VerifyContext& ctx) {
  const std::size_t trials = ctx.count(100);
  double worst = 0.0;
  for (double gamma : {0.1, 0.5, 0.9}) {
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t k = 2 + ctx.rng.below(5);
      const Prediction p = softmax(random_logits(ctx.rng, k));
      const UnimodalHead head = random_head(ctx.rng, k, k + 2);
      const Matrix j = ctx.jac(p);
      const Matrix w_a = solve_structured(build_operands(j, head, gamma));
      const auto [lhs, rhs] = trace_identity_check(j, w_a, head, gamma);
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
  }
  return {"trace-identity", worst <= 1e-8, "max relative mismatch " + fmt(worst)};
}

CheckResult check_jacobian_energy_bound(VerifyContext& ctx) {
  const std::size_t trials = ctx.count(100);
  double worst = -1e300;
  for (double gamma : {0.1, 0.5, 0.9}) {
    for (std::size_t k : {2, 3, 5, 10}) {
      for (std::size_t t = 0; t < trials; ++t) {
        const Prediction p = softmax(random_logits(ctx.rng, k));
        const UnimodalHead head = random_head(ctx.rng, k, k + 2);
        const Matrix j = ctx.jac(p);
        const Matrix w_a = solve_structured(build_operands(j, head, gamma));
        const double norm = frobenius_norm(matmul(j, matmul(w_a, head.w)));
        const double bound =
            gamma * static_cast<double>(k) / (2.0 * (1.0 - gamma));
        worst = std::max(worst, norm * norm - bound);
      }
    }
  }
  return {"jacobian-energy-bound", worst <= 1e-9, "max excess over bound " + fmt(worst)};
}

// Heads with W W^T = s^2 I, the normalization the analysis reduces any head
// to by SVD. The no-flip guarantee is exact on this class; general heads can
// flip near-ties (their W_x is asymmetric between the two logits).
UnimodalHead random_orthogonal_head(Rng& rng, double scale_lo = 0.5,
                                    double scale_hi = 2.0) {
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const double s = rng.uniform(scale_lo, scale_hi);
  const double c = std::cos(theta), sn = std::sin(theta);
  Matrix w{{s * c, -s * sn}, {s * sn, s * c}};
  if (rng.uniform() < 0.5) {  // include reflections
    w(0, 1) = -w(0, 1);
    w(1, 1) = -w(1, 1);
  }
  return UnimodalHead{std::move(w), Vector(2, 0.0), ""};
}

CheckResult check_order_preserving_2d(VerifyContext& ctx) {
  const std::size_t trials = ctx.count(10000);
  double worst_gap = 0.0;
  double min_sum = 1e300;
  std::size_t flips = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double gamma = ctx.rng.uniform(0.01, 0.999);
    const Prediction p = softmax(random_logits(ctx.rng, 2));

    // Closed form vs block inversion holds for arbitrary heads.
    UnimodalHead general = random_head(ctx.rng, 2, 2);
    general.w(0, 0) += 1.0;
    general.w(1, 1) += 1.0;
    const OrderPreserving2d res = order_preserving_2d(p, general, gamma);
    const double sum_rho = res.rho[0] + res.rho[3] - res.rho[1] - res.rho[2];
    worst_gap = std::max(worst_gap, std::abs(sum_rho - res.sum_expr));
    min_sum = std::min(min_sum, res.sum_expr);

    // Argmax invariance on the scaled-orthogonal class.
    const UnimodalHead head = random_orthogonal_head(ctx.rng);
    const Vector z = random_logits(ctx.rng, 2);
    if (std::abs(z[0] - z[1]) <= 1e-9) continue;
    const Prediction before = softmax(z);
    const Prediction after = unimodal_recalibrate(z, head, gamma);
    if (before.argmax() != after.argmax()) ++flips;
  }
  const bool pass = worst_gap <= 1e-9 && min_sum >= 0.0 && flips == 0;
  return {"order-preserving-2d", pass,
          "max closed-form gap " + fmt(worst_gap) + ", min sum " + fmt(min_sum) + ", " +
              std::to_string(flips) + " argmax flips"};
}

CheckResult check_mlp_gradients(VerifyContext& ctx) {
  MlpModel model = MlpModel::init({2, 16, 16, 2}, derive_seed(ctx.rng.raw(), 11));
  const Vector x{0.3, -0.8};
  const int y = 1;
  const double h = 1e-5;
  const auto analytic = loss_and_grads(model, x, y);

  auto loss_at = [&](const MlpModel& m, const Vector& input) {
    return loss_and_grads(m, input, y).loss;
  };

  double worst = 0.0;
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    for (std::size_t idx = 0; idx < model.layers()[li].w.data().size(); ++idx) {
      MlpModel up = model, down = model;
      up.layers()[li].w.data()[idx] += h;
      down.layers()[li].w.data()[idx] -= h;
      const double fd = (loss_at(up, x) - loss_at(down, x)) / (2.0 * h);
      const double an = analytic.param_grads[li].w.data()[idx];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
    }
    for (std::size_t idx = 0; idx < model.layers()[li].b.size(); ++idx) {
      MlpModel up = model, down = model;
      up.layers()[li].b[idx] += h;
      down.layers()[li].b[idx] -= h;
      const double fd = (loss_at(up, x) - loss_at(down, x)) / (2.0 * h);
      const double an = analytic.param_grads[li].b[idx];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
    }
  }
  for (std::size_t idx = 0; idx < x.size(); ++idx) {
    Vector up = x, down = x;
    up[idx] += h;
    down[idx] -= h;
    const double fd = (loss_at(model, up) - loss_at(model, down)) / (2.0 * h);
    const double an = analytic.input_grad[idx];
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
  }
  return {"mlp-gradient-check", worst <= 1e-5, "max relative error " + fmt(worst)};
}

CheckResult check_softmax_fd_jacobian(VerifyContext& ctx) {
  // d softmax/dz must equal the NEGATIVE of the convention used by the
  // recalibration Jacobian; a sign mutation upstream is caught here.
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t t = 0; t < ctx.count(20); ++t) {
    const std::size_t k = 2 + ctx.rng.below(5);
    const Vector z = t == 0 ? Vector{1.0, 0.0, 2.0} : random_logits(ctx.rng, k);
    const Matrix j = ctx.jac(softmax(z));
    for (std::size_t col = 0; col < z.size(); ++col) {
      Vector up = z, down = z;
      up[col] += h;
      down[col] -= h;
      const Prediction pu = softmax(up), pd = softmax(down);
      for (std::size_t row = 0; row < z.size(); ++row) {
        const double fd = (pu[row] - pd[row]) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - (-j(row, col))));
      }
    }
  }
  return {"softmax-fd-jacobian", worst <= 1e-6,
          "max |finite-difference + J| entry " + fmt(worst)};
}

CheckResult check_first_order_bound(VerifyContext& ctx) {
  const std::size_t trials = ctx.count(100);
  double worst = -1e300;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t k = 2 + ctx.rng.below(5);
    const std::size_t hdim = k + 2;
    const double gamma = ctx.rng.uniform(0.1, 0.9);
    const UnimodalHead head_a = random_head(ctx.rng, k, hdim);
    const Vector zb = random_logits(ctx.rng, k);
    const ClassFrequencies freq = random_freq(ctx.rng, k);
    Vector h(hdim, 0.0);
    for (std::size_t i = 0; i < hdim; ++i) h[i] = ctx.rng.normal();

    const Vector za = add(matvec(head_a.w, h), head_a.b);
    const Prediction p0 = statistical_fuse(softmax(za), softmax(zb), freq);
    const Matrix w_a =
        solve_structured(build_operands(ctx.jac(p0), head_a, gamma));

    auto predict = [&](const Vector& feat) {
      const Vector z = add(matvec(head_a.w, feat), head_a.b);
      return statistical_fuse(softmax(matvec(w_a, z)), softmax(zb), freq);
    };

    Vector delta(hdim, 0.0);
    for (std::size_t i = 0; i < hdim; ++i) delta[i] = ctx.rng.normal();
    const double dnorm = 1e-4;
    delta = scale(delta, dnorm / norm2(delta));

    const Prediction base = predict(h);
    const Prediction moved = predict(add(h, delta));
    Vector diff(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) diff[i] = moved[i] - base[i];
    const double change = norm2(diff);
    const double bound = prediction_change_bound(1.0, gamma, k, dnorm);
    worst = std::max(worst, change - (bound + 1e-6));
  }
  return {"first-order-bound", worst <= 0.0, "max bound excess " + fmt(worst)};
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& opts) {
  VerifyContext ctx{Rng(opts.seed), opts.jacobian_sign,
                    opts.quick ? std::size_t{10} : std::size_t{1}};
  std::vector<CheckResult> results;
  results.push_back(check_fusion_logit_equivalence(ctx));
  results.push_back(check_sylvester_oracle(ctx));
  results.push_back(check_trace_identity(ctx));
  results.push_back(check_jacobian_energy_bound(ctx));
  results.push_back(check_order_preserving_2d(ctx));
  results.push_back(check_mlp_gradients(ctx));
  results.push_back(check_softmax_fd_jacobian(ctx));
  results.push_back(check_first_order_bound(ctx));
  return results;
}

}  // namespace jacfuse

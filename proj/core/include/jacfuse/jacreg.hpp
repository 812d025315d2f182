#pragma once

#include <array>
#include <string>
#include <utility>

#include "jacfuse/fusion.hpp"
#include "jacfuse/matrix.hpp"
#include "jacfuse/sylvester.hpp"

namespace jacfuse {

// Last linear layer (K x H weight, K bias) of a trained unimodal classifier.
// W W^T must be invertible wherever a recalibration matrix is solved.
struct UnimodalHead {
  Matrix w;
  Vector b;
  std::string name;
};

// Hyperparameters of the per-sample recalibration.
//
// gamma in (0,1] trades Jacobian damping against staying close to the
// identity; gamma = 1 short-circuits to W = I (trivial fusion). t_max is the
// number of refinement iterations; one is the recommended and default value.
// The regularize flags select which modality gets a solved recalibration
// matrix; the disabled side keeps W = I.
struct FusionConfig {
  double gamma = 1.0;
  std::size_t t_max = 1;
  bool regularize_a = true;
  bool regularize_b = false;

  void validate() const;
};

// Output of one per-sample recalibration.
//
// jac_norm_sq is ||J W_m W_M||_F^2 evaluated at the final iteration's
// Jacobian for the solved modality (side A when regularize_a is set, side B
// when only regularize_b is set, the larger of the two when both are).
// bound is gamma*K / (2*(1-gamma)) (infinity at gamma = 1); at a solved
// recalibration matrix jac_norm_sq never exceeds it.
struct RecalibrationResult {
  Prediction p_prime;
  Matrix w_a;
  Matrix w_b;
  double jac_norm_sq = 0.0;
  double bound = 0.0;
  std::size_t iterations = 0;
};

// J = p p^T - diag(p). Symmetric, rows sum to zero. Note the sign
// convention: this is the negative of d softmax / d z; every Frobenius-norm
// objective built from it is unaffected, but finite-difference comparisons
// must check against -J.
Matrix softmax_jacobian(const Prediction& p);

// Assembles A = (1/gamma - 1) * J^2 and B = (W W^T)^-1 for the structured
// Sylvester solve. Requires gamma in (0,1); throws SingularMatrix when W W^T
// is not invertible.
SylvesterOperands build_operands(const Matrix& j, const UnimodalHead& head, double gamma);

// Per-sample multimodal recalibration.
//
// Starts from the trivial statistical fusion p(0) of the raw logits, then for
// t < t_max: forms J(t) from p(t), solves the recalibration matrix for each
// enabled modality from its own head (independently, from the same p(t)), and
// refuses the prediction as normalize(softmax(W_a z_a) (*) softmax(W_b z_b) / freq).
RecalibrationResult recalibrate(const Vector& za, const Vector& zb,
                                const UnimodalHead& head_a, const UnimodalHead& head_b,
                                const ClassFrequencies& freq, const FusionConfig& cfg);

// Unimodal variant: p' = softmax(W_x z). Uses the direct formula
// W_x = (kappa J^2 + I)^-1 when W W^T = I (within 1e-9 Frobenius), the general
// Sylvester solve otherwise. gamma = 1 returns softmax(z) exactly.
Prediction unimodal_recalibrate(const Vector& z, const UnimodalHead& head, double gamma);

// l * sqrt(gamma*K / (2*(1-gamma))) * eps_norm: the worst-case change of the
// recalibrated prediction under a feature perturbation of norm eps_norm fed
// through an l-Lipschitz feature extractor. Requires gamma in (0,1).
double prediction_change_bound(double l, double gamma, std::size_t k, double eps_norm);

// Two routes to the damped Jacobian energy at a solved w_a:
//   lhs = ||J w_a W||_F^2,  rhs = (1/kappa) * Tr[w_a - w_a w_a^T].
// They coincide exactly when w_a solves the Sylvester equation for (j, head,
// gamma); callers assert the match.
std::pair<double, double> trace_identity_check(const Matrix& j, const Matrix& w_a,
                                               const UnimodalHead& head, double gamma);

// K = 2 closed-form analysis of the unimodal recalibration.
//
// rho holds the four entries of W_x obtained by solving the 4x4 block system
// [[G, H], [H, G]] rho = (1,0,0,1); sum_expr is the closed-form value of
// rho1 + rho4 - rho2 - rho3,
//   (2(a+2b+c)k + 2) / (4(ac-b^2)k^2 + 2(a+c)k + 1),
// whose nonnegativity is what makes K = 2 unimodal recalibration
// order-preserving. The two routes must agree to 1e-9.
struct OrderPreserving2d {
  std::array<double, 4> rho;
  double sum_expr = 0.0;
};
OrderPreserving2d order_preserving_2d(const Prediction& p, const UnimodalHead& head,
                                      double gamma);

// Pairwise order-preservation test for the high-dimensional unimodal case
// with W W^T = I: returns true when
//   lambda_min( 2 e e^T + kappa (e e^T J^2 + J^2 e e^T) ) >= -1e-10
// for e = e_i - e_j. kappa inside the intersection over all pairs implies the
// argmax cannot flip; a flip at some kappa implies membership fails for some
// pair.
bool gamma_feasibility(const Matrix& j, double kappa, std::size_t i, std::size_t j_idx);

// (1-gamma) ||J w_a W||_F^2 + gamma ||w_a - I||_F^2.
double relaxed_loss(const Matrix& j, const Matrix& w_a, const UnimodalHead& head,
                    double gamma);

}  // namespace jacfuse

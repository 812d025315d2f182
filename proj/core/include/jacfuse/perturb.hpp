#pragma once

#include <cstdint>
#include <string>

#include "jacfuse/matrix.hpp"
#include "jacfuse/mlp.hpp"

namespace jacfuse {

enum class PerturbKind { kNone, kGaussian, kMissing, kBias, kFgsm, kPgd };
enum class Axis { kRows, kCols };

// Tagged perturbation description. The omega parameters follow the attack
// definitions: omega0 Gaussian std, omega1 missing run length, omega2 patch
// side, omega3 patch scale offset, omega4 l_inf budget, omega5 inner step,
// omega6 inner iteration count (default 20).
struct PerturbSpec {
  PerturbKind kind = PerturbKind::kNone;
  double omega0 = 0.0;
  std::size_t omega1 = 0;
  std::size_t omega2 = 0;
  double omega3 = 0.0;
  double omega4 = 0.0;
  double omega5 = 0.0;
  std::size_t omega6 = 20;
  Axis axis = Axis::kCols;
  std::uint64_t seed = 0;

  // Parses "kind:key=value,key=value", e.g. "gaussian:omega0=1.0" or
  // "pgd:omega4=0.1,omega5=0.01,omega6=20". "none" takes no parameters.
  static PerturbSpec parse(const std::string& text);
  std::string to_string() const;
  // The magnitude knob swept by magnitude sweeps (omega0 for gaussian,
  // omega3 for bias, omega4 for the attacks, omega1 for missing).
  PerturbSpec with_magnitude(double magnitude) const;
};

// Multiplicative Gaussian noise x*(1 + eps), eps ~ N(0, omega0^2), elementwise.
Vector gaussian(const Vector& x, double omega0, std::uint64_t seed);
Matrix gaussian(const Matrix& x, double omega0, std::uint64_t seed);

// Zeroes one contiguous run of omega1 rows (or columns); the start index is
// uniform over valid positions.
Matrix missing_entries(const Matrix& x, std::size_t omega1, Axis axis, std::uint64_t seed);

// Scales one uniformly placed omega2 x omega2 patch by (1 + omega3).
Matrix bias_patch(const Matrix& x, std::size_t omega2, double omega3, std::uint64_t seed);

// One-step l_inf gradient-sign attack on the model's cross-entropy at (x, y).
// Entries with exactly zero gradient stay unmoved, so ||x' - x||_inf <= omega4
// holds exactly.
Vector fgsm(const MlpModel& model, const Vector& x, int y, double omega4);

// omega6 iterations of step omega5 * sign(grad), each followed by projection
// onto the l_inf ball of radius omega4 around the clean input.
Vector pgd(const MlpModel& model, const Vector& x, int y, double omega4, double omega5,
           std::size_t omega6);

// Applies a spec to a flat feature vector (matrix kinds treat it as a single
// row). model/y are consulted only by the gradient attacks.
Vector apply_perturbation(const PerturbSpec& spec, const MlpModel& model, const Vector& x,
                          int y, std::uint64_t seed);

}  // namespace jacfuse

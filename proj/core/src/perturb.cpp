#include "jacfuse/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jacfuse/errors.hpp"
#include "jacfuse/rng.hpp"

namespace jacfuse {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::string format_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

PerturbSpec PerturbSpec::parse(const std::string& text) {
  PerturbSpec spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "none") {
    spec.kind = PerturbKind::kNone;
  } else if (kind == "gaussian") {
    spec.kind = PerturbKind::kGaussian;
  } else if (kind == "missing") {
    spec.kind = PerturbKind::kMissing;
  } else if (kind == "bias") {
    spec.kind = PerturbKind::kBias;
  } else if (kind == "fgsm") {
    spec.kind = PerturbKind::kFgsm;
  } else if (kind == "pgd") {
    spec.kind = PerturbKind::kPgd;
  } else {
    throw ParseError("perturbation '" + text + "': unknown kind '" + kind + "'");
  }
  if (colon == std::string::npos) return spec;

  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ParseError("perturbation '" + text + "': expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "omega0") spec.omega0 = std::stod(value);
      else if (key == "omega1") spec.omega1 = static_cast<std::size_t>(std::stoul(value));
      else if (key == "omega2") spec.omega2 = static_cast<std::size_t>(std::stoul(value));
      else if (key == "omega3") spec.omega3 = std::stod(value);
      else if (key == "omega4") spec.omega4 = std::stod(value);
      else if (key == "omega5") spec.omega5 = std::stod(value);
      else if (key == "omega6") spec.omega6 = static_cast<std::size_t>(std::stoul(value));
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "axis") {
        if (value == "rows") spec.axis = Axis::kRows;
        else if (value == "cols") spec.axis = Axis::kCols;
        else throw ParseError("perturbation '" + text + "': axis must be rows|cols");
      } else {
        throw ParseError("perturbation '" + text + "': unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("perturbation '" + text + "': bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      throw ParseError("perturbation '" + text + "': value out of range for '" + key + "'");
    }
  }
  return spec;
}

std::string PerturbSpec::to_string() const {
  switch (kind) {
    case PerturbKind::kNone:
      return "none";
    case PerturbKind::kGaussian:
      return "gaussian:omega0=" + format_num(omega0);
    case PerturbKind::kMissing:
      return "missing:omega1=" + std::to_string(omega1) +
             ",axis=" + (axis == Axis::kRows ? "rows" : "cols");
    case PerturbKind::kBias:
      return "bias:omega2=" + std::to_string(omega2) + ",omega3=" + format_num(omega3);
    case PerturbKind::kFgsm:
      return "fgsm:omega4=" + format_num(omega4);
    case PerturbKind::kPgd:
      return "pgd:omega4=" + format_num(omega4) + ",omega5=" + format_num(omega5) +
             ",omega6=" + std::to_string(omega6);
  }
  return "none";
}

PerturbSpec PerturbSpec::with_magnitude(double magnitude) const {
  PerturbSpec out = *this;
  switch (kind) {
    case PerturbKind::kGaussian:
      out.omega0 = magnitude;
      break;
    case PerturbKind::kMissing:
      out.omega1 = static_cast<std::size_t>(magnitude);
      break;
    case PerturbKind::kBias:
      out.omega3 = magnitude;
      break;
    case PerturbKind::kFgsm:
    case PerturbKind::kPgd:
      out.omega4 = magnitude;
      break;
    case PerturbKind::kNone:
      break;
  }
  return out;
}

Vector gaussian(const Vector& x, double omega0, std::uint64_t seed) {
  if (omega0 < 0.0) throw DomainError("gaussian: omega0 must be >= 0");
  Rng rng(seed);
  Vector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= 1.0 + rng.normal(0.0, omega0);
  return out;
}

Matrix gaussian(const Matrix& x, double omega0, std::uint64_t seed) {
  if (omega0 < 0.0) throw DomainError("gaussian: omega0 must be >= 0");
  Rng rng(seed);
  Matrix out = x;
  for (double& v : out.data()) v *= 1.0 + rng.normal(0.0, omega0);
  return out;
}

Matrix missing_entries(const Matrix& x, std::size_t omega1, Axis axis, std::uint64_t seed) {
  const std::size_t extent = axis == Axis::kRows ? x.rows() : x.cols();
  if (omega1 > extent) throw DomainError("missing_entries: omega1 exceeds extent");
  Matrix out = x;
  if (omega1 == 0) return out;
  Rng rng(seed);
  const std::size_t start = static_cast<std::size_t>(rng.below(extent - omega1 + 1));
  if (axis == Axis::kRows) {
    for (std::size_t r = start; r < start + omega1; ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = 0.0;
  } else {
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = start; c < start + omega1; ++c) out(r, c) = 0.0;
  }
  return out;
}

Matrix bias_patch(const Matrix& x, std::size_t omega2, double omega3, std::uint64_t seed) {
  if (omega2 > x.rows() || omega2 > x.cols()) {
    throw DomainError("bias_patch: omega2 exceeds matrix size");
  }
  Matrix out = x;
  if (omega2 == 0 || omega3 == 0.0) return out;
  Rng rng(seed);
  const std::size_t r0 = static_cast<std::size_t>(rng.below(x.rows() - omega2 + 1));
  const std::size_t c0 = static_cast<std::size_t>(rng.below(x.cols() - omega2 + 1));
  for (std::size_t r = r0; r < r0 + omega2; ++r)
    for (std::size_t c = c0; c < c0 + omega2; ++c) out(r, c) *= 1.0 + omega3;
  return out;
}

Vector fgsm(const MlpModel& model, const Vector& x, int y, double omega4) {
  if (omega4 < 0.0) throw DomainError("fgsm: omega4 must be >= 0");
  const Vector grad = loss_and_grads(model, x, y).input_grad;
  Vector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += omega4 * sign(grad[i]);
  return out;
}

Vector pgd(const MlpModel& model, const Vector& x, int y, double omega4, double omega5,
           std::size_t omega6) {
  if (omega4 < 0.0 || omega5 < 0.0) throw DomainError("pgd: omegas must be >= 0");
  Vector adv = x;
  for (std::size_t it = 0; it < omega6; ++it) {
    const Vector grad = loss_and_grads(model, adv, y).input_grad;
    for (std::size_t i = 0; i < adv.size(); ++i) {
      const double stepped = adv[i] + omega5 * sign(grad[i]);
      adv[i] = std::clamp(stepped, x[i] - omega4, x[i] + omega4);
    }
  }
  return adv;
}

Vector apply_perturbation(const PerturbSpec& spec, const MlpModel& model, const Vector& x,
                          int y, std::uint64_t seed) {
  switch (spec.kind) {
    case PerturbKind::kNone:
      return x;
    case PerturbKind::kGaussian:
      return gaussian(x, spec.omega0, seed);
    case PerturbKind::kMissing: {
      const Matrix row(1, x.size(), x.data());
      const Matrix hit = missing_entries(row, spec.omega1, Axis::kCols, seed);
      return Vector(hit.data());
    }
    case PerturbKind::kBias: {
      // A flat feature is a 1 x n image; patches degrade to 1 x omega2 runs.
      Vector out = x;
      if (spec.omega2 > 0 && spec.omega3 != 0.0) {
        Rng rng(seed);
        const std::size_t width = std::min(spec.omega2, x.size());
        const std::size_t c0 = static_cast<std::size_t>(rng.below(x.size() - width + 1));
        for (std::size_t c = c0; c < c0 + width; ++c) out[c] *= 1.0 + spec.omega3;
      }
      return out;
    }
    case PerturbKind::kFgsm:
      return fgsm(model, x, y, spec.omega4);
    case PerturbKind::kPgd:
      return pgd(model, x, y, spec.omega4, spec.omega5, spec.omega6);
  }
  return x;
}

}  // namespace jacfuse

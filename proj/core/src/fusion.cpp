#include "jacfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jacfuse/errors.hpp"

namespace jacfuse {

Prediction::Prediction(Vector probs) : probs_(std::move(probs)) {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (p < -1e-12 || p > 1.0 + 1e-12) {
      throw DomainError("Prediction: entry outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("Prediction: probabilities sum to " + std::to_string(sum));
  }
}

std::size_t Prediction::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i) {
    if (probs_[i] > probs_[best]) best = i;
  }
  return best;
}

ClassFrequencies::ClassFrequencies(Vector freq) : freq_(std::move(freq)) {
  double sum = 0.0;
  for (std::size_t i = 0; i < freq_.size(); ++i) {
    if (!(freq_[i] > 0.0)) throw DomainError("ClassFrequencies: entries must be > 0");
    sum += freq_[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("ClassFrequencies: entries sum to " + std::to_string(sum));
  }
}

ClassFrequencies ClassFrequencies::uniform(std::size_t k) {
  return ClassFrequencies(Vector(k, 1.0 / static_cast<double>(k)));
}

Prediction softmax(const Vector& z) {
  double zmax = z[0];
  for (std::size_t i = 1; i < z.size(); ++i) zmax = std::max(zmax, z[i]);
  Vector p(z.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] /= sum;
  return Prediction(std::move(p));
}

Prediction linear_normalize(const Vector& v) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) throw DomainError("linear_normalize: negative entry");
    sum += v[i];
  }
  if (sum <= 1e-300) throw ZeroMass("linear_normalize: total mass is zero");
  Vector p = v;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] /= sum;
  return Prediction(std::move(p));
}

Prediction statistical_fuse(const Prediction& pa, const Prediction& pb,
                            const ClassFrequencies& freq) {
  const std::size_t k = pa.num_classes();
  if (pb.num_classes() != k || freq.num_classes() != k) {
    throw DimensionError("statistical_fuse: class counts differ");
  }
  Vector v(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) v[i] = pa[i] * pb[i] / freq[i];
  return linear_normalize(v);
}

Prediction logit_fuse(const Vector& za, const Vector& zb, const ClassFrequencies& freq) {
  const std::size_t k = za.size();
  if (zb.size() != k || freq.num_classes() != k) {
    throw DimensionError("logit_fuse: class counts differ");
  }
  Vector z(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) z[i] = za[i] + zb[i] - std::log(freq[i]);
  return softmax(z);
}

Prediction mean_fuse(const Prediction& pa, const Prediction& pb) {
  if (pa.num_classes() != pb.num_classes()) {
    throw DimensionError("mean_fuse: class counts differ");
  }
  Vector v(pa.num_classes(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (pa[i] + pb[i]);
  return linear_normalize(v);
}

Prediction confidence_weighted_fuse(const Prediction& pa, const Prediction& pb) {
  if (pa.num_classes() != pb.num_classes()) {
    throw DimensionError("confidence_weighted_fuse: class counts differ");
  }
  const double ca = pa[pa.argmax()];
  const double cb = pb[pb.argmax()];
  const double wa = ca / (ca + cb);
  const double wb = cb / (ca + cb);
  Vector v(pa.num_classes(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = wa * pa[i] + wb * pb[i];
  return linear_normalize(v);
}

ClassFrequencies estimate_freq(const std::vector<int>& labels, std::size_t k,
                               double smoothing) {
  if (k == 0) throw DimensionError("estimate_freq: k must be >= 1");
  if (smoothing < 0.0) throw DomainError("estimate_freq: smoothing must be >= 0");
  std::vector<double> counts(k, 0.0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw DomainError("estimate_freq: label " + std::to_string(y) + " out of [0,k)");
    }
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  const double denom = static_cast<double>(labels.size()) + static_cast<double>(k) * smoothing;
  Vector freq(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (smoothing == 0.0 && counts[i] == 0.0) {
      throw EmptyClass("estimate_freq: class " + std::to_string(i) +
                       " absent and smoothing is 0");
    }
    freq[i] = (counts[i] + smoothing) / denom;
  }
  return ClassFrequencies(std::move(freq));
}

}  // namespace jacfuse

#pragma once

#include <vector>

#include "jacfuse/matrix.hpp"

namespace jacfuse {

// Probability vector over K classes; entries in [0,1], sum within 1e-9 of 1.
class Prediction {
 public:
  explicit Prediction(Vector probs);

  const Vector& probs() const { return probs_; }
  std::size_t num_classes() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  // Lowest index wins ties.
  std::size_t argmax() const;

 private:
  Vector probs_;
};

// Class occurrence frequencies estimated from training labels; strictly
// positive, sums to 1.
class ClassFrequencies {
 public:
  explicit ClassFrequencies(Vector freq);
  static ClassFrequencies uniform(std::size_t k);

  const Vector& freq() const { return freq_; }
  std::size_t num_classes() const { return freq_.size(); }
  double operator[](std::size_t i) const { return freq_[i]; }

 private:
  Vector freq_;
};

// Max-shifted softmax.
Prediction softmax(const Vector& z);

// v / sum(v) for nonnegative v; throws ZeroMass when the total mass is
// numerically zero (<= 1e-300).
Prediction linear_normalize(const Vector& v);

// Statistical late fusion: normalize(pa (*) pb / freq), elementwise.
Prediction statistical_fuse(const Prediction& pa, const Prediction& pb,
                            const ClassFrequencies& freq);

// Equivalent logit-space form: softmax(za + zb - ln freq).
Prediction logit_fuse(const Vector& za, const Vector& zb, const ClassFrequencies& freq);

Prediction mean_fuse(const Prediction& pa, const Prediction& pb);

// Confidence-weighted mean: weights proportional to each modality's max
// probability. Non-normative baseline; the weighting rule is this library's
// concretization.
Prediction confidence_weighted_fuse(const Prediction& pa, const Prediction& pb);

// freq_i = (count_i + smoothing) / (N + k*smoothing). With smoothing 0 an
// absent class raises EmptyClass.
ClassFrequencies estimate_freq(const std::vector<int>& labels, std::size_t k,
                               double smoothing = 0.0);

}  // namespace jacfuse

#pragma once

#include <cstddef>
#include <vector>

#include "jacfuse/matrix.hpp"

namespace jacfuse {

// Plain supervised dataset: one feature vector and one label per sample.
struct LabeledDataset {
  std::vector<Vector> x;
  std::vector<int> y;
  std::size_t num_classes = 0;

  std::size_t size() const { return x.size(); }
  void validate() const;
};

// Paired two-modality dataset sharing one label per sample.
struct MultimodalDataset {
  std::vector<Vector> xa;
  std::vector<Vector> xb;
  std::vector<int> y;
  std::size_t num_classes = 0;

  std::size_t size() const { return y.size(); }
  void validate() const;

  LabeledDataset modality_a() const;
  LabeledDataset modality_b() const;
  // Per-sample concatenation [xa | xb]; the view used by unimodal
  // experiments on jointly observed features.
  LabeledDataset combined() const;
};

}  // namespace jacfuse

#include "jacfuse/data.hpp"

#include <string>

#include "jacfuse/errors.hpp"

namespace jacfuse {

namespace {

void check_labels(const std::vector<int>& y, std::size_t k) {
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw DomainError("dataset: label " + std::to_string(label) + " out of [0,k)");
    }
  }
}

}  // namespace

void LabeledDataset::validate() const {
  if (x.size() != y.size()) throw DimensionError("LabeledDataset: x/y lengths differ");
  if (num_classes == 0) throw DomainError("LabeledDataset: num_classes must be >= 1");
  check_labels(y, num_classes);
}

void MultimodalDataset::validate() const {
  if (xa.size() != y.size() || xb.size() != y.size()) {
    throw DimensionError("MultimodalDataset: modality/label lengths differ");
  }
  if (num_classes == 0) throw DomainError("MultimodalDataset: num_classes must be >= 1");
  check_labels(y, num_classes);
}

LabeledDataset MultimodalDataset::modality_a() const {
  return LabeledDataset{xa, y, num_classes};
}

LabeledDataset MultimodalDataset::modality_b() const {
  return LabeledDataset{xb, y, num_classes};
}

LabeledDataset MultimodalDataset::combined() const {
  LabeledDataset out;
  out.y = y;
  out.num_classes = num_classes;
  out.x.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::vector<double> joined = xa[i].data();
    joined.insert(joined.end(), xb[i].data().begin(), xb[i].data().end());
    out.x.emplace_back(std::move(joined));
  }
  return out;
}

}  // namespace jacfuse

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jacfuse/data.hpp"
#include "jacfuse/jacreg.hpp"
#include "jacfuse/matrix.hpp"

namespace jacfuse {

enum class Activation { kRelu, kIdentity };

struct MlpLayer {
  Matrix w;
  Vector b;
  Activation act = Activation::kIdentity;
};

// Fully connected classifier with relu hidden layers and an identity final
// layer producing raw logits. The last layer doubles as the UnimodalHead fed
// to the recalibration machinery.
class MlpModel {
 public:
  MlpModel() = default;
  explicit MlpModel(std::vector<MlpLayer> layers);

  // dims = {input, hidden..., classes}. Weights drawn from the scaled uniform
  // range +-scale*sqrt(6/fan_in); biases start at zero.
  static MlpModel init(const std::vector<std::size_t>& dims, std::uint64_t seed,
                       double weight_init_scale = 1.0);

  const std::vector<MlpLayer>& layers() const { return layers_; }
  std::vector<MlpLayer>& layers() { return layers_; }
  std::size_t input_dim() const { return layers_.front().w.cols(); }
  std::size_t num_classes() const { return layers_.back().w.rows(); }

 private:
  std::vector<MlpLayer> layers_;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double weight_init_scale = 1.0;

  void validate() const;
};

struct ForwardResult {
  Vector logits;
  Vector feature;  // penultimate activation, the h fed into the last layer
};

ForwardResult forward(const MlpModel& m, const Vector& x);

// Softmax cross-entropy loss and its gradients by reverse accumulation.
// param_grads mirrors the layer shapes; input_grad is d loss / d x.
struct LossGrads {
  double loss = 0.0;
  std::vector<MlpLayer> param_grads;
  Vector input_grad;
};

LossGrads loss_and_grads(const MlpModel& m, const Vector& x, int y);

// Plain minibatch SGD. Deterministic given cfg.seed (shuffling uses it; the
// model must already be initialized). When epoch_losses is non-null it
// receives the epoch-averaged training loss.
MlpModel train(MlpModel m, const LabeledDataset& data, const TrainConfig& cfg,
               std::vector<double>* epoch_losses = nullptr);

double accuracy(const MlpModel& m, const LabeledDataset& data);

UnimodalHead as_head(const MlpModel& m, std::string name = "");

Vector features(const MlpModel& m, const Vector& x);

// Versioned plain-text serialization: dimensions plus row-major parameters,
// printed with enough digits to round-trip IEEE doubles exactly.
void save_model(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace jacfuse

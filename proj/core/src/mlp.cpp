#include "jacfuse/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "jacfuse/errors.hpp"
#include "jacfuse/fusion.hpp"
#include "jacfuse/rng.hpp"

namespace jacfuse {

namespace {

Vector apply_activation(const Vector& z, Activation act) {
  if (act == Activation::kIdentity) return z;
  Vector out = z;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MlpModel::MlpModel(std::vector<MlpLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("MlpModel: needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].w.rows() != layers_[i].b.size()) {
      throw DimensionError("MlpModel: layer weight/bias rows differ");
    }
    if (i > 0 && layers_[i].w.cols() != layers_[i - 1].w.rows()) {
      throw DimensionError("MlpModel: consecutive layer dimensions do not chain");
    }
  }
  if (layers_.back().act != Activation::kIdentity) {
    throw DomainError("MlpModel: final layer must emit raw logits");
  }
}

MlpModel MlpModel::init(const std::vector<std::size_t>& dims, std::uint64_t seed,
                        double weight_init_scale) {
  if (dims.size() < 2) throw DimensionError("MlpModel::init: need input and output dims");
  if (!(weight_init_scale > 0.0)) {
    throw DomainError("MlpModel::init: weight_init_scale must be > 0");
  }
  Rng rng(seed);
  std::vector<MlpLayer> layers;
  layers.reserve(dims.size() - 1);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i];
    const std::size_t fan_out = dims[i + 1];
    const double r = weight_init_scale * std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix w(fan_out, fan_in, 0.0);
    for (std::size_t row = 0; row < fan_out; ++row)
      for (std::size_t col = 0; col < fan_in; ++col) w(row, col) = rng.uniform(-r, r);
    const bool last = (i + 2 == dims.size());
    layers.push_back({std::move(w), Vector(fan_out, 0.0),
                      last ? Activation::kIdentity : Activation::kRelu});
  }
  return MlpModel(std::move(layers));
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("TrainConfig: learning_rate must be > 0");
  if (batch_size < 1) throw DomainError("TrainConfig: batch_size must be >= 1");
  if (!(weight_init_scale > 0.0)) {
    throw DomainError("TrainConfig: weight_init_scale must be > 0");
  }
}

ForwardResult forward(const MlpModel& m, const Vector& x) {
  if (x.size() != m.input_dim()) throw DimensionError("forward: input dimension differs");
  Vector h = x;
  Vector feature = x;  // for a single-layer net the feature is the input itself
  const auto& layers = m.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i + 1 == layers.size()) feature = h;
    h = apply_activation(add(matvec(layers[i].w, h), layers[i].b), layers[i].act);
  }
  return {std::move(h), std::move(feature)};
}

LossGrads loss_and_grads(const MlpModel& m, const Vector& x, int y) {
  const auto& layers = m.layers();
  if (y < 0 || static_cast<std::size_t>(y) >= m.num_classes()) {
    throw DomainError("loss_and_grads: label out of range");
  }

  // Forward pass, keeping every post-activation.
  std::vector<Vector> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(x);
  for (const auto& layer : layers) {
    acts.push_back(apply_activation(add(matvec(layer.w, acts.back()), layer.b), layer.act));
  }
  const Vector& logits = acts.back();

  const Prediction p = softmax(logits);
  const double loss = -std::log(std::max(p[static_cast<std::size_t>(y)], 1e-300));

  // Backward: d loss / d logits = p - onehot(y).
  Vector delta(logits.size(), 0.0);
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = p[i];
  delta[static_cast<std::size_t>(y)] -= 1.0;

  LossGrads out;
  out.loss = loss;
  out.param_grads.resize(layers.size());
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Vector& input = acts[li];
    Matrix gw(layers[li].w.rows(), layers[li].w.cols(), 0.0);
    for (std::size_t r = 0; r < gw.rows(); ++r)
      for (std::size_t c = 0; c < gw.cols(); ++c) gw(r, c) = delta[r] * input[c];
    out.param_grads[li] = {std::move(gw), delta, layers[li].act};

    Vector prev = matvec(transpose(layers[li].w), delta);
    if (li > 0 && layers[li - 1].act == Activation::kRelu) {
      // acts[li] is the post-relu output of layer li-1.
      for (std::size_t i = 0; i < prev.size(); ++i) {
        if (acts[li][i] <= 0.0) prev[i] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  out.input_grad = std::move(delta);
  return out;
}

MlpModel train(MlpModel m, const LabeledDataset& data, const TrainConfig& cfg,
               std::vector<double>* epoch_losses) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) throw DomainError("train: empty dataset");
  if (epoch_losses) epoch_losses->clear();

  Rng rng(derive_seed(cfg.seed, 0x7261696eULL));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the run's own stream.
    for (std::size_t i = order.size(); i-- > 1;) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);

      std::vector<MlpLayer> acc;
      acc.reserve(m.layers().size());
      for (const auto& layer : m.layers()) {
        acc.push_back({Matrix(layer.w.rows(), layer.w.cols(), 0.0),
                       Vector(layer.b.size(), 0.0), layer.act});
      }
      for (std::size_t idx = start; idx < end; ++idx) {
        const auto lg = loss_and_grads(m, data.x[order[idx]], data.y[order[idx]]);
        epoch_loss += lg.loss;
        for (std::size_t li = 0; li < acc.size(); ++li) {
          for (std::size_t i = 0; i < acc[li].w.data().size(); ++i)
            acc[li].w.data()[i] += lg.param_grads[li].w.data()[i];
          for (std::size_t i = 0; i < acc[li].b.size(); ++i)
            acc[li].b[i] += lg.param_grads[li].b[i];
        }
      }
      for (std::size_t li = 0; li < acc.size(); ++li) {
        auto& layer = m.layers()[li];
        for (std::size_t i = 0; i < layer.w.data().size(); ++i)
          layer.w.data()[i] -= cfg.learning_rate * inv * acc[li].w.data()[i];
        for (std::size_t i = 0; i < layer.b.size(); ++i)
          layer.b[i] -= cfg.learning_rate * inv * acc[li].b[i];
      }
    }
    if (epoch_losses) {
      epoch_losses->push_back(epoch_loss / static_cast<double>(data.size()));
    }
  }
  return m;
}

double accuracy(const MlpModel& m, const LabeledDataset& data) {
  data.validate();
  if (data.size() == 0) throw DomainError("accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector logits = forward(m, data.x[i]).logits;
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.size(); ++c) {
      if (logits[c] > logits[best]) best = c;
    }
    if (best == static_cast<std::size_t>(data.y[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

UnimodalHead as_head(const MlpModel& m, std::string name) {
  const MlpLayer& last = m.layers().back();
  return UnimodalHead{last.w, last.b, std::move(name)};
}

Vector features(const MlpModel& m, const Vector& x) { return forward(m, x).feature; }

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_model: cannot open " + path.string());
  out << "jacfuse-mlp v1\n";
  out << "layers " << m.layers().size() << "\n";
  for (const auto& layer : m.layers()) {
    out << "layer " << layer.w.rows() << " " << layer.w.cols() << " "
        << (layer.act == Activation::kRelu ? "relu" : "identity") << "\n";
    out << "w";
    for (double v : layer.w.data()) out << " " << format_double(v);
    out << "\nb";
    for (double v : layer.b.data()) out << " " << format_double(v);
    out << "\n";
  }
  if (!out) throw IoError("save_model: write failed for " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_model: cannot open " + path.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "jacfuse-mlp" || version != "v1") {
    throw ParseError("load_model: unrecognized header in " + path.string());
  }
  std::string tok;
  std::size_t n_layers = 0;
  in >> tok >> n_layers;
  if (tok != "layers" || n_layers == 0) {
    throw ParseError("load_model: bad layer count in " + path.string());
  }
  std::vector<MlpLayer> layers;
  layers.reserve(n_layers);
  for (std::size_t li = 0; li < n_layers; ++li) {
    std::size_t rows = 0, cols = 0;
    std::string act;
    in >> tok >> rows >> cols >> act;
    if (tok != "layer" || rows == 0 || cols == 0 || (act != "relu" && act != "identity")) {
      throw ParseError("load_model: bad layer header in " + path.string());
    }
    std::vector<double> wdata(rows * cols);
    in >> tok;
    if (tok != "w") throw ParseError("load_model: missing weights in " + path.string());
    for (double& v : wdata) in >> v;
    std::vector<double> bdata(rows);
    in >> tok;
    if (tok != "b") throw ParseError("load_model: missing bias in " + path.string());
    for (double& v : bdata) in >> v;
    if (!in) throw ParseError("load_model: truncated file " + path.string());
    layers.push_back({Matrix(rows, cols, std::move(wdata)), Vector(std::move(bdata)),
                      act == "relu" ? Activation::kRelu : Activation::kIdentity});
  }
  return MlpModel(std::move(layers));
}

}  // namespace jacfuse

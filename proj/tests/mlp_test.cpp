#include "jacfuse/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <doctest.h>

#include "jacfuse/datagen.hpp"
#include "jacfuse/errors.hpp"
#include "jacfuse/rng.hpp"

using namespace jacfuse;

namespace {

// Layer-by-layer re-implementation used as the forward oracle.
Vector oracle_forward(const MlpModel& m, const Vector& x) {
  std::vector<double> h = x.data();
  for (std::size_t li = 0; li < m.layers().size(); ++li) {
    const MlpLayer& layer = m.layers()[li];
    std::vector<double> next(layer.w.rows());
    for (std::size_t r = 0; r < layer.w.rows(); ++r) {
      double s = layer.b[r];
      for (std::size_t c = 0; c < layer.w.cols(); ++c) s += layer.w(r, c) * h[c];
      next[r] = layer.act == Activation::kRelu ? std::max(0.0, s) : s;
    }
    h = std::move(next);
  }
  return Vector(h);
}

bool same_params(const MlpModel& a, const MlpModel& b) {
  if (a.layers().size() != b.layers().size()) return false;
  for (std::size_t li = 0; li < a.layers().size(); ++li) {
    if (a.layers()[li].w.data() != b.layers()[li].w.data()) return false;
    if (a.layers()[li].b.data() != b.layers()[li].b.data()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("forward basics") {
  SUBCASE("zero-weight net emits its bias") {
    MlpModel m({MlpLayer{Matrix(2, 3, 0.0), Vector{0.5, -1.5}, Activation::kIdentity}});
    const ForwardResult out = forward(m, Vector{1.0, 2.0, 3.0});
    CHECK(out.logits[0] == 0.5);
    CHECK(out.logits[1] == -1.5);
  }
  SUBCASE("identity layer passes input through") {
    MlpModel m({MlpLayer{Matrix::identity(3), Vector(3, 0.0), Activation::kIdentity}});
    const Vector x{0.1, -0.2, 0.3};
    const ForwardResult out = forward(m, x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.logits[i] == x[i]);
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.feature[i] == x[i]);
  }
  SUBCASE("random net matches the layer-by-layer oracle") {
    const MlpModel m = MlpModel::init({3, 8, 8, 4}, 99);
    Rng rng(61);
    for (int t = 0; t < 20; ++t) {
      Vector x(3, 0.0);
      for (std::size_t i = 0; i < 3; ++i) x[i] = rng.normal();
      const Vector got = forward(m, x).logits;
      const Vector want = oracle_forward(m, x);
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("loss at uniform logits is ln 2") {
  MlpModel m({MlpLayer{Matrix(2, 2, 0.0), Vector(2, 0.0), Activation::kIdentity}});
  const LossGrads lg = loss_and_grads(m, Vector{0.7, -0.3}, 0);
  CHECK(lg.loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("gradients match central finite differences on a 2-16-16-2 net") {
  const MlpModel model = MlpModel::init({2, 16, 16, 2}, 7);
  const Vector x{0.4, -0.9};
  const int y = 1;
  const double h = 1e-5;
  const LossGrads analytic = loss_and_grads(model, x, y);

  double worst = 0.0;
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    for (std::size_t idx = 0; idx < model.layers()[li].w.data().size(); ++idx) {
      MlpModel up = model, down = model;
      up.layers()[li].w.data()[idx] += h;
      down.layers()[li].w.data()[idx] -= h;
      const double fd =
          (loss_and_grads(up, x, y).loss - loss_and_grads(down, x, y).loss) / (2.0 * h);
      const double an = analytic.param_grads[li].w.data()[idx];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
    }
    for (std::size_t idx = 0; idx < model.layers()[li].b.size(); ++idx) {
      MlpModel up = model, down = model;
      up.layers()[li].b[idx] += h;
      down.layers()[li].b[idx] -= h;
      const double fd =
          (loss_and_grads(up, x, y).loss - loss_and_grads(down, x, y).loss) / (2.0 * h);
      const double an = analytic.param_grads[li].b[idx];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
    }
  }
  CHECK(worst <= 1e-5);

  double worst_input = 0.0;
  for (std::size_t idx = 0; idx < x.size(); ++idx) {
    Vector up = x, down = x;
    up[idx] += h;
    down[idx] -= h;
    const double fd =
        (loss_and_grads(model, up, y).loss - loss_and_grads(model, down, y).loss) /
        (2.0 * h);
    const double an = analytic.input_grad[idx];
    worst_input =
        std::max(worst_input, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
  }
  CHECK(worst_input <= 1e-5);

  CHECK_THROWS_AS(loss_and_grads(model, x, 2), DomainError);
}

TEST_CASE("training on two-moons") {
  const MultimodalDataset data = two_moons(2000, 0.1, 404);
  const auto [train_set, test_set] = split_train_test(data, 0.8, 404);

  SUBCASE("combined 2-16-16-2 net reaches the accuracy floor") {
    TrainConfig cfg;
    cfg.seed = 1;
    MlpModel m = MlpModel::init({2, 16, 16, 2}, 10, cfg.weight_init_scale);
    m = train(std::move(m), train_set.combined(), cfg);
    const double acc2d = accuracy(m, test_set.combined());
    CHECK(acc2d >= 0.95);

    // A single coordinate separates only part of the space.
    TrainConfig xcfg;
    xcfg.seed = 2;
    MlpModel mx = MlpModel::init({1, 16, 16, 2}, 11, xcfg.weight_init_scale);
    mx = train(std::move(mx), train_set.modality_a(), xcfg);
    const double accx = accuracy(mx, test_set.modality_a());
    CHECK(accx > 0.5);
    CHECK(accx < acc2d);
  }

  SUBCASE("zero epochs leaves the model untouched") {
    TrainConfig cfg;
    cfg.epochs = 0;
    const MlpModel m = MlpModel::init({2, 8, 2}, 12);
    const MlpModel trained = train(m, train_set.combined(), cfg);
    CHECK(same_params(m, trained));
  }

  SUBCASE("epoch-averaged loss trends down early") {
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 3;
    std::vector<double> losses;
    MlpModel m = MlpModel::init({2, 16, 16, 2}, 13);
    train(std::move(m), train_set.combined(), cfg, &losses);
    REQUIRE(losses.size() == 10);
    int violations = 0;
    for (std::size_t i = 1; i < losses.size(); ++i) {
      if (losses[i] > losses[i - 1]) ++violations;
    }
    CHECK(violations <= 2);
  }

  SUBCASE("identical seeds give bitwise-identical parameters") {
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 4;
    MlpModel a = MlpModel::init({2, 8, 2}, 14);
    MlpModel b = a;
    a = train(std::move(a), train_set.combined(), cfg);
    b = train(std::move(b), train_set.combined(), cfg);
    CHECK(same_params(a, b));
  }
}

TEST_CASE("accuracy helpers") {
  // Constant net predicting class 1 on a constant-label dataset.
  MlpModel m({MlpLayer{Matrix(2, 1, 0.0), Vector{0.0, 1.0}, Activation::kIdentity}});
  LabeledDataset data;
  data.num_classes = 2;
  for (int i = 0; i < 10; ++i) {
    data.x.push_back(Vector{static_cast<double>(i)});
    data.y.push_back(1);
  }
  CHECK(accuracy(m, data) == doctest::Approx(1.0));

  // Brute-count oracle on a trained-ish random model.
  const MlpModel r = MlpModel::init({1, 4, 2}, 15);
  Rng rng(62);
  LabeledDataset random_data;
  random_data.num_classes = 2;
  for (int i = 0; i < 50; ++i) {
    random_data.x.push_back(Vector{rng.normal()});
    random_data.y.push_back(static_cast<int>(rng.below(2)));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < random_data.x.size(); ++i) {
    const Vector logits = forward(r, random_data.x[i]).logits;
    const std::size_t pick = logits[1] > logits[0] ? 1 : 0;
    hits += pick == static_cast<std::size_t>(random_data.y[i]);
  }
  CHECK(accuracy(r, random_data) ==
        doctest::Approx(static_cast<double>(hits) / random_data.x.size()));
}

TEST_CASE("head and feature accessors") {
  const MlpModel m = MlpModel::init({3, 5, 4}, 16);
  const UnimodalHead head = as_head(m, "audio");
  CHECK(head.w.rows() == 4);
  CHECK(head.w.cols() == 5);
  CHECK(head.name == "audio");

  const Vector x{0.1, 0.2, 0.3};
  const Vector feat = features(m, x);
  CHECK(feat.size() == 5);
  const Vector logits = forward(m, x).logits;
  const Vector rebuilt = add(matvec(head.w, feat), head.b);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(logits[i] == doctest::Approx(rebuilt[i]).epsilon(1e-14));
}

TEST_CASE("model serialization round-trips exactly") {
  const MlpModel m = MlpModel::init({2, 16, 16, 2}, 17);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "jacfuse_model_roundtrip.txt";
  save_model(m, path);
  const MlpModel loaded = load_model(path);
  CHECK(same_params(m, loaded));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_model("/nonexistent/path/model.txt"), IoError);
}

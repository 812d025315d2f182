#include "jacfuse/datagen.hpp"

#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "jacfuse/errors.hpp"
#include "jacfuse/mlp.hpp"

using namespace jacfuse;

TEST_CASE("two_moons geometry without jitter") {
  const MultimodalDataset data = two_moons(4, 0.0, 77);
  REQUIRE(data.size() == 4);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.xa[i][0];
    const double y = data.xb[i][0];
    if (data.y[i] == 0) {
      ++zeros;
      CHECK(x * x + y * y == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(y >= -1e-12);
    } else {
      const double dx = x - 1.0, dy = y - 0.5;
      CHECK(dx * dx + dy * dy == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(y <= 0.5 + 1e-12);
    }
  }
  CHECK(zeros == 2);

  // ceil/floor balance for odd n
  const MultimodalDataset odd = two_moons(5, 0.0, 77);
  std::size_t z = 0;
  for (int label : odd.y) z += label == 0;
  CHECK(z == 3);
}

TEST_CASE("two_moons determinism and argument checks") {
  const MultimodalDataset a = two_moons(100, 0.1, 123);
  const MultimodalDataset b = two_moons(100, 0.1, 123);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.xa[i][0] == b.xa[i][0]);
    CHECK(a.xb[i][0] == b.xb[i][0]);
  }
  const MultimodalDataset c = two_moons(100, 0.1, 124);
  bool any_differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_differ |= a.xa[i][0] != c.xa[i][0];
  CHECK(any_differ);

  CHECK_THROWS_AS(two_moons(1, 0.1, 0), DomainError);
}

TEST_CASE("gaussian_blobs separation controls separability") {
  SUBCASE("zero separation collapses all class means") {
    const MultimodalDataset data = gaussian_blobs(600, 3, 4, 4, 0.0, 88);
    // Per-class sample means of modality A should all be near the origin.
    for (std::size_t cls = 0; cls < 3; ++cls) {
      Vector mean(4, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (static_cast<std::size_t>(data.y[i]) != cls) continue;
        ++count;
        for (std::size_t d = 0; d < 4; ++d) mean[d] += data.xa[i][d];
      }
      for (std::size_t d = 0; d < 4; ++d) {
        CHECK(std::abs(mean[d] / static_cast<double>(count)) <= 0.5);
      }
    }
  }
  SUBCASE("large separation is nearly linearly separable") {
    const MultimodalDataset data = gaussian_blobs(900, 3, 4, 4, 8.0, 89);
    const auto [train_set, test_set] = split_train_test(data, 0.8, 89);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 6;
    MlpModel linear = MlpModel::init({8, 3}, 21);  // single linear layer
    linear = train(std::move(linear), train_set.combined(), cfg);
    CHECK(accuracy(linear, test_set.combined()) >= 0.95);
  }
  SUBCASE("reproducible under seed") {
    const MultimodalDataset a = gaussian_blobs(50, 3, 2, 3, 1.0, 90);
    const MultimodalDataset b = gaussian_blobs(50, 3, 2, 3, 1.0, 90);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t d = 0; d < 2; ++d) CHECK(a.xa[i][d] == b.xa[i][d]);
      for (std::size_t d = 0; d < 3; ++d) CHECK(a.xb[i][d] == b.xb[i][d]);
    }
  }
}

TEST_CASE("split_train_test proportions and stability") {
  const MultimodalDataset data = two_moons(1000, 0.1, 99);
  const auto [train_set, test_set] = split_train_test(data, 0.8, 7);
  CHECK(train_set.size() == 800);
  CHECK(test_set.size() == 200);

  const auto [train2, test2] = split_train_test(data, 0.8, 7);
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    CHECK(train_set.xa[i][0] == train2.xa[i][0]);
    CHECK(train_set.y[i] == train2.y[i]);
  }
  CHECK_THROWS_AS(split_train_test(data, 1.5, 7), DomainError);
}

TEST_CASE("dataset serialization round-trips") {
  const MultimodalDataset data = gaussian_blobs(40, 3, 2, 3, 2.0, 91);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "jacfuse_dataset_roundtrip.txt";
  save_dataset(data, path);
  const MultimodalDataset loaded = load_dataset(path);
  REQUIRE(loaded.size() == data.size());
  CHECK(loaded.num_classes == data.num_classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(loaded.y[i] == data.y[i]);
    for (std::size_t d = 0; d < 2; ++d) CHECK(loaded.xa[i][d] == data.xa[i][d]);
    for (std::size_t d = 0; d < 3; ++d) CHECK(loaded.xb[i][d] == data.xb[i][d]);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_dataset("/nonexistent/dataset.txt"), IoError);
}

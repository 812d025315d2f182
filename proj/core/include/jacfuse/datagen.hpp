#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "jacfuse/data.hpp"

namespace jacfuse {

// Two interleaving half-circles of unit radius: the upper arc (cos t, sin t)
// carries label 0, the lower arc (1 - cos t, 0.5 - sin t) carries label 1 and
// dips to (1, -0.5). Gaussian jitter of std `jitter` is added per coordinate.
// Modality A is the horizontal coordinate, modality B the vertical one.
// Labels are balanced: ceil(n/2) zeros, floor(n/2) ones.
MultimodalDataset two_moons(std::size_t n, double jitter, std::uint64_t seed);

// K Gaussian classes with unit covariance. The class means sit on a scaled
// simplex: mean_k is the first dim coordinates of separation*(e_k - 1/k), the
// centered standard-simplex vertex in R^k (exact when dim >= k, a projection
// otherwise). Independent mean draws per modality are not used; both
// modalities share the construction with their own dimensions.
MultimodalDataset gaussian_blobs(std::size_t n, std::size_t k, std::size_t dim_a,
                                 std::size_t dim_b, double separation,
                                 std::uint64_t seed);

// Seed-stable shuffled split; first element holds round(train_fraction * n)
// samples.
std::pair<MultimodalDataset, MultimodalDataset> split_train_test(
    const MultimodalDataset& data, double train_fraction, std::uint64_t seed);

// Delimited text format, one sample per line: modality A fields, modality B
// fields, label. A header line carries the class count and dimensions.
void save_dataset(const MultimodalDataset& data, const std::filesystem::path& path);
MultimodalDataset load_dataset(const std::filesystem::path& path);

}  // namespace jacfuse

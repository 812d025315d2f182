#include "jacfuse/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "jacfuse/errors.hpp"
#include "jacfuse/rng.hpp"

namespace jacfuse {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MultimodalDataset two_moons(std::size_t n, double jitter, std::uint64_t seed) {
  if (n < 2) throw DomainError("two_moons: n must be >= 2");
  if (jitter < 0.0) throw DomainError("two_moons: jitter must be >= 0");
  const std::size_t n0 = (n + 1) / 2;
  Rng rng(seed);

  MultimodalDataset out;
  out.num_classes = 2;
  out.xa.reserve(n);
  out.xb.reserve(n);
  out.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < n0 ? 0 : 1;
    const double t = rng.uniform(0.0, M_PI);
    double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (jitter > 0.0) {
      x += rng.normal(0.0, jitter);
      y += rng.normal(0.0, jitter);
    }
    out.xa.push_back(Vector{x});
    out.xb.push_back(Vector{y});
    out.y.push_back(label);
  }
  return out;
}

MultimodalDataset gaussian_blobs(std::size_t n, std::size_t k, std::size_t dim_a,
                                 std::size_t dim_b, double separation,
                                 std::uint64_t seed) {
  if (n < k || k < 2) throw DomainError("gaussian_blobs: need n >= k >= 2");
  if (dim_a == 0 || dim_b == 0) throw DomainError("gaussian_blobs: dims must be >= 1");
  if (separation < 0.0) throw DomainError("gaussian_blobs: separation must be >= 0");
  Rng rng(seed);

  auto mean_for = [&](std::size_t cls, std::size_t dim) {
    Vector m(dim, 0.0);
    const double shift = 1.0 / static_cast<double>(k);
    for (std::size_t d = 0; d < dim && d < k; ++d) {
      m[d] = separation * ((d == cls ? 1.0 : 0.0) - shift);
    }
    return m;
  };

  MultimodalDataset out;
  out.num_classes = k;
  out.xa.reserve(n);
  out.xb.reserve(n);
  out.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % k;  // balanced by round-robin
    Vector a = mean_for(cls, dim_a);
    for (std::size_t d = 0; d < dim_a; ++d) a[d] += rng.normal();
    Vector b = mean_for(cls, dim_b);
    for (std::size_t d = 0; d < dim_b; ++d) b[d] += rng.normal();
    out.xa.push_back(std::move(a));
    out.xb.push_back(std::move(b));
    out.y.push_back(static_cast<int>(cls));
  }
  return out;
}

std::pair<MultimodalDataset, MultimodalDataset> split_train_test(
    const MultimodalDataset& data, double train_fraction, std::uint64_t seed) {
  data.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("split_train_test: fraction must be in (0,1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x73706c69ULL));
  for (std::size_t i = order.size(); i-- > 1;) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  const std::size_t n_train =
      static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(data.size())));
  if (n_train == 0 || n_train == data.size()) {
    throw DomainError("split_train_test: split leaves an empty side");
  }

  MultimodalDataset train, test;
  train.num_classes = test.num_classes = data.num_classes;
  for (std::size_t i = 0; i < order.size(); ++i) {
    MultimodalDataset& dst = i < n_train ? train : test;
    dst.xa.push_back(data.xa[order[i]]);
    dst.xb.push_back(data.xb[order[i]]);
    dst.y.push_back(data.y[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

void save_dataset(const MultimodalDataset& data, const std::filesystem::path& path) {
  data.validate();
  if (data.size() == 0) throw DomainError("save_dataset: empty dataset");
  std::ofstream out(path);
  if (!out) throw IoError("save_dataset: cannot open " + path.string());
  out << "# jacfuse-dataset v1 k=" << data.num_classes << " dim_a=" << data.xa[0].size()
      << " dim_b=" << data.xb[0].size() << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t d = 0; d < data.xa[i].size(); ++d) {
      out << format_double(data.xa[i][d]) << " ";
    }
    for (std::size_t d = 0; d < data.xb[i].size(); ++d) {
      out << format_double(data.xb[i][d]) << " ";
    }
    out << data.y[i] << "\n";
  }
  if (!out) throw IoError("save_dataset: write failed for " + path.string());
}

MultimodalDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_dataset: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::size_t k = 0, dim_a = 0, dim_b = 0;
  if (std::sscanf(header.c_str(), "# jacfuse-dataset v1 k=%zu dim_a=%zu dim_b=%zu", &k,
                  &dim_a, &dim_b) != 3) {
    throw ParseError("load_dataset: bad header in " + path.string());
  }
  MultimodalDataset out;
  out.num_classes = k;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<double> a(dim_a), b(dim_b);
    int label = 0;
    for (double& v : a) fields >> v;
    for (double& v : b) fields >> v;
    fields >> label;
    if (!fields) {
      throw ParseError("load_dataset: " + path.string() + ":" + std::to_string(line_no) +
                       ": malformed sample line");
    }
    out.xa.emplace_back(std::move(a));
    out.xb.emplace_back(std::move(b));
    out.y.push_back(label);
  }
  out.validate();
  return out;
}

}  // namespace jacfuse

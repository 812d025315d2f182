#include <benchmark/benchmark.h>

#include "jacfuse/fusion.hpp"
#include "jacfuse/jacreg.hpp"
#include "jacfuse/matrix.hpp"
#include "jacfuse/mlp.hpp"
#include "jacfuse/rng.hpp"
#include "jacfuse/sylvester.hpp"

namespace {

using namespace jacfuse;

Vector random_logits(Rng& rng, std::size_t k) {
  Vector z(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) z[i] = rng.normal(0.0, 2.0);
  return z;
}

UnimodalHead random_head(Rng& rng, std::size_t k, std::size_t h) {
  Matrix w(k, h, 0.0);
  for (double& v : w.data()) v = rng.normal(0.0, 1.0 / std::sqrt(static_cast<double>(h)));
  return UnimodalHead{std::move(w), Vector(k, 0.0), ""};
}

void BM_SymEig(benchmark::State& state) {
  const std::size_t k = state.range(0);
  Rng rng(1);
  Matrix m(k, k, 0.0);
  for (double& v : m.data()) v = rng.normal();
  m = scale(add(m, transpose(m)), 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sym_eig(m));
  }
}
BENCHMARK(BM_SymEig)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_SolveStructured(benchmark::State& state) {
  const std::size_t k = state.range(0);
  Rng rng(2);
  const Prediction p = softmax(random_logits(rng, k));
  const UnimodalHead head = random_head(rng, k, k + 2);
  const SylvesterOperands ops = build_operands(softmax_jacobian(p), head, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_structured(ops));
  }
}
BENCHMARK(BM_SolveStructured)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_KroneckerOracle(benchmark::State& state) {
  const std::size_t k = state.range(0);
  Rng rng(3);
  const Prediction p = softmax(random_logits(rng, k));
  const UnimodalHead head = random_head(rng, k, k + 2);
  const SylvesterOperands ops = build_operands(softmax_jacobian(p), head, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_kronecker_oracle(ops));
  }
}
BENCHMARK(BM_KroneckerOracle)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_Recalibrate(benchmark::State& state) {
  const std::size_t k = state.range(0);
  Rng rng(4);
  const Vector za = random_logits(rng, k);
  const Vector zb = random_logits(rng, k);
  const UnimodalHead head_a = random_head(rng, k, k + 2);
  const UnimodalHead head_b = random_head(rng, k, k + 2);
  const ClassFrequencies freq = ClassFrequencies::uniform(k);
  FusionConfig cfg;
  cfg.gamma = 0.1;
  cfg.regularize_a = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(recalibrate(za, zb, head_a, head_b, freq, cfg));
  }
}
BENCHMARK(BM_Recalibrate)->Arg(2)->Arg(3)->Arg(10);

void BM_MlpForward(benchmark::State& state) {
  const MlpModel m = MlpModel::init({2, 16, 16, 2}, 5);
  const Vector x{0.3, -0.4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(m, x));
  }
}
BENCHMARK(BM_MlpForward);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "lsa/autoencoder.hpp"
#include "lsa/embeddings.hpp"
#include "lsa/numkit.hpp"

namespace {

lsa::DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  lsa::DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const lsa::DenseMatrix m = random_matrix(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lsa::svd(m));
}
BENCHMARK(BM_Svd)->Arg(8)->Arg(32)->Arg(100);

void BM_SvdWide(benchmark::State& state) {
  const lsa::DenseMatrix m = random_matrix(50, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(lsa::svd(m));
}
BENCHMARK(BM_SvdWide)->Arg(2000)->Arg(20000);

void BM_SymEig(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const lsa::DenseMatrix s = lsa::gram_rows(random_matrix(n, 2 * n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(lsa::sym_eig(s));
}
BENCHMARK(BM_SymEig)->Arg(8)->Arg(32)->Arg(100);

void BM_PowerIteration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const lsa::DenseMatrix s = lsa::gram_rows(random_matrix(n, 2 * n, 4));
  for (auto _ : state) benchmark::DoNotOptimize(lsa::power_iteration(s, 1e-10, 10'000, 7));
}
BENCHMARK(BM_PowerIteration)->Arg(32)->Arg(300);

void BM_PolyInitAndFlow(benchmark::State& state) {
  const lsa::DenseMatrix x = random_matrix(50, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) {
    const lsa::SpectralInit init = lsa::asymmetric_poly_init(x, 2, false);
    benchmark::DoNotOptimize(lsa::gradient_flow_solution(init));
  }
}
BENCHMARK(BM_PolyInitAndFlow)->Arg(2000);

void BM_AnalogyAccuracy(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> words(vocab);
  for (std::size_t i = 0; i < vocab; ++i) words[i] = "w" + std::to_string(i);
  const lsa::EmbeddingTable table(words, random_matrix(50, vocab, 6));
  std::vector<lsa::AnalogyTuple> tuples;
  for (std::size_t i = 0; i + 3 < 400; i += 4) tuples.push_back({words[i], words[i + 1], words[i + 2], words[i + 3]});
  for (auto _ : state) benchmark::DoNotOptimize(lsa::analogy_accuracy(table, tuples));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * tuples.size()));
}
BENCHMARK(BM_AnalogyAccuracy)->Arg(2000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();

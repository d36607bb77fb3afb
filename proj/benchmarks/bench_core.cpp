#include <benchmark/benchmark.h>

#include "sdcn/autoencoder.hpp"
#include "sdcn/clustering.hpp"
#include "sdcn/deep_cluster.hpp"
#include "sdcn/presets.hpp"
#include "sdcn/rng.hpp"

namespace {

sdcn::MatD latent_cloud(sdcn::Index n, sdcn::Index dim, std::uint64_t seed) {
  sdcn::Rng rng(seed);
  sdcn::MatD points(n, dim);
  for (sdcn::Index i = 0; i < points.size(); ++i) points.data()[i] = rng.normal();
  return points;
}

void BM_KMeans(benchmark::State& state) {
  const auto points = latent_cloud(state.range(0), 3, 1);
  for (auto _ : state) {
    auto res = sdcn::kmeans(points, 4, sdcn::KmeansInit::kPlusPlus, 7);
    benchmark::DoNotOptimize(res.inertia);
  }
}
BENCHMARK(BM_KMeans)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_Silhouette(benchmark::State& state) {
  const auto points = latent_cloud(state.range(0), 3, 2);
  const auto clustering = sdcn::kmeans(points, 4, sdcn::KmeansInit::kPlusPlus, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdcn::silhouette_score(points, clustering.assignments));
  }
}
BENCHMARK(BM_Silhouette)->Arg(512)->Arg(1024)->Arg(2048);

void BM_EncoderForward(benchmark::State& state) {
  const auto model = sdcn::build_autoencoder<float>(sdcn::presets::xrf_architecture(), 3);
  sdcn::Rng rng(5);
  sdcn::MatF batch(state.range(0), 512);
  for (sdcn::Index i = 0; i < batch.size(); ++i)
    batch.data()[i] = static_cast<float>(rng.normal());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.encode(batch).sum());
  }
}
BENCHMARK(BM_EncoderForward)->Arg(64)->Arg(256)->Arg(1024);

void BM_MmdLoss(benchmark::State& state) {
  const auto q = latent_cloud(state.range(0), 3, 8);
  const auto p = sdcn::sample_prior<double>(state.range(0), 3, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdcn::mmd_vstat(q, p, 3.0));
  }
}
BENCHMARK(BM_MmdLoss)->Arg(128)->Arg(256)->Arg(512);

}  // namespace

BENCHMARK_MAIN();

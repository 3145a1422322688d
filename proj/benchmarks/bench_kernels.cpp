#include <benchmark/benchmark.h>

#include "ipixmatch/ipixloss.hpp"
#include "ipixmatch/model.hpp"
#include "ipixmatch/numerics.hpp"
#include "ipixmatch/rng.hpp"

namespace {

ipix::Tensor random_map(std::uint64_t seed, std::size_t c, std::size_t h,
                        std::size_t w, double scale) {
  ipix::Rng rng(seed);
  ipix::Tensor t = ipix::Tensor::zeros({c, h, w});
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

void BM_SpatialSoftmax(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  ipix::Rng rng(7);
  std::vector<double> z(n);
  for (double& v : z) v = rng.uniform(-4.0, 4.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ipix::numerics::spatial_softmax(z, 4.0));
  }
}
BENCHMARK(BM_SpatialSoftmax)->Arg(256)->Arg(1024);

void BM_InterpixelLoss(benchmark::State& state) {
  const auto metric = state.range(0) == 0 ? ipix::ipixloss::RelationMetric::KL
                                          : ipix::ipixloss::RelationMetric::CR;
  const ipix::Tensor p = random_map(1, 4, 32, 32, 4.0);
  const ipix::Tensor q = random_map(2, 4, 32, 32, 2.0);
  ipix::ipixloss::IPixConfig cfg;
  cfg.metric = metric;
  cfg.tau = 0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ipix::ipixloss::interpixel_loss(p, q, cfg));
  }
}
BENCHMARK(BM_InterpixelLoss)->Arg(0)->Arg(1);

void BM_ModelForwardBackward(benchmark::State& state) {
  const std::size_t hidden = static_cast<std::size_t>(state.range(0));
  const ipix::model::ModelParams params = ipix::model::init_params(3, hidden, 4);
  const ipix::Tensor image = random_map(4, 3, 32, 32, 0.5);
  ipix::Tensor cot = ipix::Tensor::zeros({4, 32, 32});
  ipix::Rng rng(9);
  for (double& v : cot.data) v = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    ipix::model::ForwardCache cache;
    benchmark::DoNotOptimize(ipix::model::forward(params, image, &cache));
    benchmark::DoNotOptimize(ipix::model::backward(params, cache, cot));
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();

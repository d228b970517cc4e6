#include <benchmark/benchmark.h>

#include <vector>

#include "cate/dgp.hpp"
#include "cate/models.hpp"
#include "cate/nn.hpp"

namespace {

using namespace cate;

void BM_SharedForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const MlpNetwork net = init_network(shared_architecture(kDgpCovariates), 1);
  const Matrix x = sample_dgp({rows, Regime::kSmallTreatment, 1.0, 3}).x;
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, x, true, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SharedForward)->Arg(64)->Arg(1000);

void BM_SharedForwardBackward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const MlpNetwork net = init_network(shared_architecture(kDgpCovariates), 1);
  const Matrix x = sample_dgp({rows, Regime::kSmallTreatment, 1.0, 3}).x;
  const Matrix target(rows, 2);
  for (auto _ : state) {
    const auto fwd = forward(net, x, true, 7);
    benchmark::DoNotOptimize(backward(net, fwd.cache, target, LossKind::kMse));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SharedForwardBackward)->Arg(64)->Arg(1000);

void BM_SharedEpoch(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const DgpSample s = sample_dgp({rows, Regime::kSmallTreatment, 1.0, 5});
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_shared(s.x, s.z, s.y, cfg));
}
BENCHMARK(BM_SharedEpoch)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BcfEpoch(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const DgpSample s = sample_dgp({rows, Regime::kSmallTreatment, 1.0, 5});
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_bcf(s.x, s.z, s.y, s.pi, cfg));
}
BENCHMARK(BM_BcfEpoch)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FitOls(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const DgpSample s = sample_dgp({rows, Regime::kSmallTreatment, 1.0, 5});
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(s.x, s.z, s.y));
}
BENCHMARK(BM_FitOls)->Arg(1000)->Arg(10000);

void BM_SampleDgp(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_dgp({rows, Regime::kSmallTreatment, 1.0, ++seed}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleDgp)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "greenevo/data.hpp"
#include "greenevo/network.hpp"

using namespace greenevo;

namespace {

std::vector<LayerSpec> stack(int width, int depth)
{
    std::vector<LayerSpec> layers;
    for (int i = 0; i < depth; ++i) {
        layers.push_back({LayerKind::dense, width, i % 2 == 0 ? Activation::relu : Activation::sigmoid, 0.0});
    }
    return layers;
}

void BM_Forward(benchmark::State& state)
{
    Rng rng(1);
    const auto net = build_network<float>(stack(static_cast<int>(state.range(0)), 3), 0, 784, 10, rng);
    Eigen::MatrixXf x = Eigen::MatrixXf::Random(784, 64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward<float>(net, x));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128)->Arg(256);

void BM_TrainEpoch(benchmark::State& state)
{
    const auto data = synthetic_dataset(10, 50, 784, 4.0, 3);
    Rng rng(2);
    auto net = build_network<float>(stack(128, 2), 0, 784, 10, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(train(net, data, 1, {0.01, 32}, rng));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

} // namespace

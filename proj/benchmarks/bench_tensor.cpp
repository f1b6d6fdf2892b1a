#include <benchmark/benchmark.h>

#include "traject/nn.hpp"
#include "traject/rng.hpp"
#include "traject/tensor.hpp"

namespace {

traject::Tensor2 random_tensor(int r, int c, uint64_t seed) {
    traject::Rng rng(seed);
    traject::Tensor2 t(r, c);
    for (auto& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_Matmul(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto a = random_tensor(n, n, 1);
    auto b = random_tensor(n, n, 2);
    for (auto _ : state) {
        auto c = traject::matmul(a, b);
        benchmark::DoNotOptimize(c.data.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_TapeForwardBackward(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    traject::nn::ParamStore ps(3);
    auto x = random_tensor(8, width, 4);
    for (auto _ : state) {
        traject::nn::Graph g;
        auto xv = g.input(x);
        auto y = traject::nn::mlp_forward(g, ps, "net", xv, {width, width, 4});
        auto loss = g.mse_loss(y, traject::Tensor2(8, 4));
        g.backward(loss);
        ps.zero_grads();
        benchmark::DoNotOptimize(g.val(loss).at(0, 0));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TapeForwardBackward)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();

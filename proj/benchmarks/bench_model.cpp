#include <benchmark/benchmark.h>

#include <vector>

#include "traject/harness.hpp"
#include "traject/labeler.hpp"
#include "traject/model.hpp"
#include "traject/scenegen.hpp"

namespace {

using namespace traject;

Scene bench_scene(ScenarioKind kind, int n_agents, uint64_t seed) {
    ScenarioConfig cfg;
    cfg.kind = kind;
    cfg.num_agents = n_agents;
    cfg.seed = seed;
    Scene scene = label_scene(gen_scene(cfg));
    compute_features(scene);
    return scene;
}

ModelConfig bench_config(int width) {
    ModelConfig mc;
    mc.hidden = width;
    mc.gn_width = width;
    return mc;
}

void BM_SceneGen(benchmark::State& state) {
    uint64_t seed = 1;
    for (auto _ : state) {
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::Crossing;
        cfg.seed = seed++;
        Scene s = gen_scene(cfg);
        benchmark::DoNotOptimize(s.agents.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SceneGen);

void BM_LabelScene(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    ScenarioConfig cfg;
    cfg.kind = n > 2 ? ScenarioKind::MultiIntersection : ScenarioKind::Crossing;
    cfg.num_agents = n;
    cfg.seed = 7;
    const Scene scene = gen_scene(cfg);
    for (auto _ : state) {
        Scene labeled = label_scene(scene);
        benchmark::DoNotOptimize(labeled.labels.size());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LabelScene)->Arg(2)->Arg(5);

void BM_Predict(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    const Scene scene = bench_scene(ScenarioKind::MultiIntersection, 4, 11);
    Model model(Variant::JointSupervised, bench_config(width));
    nn::ParamStore ps(5);
    model.predict(ps, scene);
    for (auto _ : state) {
        auto pred = model.predict(ps, scene);
        benchmark::DoNotOptimize(pred.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Predict)->Arg(24)->Arg(64);

void BM_LossBackward(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    const Scene scene = bench_scene(ScenarioKind::MultiIntersection, 4, 11);
    Model model(Variant::JointSupervised, bench_config(width));
    nn::ParamStore ps(5);
    for (auto _ : state) {
        nn::Graph g;
        const Forward f = model.forward(g, ps, scene);
        g.backward(model.loss(g, f, scene));
        ps.zero_grads();
        benchmark::DoNotOptimize(ps.size());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LossBackward)->Arg(24)->Arg(64);

void BM_TrainEpoch(benchmark::State& state) {
    std::vector<Scene> train_scenes;
    for (uint64_t s = 0; s < 16; ++s) {
        train_scenes.push_back(
            bench_scene(s % 2 ? ScenarioKind::Crossing : ScenarioKind::Following, 2, 100 + s));
    }
    const std::vector<Scene> val_scenes(train_scenes.begin(), train_scenes.begin() + 2);
    for (auto _ : state) {
        TrainConfig cfg;
        cfg.variant = Variant::JointSupervised;
        cfg.model = bench_config(16);
        cfg.epochs = 1;
        cfg.seed = 3;
        Model model(cfg.variant, cfg.model);
        nn::ParamStore ps(cfg.seed);
        const TrainRun run = fit(cfg, model, ps, train_scenes, val_scenes);
        benchmark::DoNotOptimize(run.final_val.dpe);
    }
    state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
    std::vector<Scene> scenes;
    for (uint64_t s = 0; s < 8; ++s) {
        scenes.push_back(bench_scene(ScenarioKind::Crossing, 2, 300 + s));
    }
    Model model(Variant::JointSupervised, bench_config(24));
    nn::ParamStore ps(9);
    for (auto _ : state) {
        const MetricsReport r = evaluate(model, ps, scenes);
        benchmark::DoNotOptimize(r.dpe);
    }
    state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace

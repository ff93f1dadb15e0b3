#include <memory>
#include <optional>

#include <benchmark/benchmark.h>

#include "lipinval/invalidation.hpp"
#include "lipinval/lipschitz.hpp"
#include "lipinval/swarmsim.hpp"
#include "lipinval/sweep.hpp"

namespace {

using namespace lipinval;

struct SwarmData {
    RegressorDataset train;
    LipschitzVector lip;
    Trajectory same;
    Trajectory repelling;
};

const SwarmData& swarm_data() {
    static const SwarmData data = [] {
        SwarmConfig cfg = benchmark_swarm_config();
        cfg.seed = 1;
        SwarmData d;
        d.train = build_regressor_dataset(make_swarm_dataset(cfg, SweepSpec{}.train_trajectories()));
        d.lip = make_lipschitz_vector(estimate_lipschitz(d.train), 1.5);
        SwarmConfig test = cfg;
        test.seed = 1001;
        d.same = make_swarm_dataset(test, 1).trajectories.front();
        test.kp = -0.5;
        d.repelling = make_swarm_dataset(test, 1).trajectories.front();
        return d;
    }();
    return data;
}

std::optional<Downsampler> downsampler(std::int64_t code) {
    switch (code) {
        case 1:
            return GridParams{4, 2, 0};
        case 2:
            return KMeansParams{8, 1, 100, 0};
        case 3:
            return KnnParams{16};
        default:
            return std::nullopt;
    }
}

// Args: dataset size, downsampler (0 none, 1 grid, 2 kmeans, 3 knn), test model (0 same, 1 repelling).
void BM_Invalidate(benchmark::State& state) {
    const SwarmData& d = swarm_data();
    InvalidationProblem prob;
    prob.abstraction =
        std::make_shared<const Abstraction>(d.train.prefix(static_cast<std::size_t>(state.range(0))), d.lip);
    if (const auto ds = downsampler(state.range(1))) {
        prob.selector = std::make_shared<const SelectorState>(prepare(*ds, prob.abstraction->data()));
    }
    prob.observed.samples = (state.range(2) == 0 ? d.same : d.repelling).samples;
    for (auto _ : state) {
        benchmark::DoNotOptimize(invalidate(prob));
    }
}
BENCHMARK(BM_Invalidate)
    ->ArgsProduct({{16, 48, 112, 208}, {0, 1, 2, 3}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_Prescreen(benchmark::State& state) {
    const SwarmData& d = swarm_data();
    InvalidationProblem prob;
    prob.abstraction = std::make_shared<const Abstraction>(d.train, d.lip);
    prob.observed.samples = d.repelling.samples;
    for (auto _ : state) {
        benchmark::DoNotOptimize(prescreen(prob));
    }
}
BENCHMARK(BM_Prescreen)->Unit(benchmark::kMicrosecond);

}  // namespace

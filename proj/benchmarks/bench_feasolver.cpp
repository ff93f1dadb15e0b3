#include <random>

#include <benchmark/benchmark.h>

#include "lipinval/feasolver.hpp"

namespace {

using namespace lipinval;

// Random dense rows around a known interior point, so the program is feasible.
LinearProgram random_lp(std::size_t vars, std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LinearProgram lp;
    Vec x0(vars);
    for (std::size_t v = 0; v < vars; ++v) {
        lp.add_variable(-10.0, 10.0);
        x0[v] = 5.0 * u(rng);
    }
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<LinearTerm> terms;
        double at = 0.0;
        for (std::size_t v = 0; v < vars; ++v) {
            const double c = u(rng);
            terms.push_back({v, c});
            at += c * x0[v];
        }
        lp.add_constraint(std::move(terms), Relation::LessEq, at + 0.5 * (u(rng) + 1.0));
    }
    return lp;
}

void BM_LpFeasible(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const LinearProgram lp = random_lp(n, 2 * n, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lp_feasible(lp));
    }
}
BENCHMARK(BM_LpFeasible)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

// Knapsack-like rows over binaries with a continuous slack, mostly feasible.
void BM_MilfFeasible(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MilfProblem p;
    for (std::size_t i = 0; i < n; ++i) {
        p.add_binary();
    }
    const std::size_t slack = p.lp.add_variable(0.0, 1.0);
    for (std::size_t r = 0; r < n / 2; ++r) {
        std::vector<LinearTerm> terms{{slack, 1.0}};
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = u(rng);
            terms.push_back({p.binary_vars[i], c});
            total += c;
        }
        p.lp.add_constraint(terms, Relation::GreaterEq, 0.45 * total);
        p.lp.add_constraint(std::move(terms), Relation::LessEq, 0.55 * total);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(milf_feasible(p));
    }
}
BENCHMARK(BM_MilfFeasible)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMicrosecond);

}  // namespace

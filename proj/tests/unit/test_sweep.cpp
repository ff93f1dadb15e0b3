#include <fstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/sweep.hpp"

namespace lipinval {
namespace {

SweepSpec small_spec() {
    SweepSpec spec;
    spec.sizes = {16, 48};
    spec.num_test = 4;
    spec.downsamplers = {std::nullopt, KnnParams{8}};
    return spec;
}

TEST(Sweep, RowsAndAggregates) {
    const auto spec = small_spec();
    EXPECT_EQ(spec.train_trajectories(), 4u);
    const auto result = run_sweep(spec);
    EXPECT_EQ(result.rows.size(), 2u * 2u * 4u);
    ASSERT_EQ(result.aggregates.size(), 4u);
    EXPECT_EQ(result.aggregates[0].dataset_size, 16u);
    EXPECT_EQ(result.aggregates[0].downsampler, "none");
    EXPECT_EQ(result.aggregates[1].downsampler, "knn");
    EXPECT_EQ(result.aggregates[1].param, 8u);
    for (const auto& row : result.rows) {
        EXPECT_TRUE(row.verdict == "invalidated" || row.verdict == "not_invalidated");
    }
    // Downsampled verdicts never invalidate more than the full data at the same size.
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t s = 0; s < 2; ++s) {
            const auto& full = result.rows[(2 * s) * 4 + t];
            const auto& knn = result.rows[(2 * s + 1) * 4 + t];
            if (knn.verdict == "invalidated") {
                EXPECT_EQ(full.verdict, "invalidated");
            }
        }
    }
}

TEST(Sweep, Deterministic) {
    auto spec = small_spec();
    spec.downsamplers = {std::nullopt};
    const auto a = run_sweep(spec);
    spec.threads = 3;
    const auto b = run_sweep(spec);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].verdict, b.rows[i].verdict);
        EXPECT_EQ(a.rows[i].traj_id, b.rows[i].traj_id);
        EXPECT_EQ(a.rows[i].constraints, b.rows[i].constraints);
    }
    EXPECT_EQ(a.lip, b.lip);
}

TEST(Sweep, SameModelNeverInvalidated) {
    auto spec = small_spec();
    spec.test_kp = 0.5;
    spec.downsamplers = {std::nullopt};
    for (const auto& agg : run_sweep(spec).aggregates) {
        EXPECT_EQ(agg.invalidated, 0u);
    }
}

TEST(Sweep, CsvLayout) {
    const auto dir = test::temp_dir("sweep");
    const auto result = run_sweep(small_spec());
    write_sweep_csv(result, dir / "rows.csv", dir / "agg.csv");
    std::ifstream rows(dir / "rows.csv");
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line.rfind("# config {", 0), 0u);
    std::getline(rows, line);
    EXPECT_EQ(line, "dataset_size,downsampler,param,traj_id,verdict,wall_ms,constraints,binaries");
    std::size_t count = 0;
    while (std::getline(rows, line)) {
        ++count;
    }
    EXPECT_EQ(count, result.rows.size());

    std::ifstream agg(dir / "agg.csv");
    std::getline(agg, line);
    EXPECT_EQ(line.rfind("# config {", 0), 0u);
    std::getline(agg, line);
    EXPECT_EQ(line, "dataset_size,downsampler,param,invalidated_of_4,mean_wall_ms");
    count = 0;
    while (std::getline(agg, line)) {
        ++count;
    }
    EXPECT_EQ(count, 4u);
}

TEST(Sweep, OversizedRejected) {
    auto spec = small_spec();
    const auto train = make_swarm_dataset(spec.train, 1);
    SwarmConfig t = spec.train;
    t.kp = -0.5;
    const auto test = make_swarm_dataset(t, 2);
    EXPECT_THROW(run_sweep(spec, train, test), InvalidInput);
}

}  // namespace
}  // namespace lipinval

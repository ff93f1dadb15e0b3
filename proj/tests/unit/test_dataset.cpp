#include <fstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/swarmsim.hpp"

namespace lipinval {
namespace {

TrajectoryDataset scalar_dataset(std::vector<Trajectory> trajectories, std::size_t n_y = 1) {
    TrajectoryDataset d;
    d.m = 1;
    d.n_y = n_y;
    d.noise = {{0.0}, {0.0}};
    d.domain = {{-10.0}, {10.0}};
    d.trajectories = std::move(trajectories);
    return d;
}

TEST(Dataset, ScalarWindowing) {
    const auto r = build_regressor_dataset(scalar_dataset({Trajectory{{{1.0}, {2.0}, {3.0}}}}));
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r.pairs[0].s_tilde, Vec{1.0});
    EXPECT_EQ(r.pairs[0].y_next, Vec{2.0});
    EXPECT_EQ(r.pairs[1].s_tilde, Vec{2.0});
    EXPECT_EQ(r.pairs[1].y_next, Vec{3.0});
}

TEST(Dataset, NewestFirstStacking) {
    TrajectoryDataset d;
    d.m = 2;
    d.n_y = 2;
    d.noise = {{0.0, 0.0}, {0.0, 0.0}};
    d.domain = {{-10.0, -10.0}, {10.0, 10.0}};
    d.trajectories = {Trajectory{{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}}}};
    const auto r = build_regressor_dataset(d);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r.pairs[0].s_tilde, (Vec{3.0, 4.0, 1.0, 2.0}));
    EXPECT_EQ(r.pairs[0].y_next, (Vec{5.0, 6.0}));
    EXPECT_EQ(r.pairs[0].time, 1u);
}

TEST(Dataset, PairCountAndSourcesMatchWindows) {
    const auto d = make_swarm_dataset(SwarmConfig{}, 3);
    const auto r = build_regressor_dataset(d);
    EXPECT_EQ(r.size(), 45u);
    for (const auto& pair : r.pairs) {
        const auto& samples = d.trajectories[pair.trajectory].samples;
        EXPECT_EQ(pair.s_tilde, stack_regressor(samples, pair.time, d.n_y));
        EXPECT_EQ(pair.y_next, samples[pair.time + 1]);
    }
}

TEST(Dataset, ShortTrajectoriesContributeNothing) {
    const auto r = build_regressor_dataset(scalar_dataset({Trajectory{{{1.0}, {2.0}}}, Trajectory{{{1.0}}}}, 2));
    EXPECT_TRUE(r.empty());
}

TEST(Dataset, DimensionMismatchRejected) {
    auto d = scalar_dataset({Trajectory{{{1.0}, {2.0, 3.0}}}});
    EXPECT_THROW(build_regressor_dataset(d), InvalidInput);
}

TEST(Dataset, EpsilonS) {
    EXPECT_DOUBLE_EQ(epsilon_s({{0.0}, {0.1}}, 1, Norm::Inf), 0.1);
    EXPECT_DOUBLE_EQ(epsilon_s({{0.0, 0.0}, {0.1, 0.1}}, 2, Norm::One), 0.4);
    EXPECT_NEAR(epsilon_s({{0.0, 0.0}, {0.3, 0.4}}, 1, Norm::Two), std::sqrt(0.09 + 0.16), 1e-15);
}

TEST(Dataset, EpsilonSMonotone) {
    for (Norm p : {Norm::One, Norm::Two, Norm::Inf}) {
        double prev = 0.0;
        for (std::size_t n_y = 1; n_y <= 4; ++n_y) {
            const double e = epsilon_s({{0.0, 0.0}, {0.2, 0.05}}, n_y, p);
            EXPECT_GE(e, prev);
            EXPECT_GE(epsilon_s({{0.0, 0.0}, {0.3, 0.05}}, n_y, p), e);
            prev = e;
        }
    }
}

TEST(Dataset, RoundTrip) {
    const auto dir = test::temp_dir("roundtrip");
    auto d = make_swarm_dataset(SwarmConfig{}, 2);
    d.n_y = 2;
    d.p = Norm::One;
    save_dataset(d, dir);
    EXPECT_EQ(load_dataset(dir), d);
}

TEST(Dataset, EmptyDatasetRoundTrip) {
    const auto dir = test::temp_dir("empty");
    const auto d = scalar_dataset({});
    save_dataset(d, dir);
    const auto back = load_dataset(dir);
    EXPECT_EQ(back, d);
    EXPECT_TRUE(build_regressor_dataset(back).empty());
}

TEST(Dataset, ShortRowReportsLine) {
    const auto dir = test::temp_dir("shortrow");
    TrajectoryDataset d;
    d.m = 3;
    d.noise = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    d.domain = {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
    d.trajectories = {Trajectory{{{0.0, 0.0, 0.0}, {0.1, 0.1, 0.1}}}};
    save_dataset(d, dir);
    std::filesystem::path csv;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv") {
            csv = entry.path();
        }
    }
    ASSERT_FALSE(csv.empty());
    {
        std::ofstream out(csv);
        out << "k,y_1,y_2,y_3\n0,0,0,0\n1,0.5,0.5\n";
    }
    try {
        load_dataset(dir);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Dataset, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}

}  // namespace
}  // namespace lipinval

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/swarmsim.hpp"

namespace lipinval {
namespace {

using std::numbers::pi;

double centroid_distance(const std::vector<AgentState>& swarm, std::size_t a) {
    double cx = 0.0;
    double cy = 0.0;
    for (const auto& s : swarm) {
        cx += s.px / static_cast<double>(swarm.size());
        cy += s.py / static_cast<double>(swarm.size());
    }
    return std::hypot(swarm[a].px - cx, swarm[a].py - cy);
}

TEST(Swarm, StraightLineStep) {
    SwarmConfig cfg;
    cfg.num_agents = 1;
    cfg.initial_states = {{0.0, 0.0, 0.0}};
    cfg.centroid_mode = CentroidMode::Fixed;
    cfg.centroid_x = 100.0;
    const auto next = step(cfg, cfg.initial_states, nullptr);
    EXPECT_EQ(next[0].px, 0.1);
    EXPECT_EQ(next[0].py, 0.0);
}

TEST(Swarm, DesiredHeading) {
    SwarmConfig cfg;
    cfg.num_agents = 1;
    cfg.kp = 1.0;
    cfg.steer_limit = 1.0;
    cfg.centroid_mode = CentroidMode::Fixed;
    cfg.centroid_x = 6.0;
    cfg.centroid_y = 2.0 * std::sqrt(3.0);
    const std::vector<AgentState> swarm{{0.0, 0.0, 0.0}};
    cfg.initial_states = swarm;
    EXPECT_NEAR(steering(cfg, swarm, 0), pi / 6.0, 1e-15);
}

TEST(Swarm, SaturatedSteering) {
    SwarmConfig cfg;
    cfg.num_agents = 1;
    cfg.kp = 0.5;
    cfg.centroid_mode = CentroidMode::Fixed;
    cfg.centroid_x = 1.0;
    const std::vector<AgentState> swarm{{0.0, 0.0, -pi}};
    cfg.initial_states = swarm;
    EXPECT_EQ(steering(cfg, swarm, 0), pi / 8.0);
}

TEST(Swarm, NominalInitialStates) {
    const SwarmConfig cfg;
    ASSERT_EQ(cfg.initial_states.size(), 3u);
    EXPECT_EQ(cfg.initial_states[1].px, 12.0);
    EXPECT_EQ(cfg.initial_states[1].theta, 2.0 * pi / 3.0);
    EXPECT_EQ(cfg.initial_states[2].py, 6.0 * std::sqrt(3.0));
    EXPECT_EQ(cfg.initial_states[2].theta, -2.0 * pi / 3.0);
    EXPECT_EQ(cfg.horizon, 16u);
    EXPECT_EQ(initial_states_for(cfg)[0].theta, 0.0);
}

TEST(Swarm, AttractingSwarmContracts) {
    SwarmConfig cfg;
    cfg.kp = 0.5;
    const auto states = simulate_states(cfg, false);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t k = 0; k < 10; ++k) {
            EXPECT_LE(centroid_distance(states[k + 1], a), centroid_distance(states[k], a) + 1e-12);
        }
    }
}

double heading_error(const SwarmConfig& cfg, const std::vector<AgentState>& swarm, std::size_t a) {
    return std::abs(steering(cfg, swarm, a) / cfg.kp);
}

TEST(Swarm, RepellingSwarmTurnsAway) {
    // The nominal headings point at the centroid, so the swarm still closes in over the horizon,
    // but every agent turns away from it and the approach decelerates.
    SwarmConfig cfg;
    cfg.kp = -0.5;
    SwarmConfig attract = cfg;
    attract.kp = 0.5;
    const auto states = simulate_states(cfg, false);
    const auto reference = simulate_states(attract, false);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t k = 0; k < 10; ++k) {
            EXPECT_GE(heading_error(cfg, states[k + 1], a), heading_error(cfg, states[k], a));
            EXPECT_GE(centroid_distance(states[k + 1], a), centroid_distance(reference[k + 1], a));
            if (k > 0) {
                const double prev = centroid_distance(states[k - 1], a) - centroid_distance(states[k], a);
                const double cur = centroid_distance(states[k], a) - centroid_distance(states[k + 1], a);
                EXPECT_LE(cur, prev);
            }
        }
    }
}

TEST(Swarm, SteeringStaysSaturatedAndNoiseBounded) {
    for (double kp : {0.5, -0.5}) {
        SwarmConfig cfg;
        cfg.kp = kp;
        cfg.seed = 17;
        const auto noisy = simulate_states(cfg, true);
        const auto outputs = simulate(cfg);
        ASSERT_EQ(outputs.samples.size(), cfg.horizon);
        for (std::size_t k = 0; k < cfg.horizon; ++k) {
            for (std::size_t a = 0; a < 3; ++a) {
                EXPECT_LE(std::abs(steering(cfg, noisy[k], a)), pi / 8.0);
                const AgentState& s = noisy[k][a];
                const Vec& y = outputs.samples[k];
                EXPECT_LE(std::abs(y[3 * a] - s.px), cfg.meas_noise[0]);
                EXPECT_LE(std::abs(y[3 * a + 1] - s.py), cfg.meas_noise[1]);
                EXPECT_LE(std::abs(y[3 * a + 2] - s.theta), cfg.meas_noise[2]);
            }
            if (k + 1 < cfg.horizon) {
                const auto clean = step(cfg, noisy[k], nullptr);
                for (std::size_t a = 0; a < 3; ++a) {
                    EXPECT_LE(std::abs(noisy[k + 1][a].px - clean[a].px), cfg.process_noise[0] + 1e-15);
                    EXPECT_LE(std::abs(noisy[k + 1][a].py - clean[a].py), cfg.process_noise[1] + 1e-15);
                    EXPECT_LE(std::abs(noisy[k + 1][a].theta - clean[a].theta), cfg.process_noise[2] + 1e-15);
                }
            }
        }
    }
}

TEST(Swarm, Reproducible) {
    SwarmConfig cfg;
    cfg.seed = 5;
    EXPECT_EQ(simulate(cfg), simulate(cfg));
    EXPECT_EQ(simulate_states(cfg, false)[15][2].theta, simulate_states(cfg, false)[15][2].theta);
    SwarmConfig other = cfg;
    other.seed = 6;
    EXPECT_NE(simulate(cfg), simulate(other));
}

TEST(Swarm, RandomizedInitHeadings) {
    SwarmConfig cfg = benchmark_swarm_config();
    std::set<double> headings;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const auto init = initial_states_for(cfg);
        EXPECT_EQ(init[1].px, 12.0);
        EXPECT_LE(std::abs(init[1].theta - 2.0 * pi / 3.0), 0.4);
        headings.insert(init[1].theta);
    }
    EXPECT_EQ(headings.size(), 10u);
}

TEST(Swarm, DatasetShapeAndSeeds) {
    SwarmConfig cfg;
    const auto d = make_swarm_dataset(cfg, 20);
    EXPECT_EQ(d.m, 9u);
    EXPECT_EQ(d.n_y, 1u);
    EXPECT_EQ(d.p, Norm::Inf);
    ASSERT_EQ(d.trajectories.size(), 20u);
    std::set<std::uint64_t> seeds;
    for (std::size_t t = 0; t < 20; ++t) {
        EXPECT_EQ(d.trajectories[t].samples.size(), 16u);
        seeds.insert(trajectory_seed(cfg.seed, t));
        for (const auto& y : d.trajectories[t].samples) {
            EXPECT_TRUE(d.domain.contains(y));
        }
    }
    EXPECT_EQ(seeds.size(), 20u);
    EXPECT_NE(d.trajectories[0], d.trajectories[1]);
}

TEST(Swarm, GenerateBenchmarkRoundTrip) {
    const auto dir = test::temp_dir("bench");
    SwarmConfig cfg;
    const auto d = generate_benchmark(-0.5, 3, cfg, dir);
    const auto back = load_dataset(dir);
    EXPECT_EQ(back, d);
    EXPECT_EQ(back.metadata.at("kp"), "-0.5");

    const auto empty_dir = test::temp_dir("bench_empty");
    const auto empty = generate_benchmark(0.5, 0, cfg, empty_dir);
    EXPECT_TRUE(load_dataset(empty_dir).trajectories.empty());
    EXPECT_TRUE(empty.trajectories.empty());
}

TEST(Swarm, InvalidConfig) {
    SwarmConfig cfg;
    cfg.dt = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidInput);
    cfg = SwarmConfig{};
    cfg.initial_states.pop_back();
    EXPECT_THROW(simulate(cfg), InvalidInput);
}

}  // namespace
}  // namespace lipinval

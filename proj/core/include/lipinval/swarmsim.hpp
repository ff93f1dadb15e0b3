#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "lipinval/dataset.hpp"

namespace lipinval {

struct AgentState {
    double px = 0.0;
    double py = 0.0;
    double theta = 0.0;
};

enum class CentroidMode { Dynamic, Fixed };

/// Dubins-car swarm steered towards (or away from) its centroid by a proportional heading law.
struct SwarmConfig {
    std::size_t num_agents = 3;
    double wheelbase = 1.5;
    double speed = 1.0;
    double dt = 0.1;
    double kp = 0.5;
    double steer_limit = std::numbers::pi / 8.0;
    /// Uniform process-noise bounds on (p_x, p_y, theta), applied to every agent.
    Vec process_noise{0.00025, 0.00025, 0.0001};
    /// Uniform measurement-noise bounds on (p_x, p_y, theta), applied to every agent.
    Vec meas_noise{0.001, 0.001, 0.0005};
    std::vector<AgentState> initial_states{
        {0.0, 0.0, 0.0},
        {12.0, 0.0, 2.0 * std::numbers::pi / 3.0},
        {6.0, 6.0 * std::numbers::sqrt3, -2.0 * std::numbers::pi / 3.0},
    };
    std::size_t horizon = 16;
    CentroidMode centroid_mode = CentroidMode::Dynamic;
    double centroid_x = 0.0;  // Fixed mode only
    double centroid_y = 0.0;
    std::uint64_t seed = 1;
    /// Perturb each initial state uniformly by +-init_position_spread (m) and +-init_heading_spread (rad).
    bool randomize_init = false;
    double init_position_spread = 0.0;
    double init_heading_spread = 0.0;

    std::size_t output_dim() const { return 3 * num_agents; }
    /// Throws InvalidInput on non-positive dt/steer limit, wrong vector sizes, or negative bounds.
    void validate() const;
};

/// Default config with initial headings drawn per trajectory (+-0.4 rad), used by the benchmark sweep.
SwarmConfig benchmark_swarm_config();

/// Steering command for one agent given the current swarm state.
double steering(const SwarmConfig& cfg, std::span<const AgentState> swarm, std::size_t agent);

/// One Euler step of every agent. `rng` supplies process noise; pass nullptr for the noiseless map.
std::vector<AgentState> step(const SwarmConfig& cfg, std::span<const AgentState> swarm, std::mt19937_64* rng);

/// Noise-free state sequence of length horizon (no measurement noise, process noise per `noisy`).
std::vector<std::vector<AgentState>> simulate_states(const SwarmConfig& cfg, bool noisy);

/// Emitted outputs [p_x^1, p_y^1, theta^1, p_x^2, ...] with measurement noise, reproducible from cfg.seed.
Trajectory simulate(const SwarmConfig& cfg);

/// Initial states actually used for cfg.seed (perturbed when randomize_init is set).
std::vector<AgentState> initial_states_for(const SwarmConfig& cfg);

/// Output box covering every reachable output over the horizon, plus a margin.
OutputDomain swarm_domain(const SwarmConfig& cfg);

/// Seed of trajectory `index` derived from a master seed by splitmix64.
std::uint64_t trajectory_seed(std::uint64_t master, std::size_t index);

/// num_traj trajectories with seeds trajectory_seed(cfg.seed, t); m = 3 * num_agents, n_y = 1, p = inf.
TrajectoryDataset make_swarm_dataset(const SwarmConfig& cfg, std::size_t num_traj);

/// make_swarm_dataset with cfg.kp = kp, saved to out_dir.
TrajectoryDataset generate_benchmark(double kp, std::size_t num_traj, SwarmConfig cfg, const std::filesystem::path& out_dir);

}  // namespace lipinval

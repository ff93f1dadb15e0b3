#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lipinval/dataset.hpp"
#include "lipinval/downsampling.hpp"
#include "lipinval/feasolver.hpp"
#include "lipinval/swarmsim.hpp"

namespace lipinval {

struct SweepSpec {
    /// Training generator; test trajectories use the same config with `test_kp`.
    SwarmConfig train = benchmark_swarm_config();
    double test_kp = -0.5;
    std::uint64_t test_seed = 1001;
    std::size_t num_test = 20;
    /// Number of leading regressor pairs of the training set used at each step.
    std::vector<std::size_t> sizes{16, 48, 112, 208};
    /// std::nullopt stands for no downsampling.
    std::vector<std::optional<Downsampler>> downsamplers{std::nullopt};
    /// Overrides the estimated Lipschitz vector when set.
    std::optional<Vec> lip;
    double lip_scale = 1.5;
    std::size_t timing_repeats = 1;
    bool audit_prescreen = false;
    std::size_t threads = 1;
    SolverOptions solver;

    /// Training trajectories needed to provide max(sizes) pairs.
    std::size_t train_trajectories() const;
};

struct SweepRow {
    std::size_t dataset_size = 0;
    std::string downsampler;  // "none", "grid", "kmeans", "knn"
    std::size_t param = 0;
    std::size_t traj_id = 0;
    std::string verdict;      // "invalidated", "not_invalidated", "inconclusive"
    bool by_prescreen = false;
    std::optional<SolveStatus> audit;
    double wall_ms = 0.0;
    std::size_t constraints = 0;
    std::size_t binaries = 0;
};

struct SweepAggregate {
    std::size_t dataset_size = 0;
    std::string downsampler;
    std::size_t param = 0;
    std::size_t invalidated = 0;
    std::size_t total = 0;
    double mean_wall_ms = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;             // sorted by (size, downsampler order, traj)
    std::vector<SweepAggregate> aggregates; // one per (size, downsampler)
    Vec lip;
    std::string config;                     // one-line JSON description of the run
};

/// Runs every (size, downsampler, trajectory) cell against explicit data.
SweepResult run_sweep(const SweepSpec& spec, const TrajectoryDataset& train, const TrajectoryDataset& test);

/// Generates training and test data from `spec.train`, then runs the sweep.
SweepResult run_sweep(const SweepSpec& spec);

/// Writes the per-trajectory CSV and the aggregate CSV, each starting with a `# config` comment.
void write_sweep_csv(const SweepResult& result, const std::filesystem::path& results_csv,
                     const std::filesystem::path& aggregate_csv);

}  // namespace lipinval

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipinval/norm.hpp"

namespace lipinval {

/// Per-component bounds on process noise (w) and measurement noise (v).
struct NoiseBounds {
    Vec eps_w;
    Vec eps_v;

    void validate(std::size_t m) const;
    bool operator==(const NoiseBounds&) const = default;
};

/// Axis-aligned box of admissible noise-free outputs.
struct OutputDomain {
    Vec lower;
    Vec upper;

    void validate(std::size_t m) const;
    bool contains(std::span<const double> y) const;
    bool operator==(const OutputDomain&) const = default;
};

/// One recorded output sequence, samples[k] is the noisy output at time k.
struct Trajectory {
    std::vector<Vec> samples;

    std::size_t length() const { return samples.size(); }
    bool operator==(const Trajectory&) const = default;
};

struct TrajectoryDataset {
    std::vector<Trajectory> trajectories;
    std::size_t m = 1;    // output dimension
    std::size_t n_y = 1;  // regression depth
    NoiseBounds noise;
    OutputDomain domain;
    Norm p = Norm::Inf;
    std::optional<std::uint64_t> seed;
    /// Free-form provenance recorded by generators (controller gain, config, ...).
    std::map<std::string, std::string> metadata;

    std::size_t regressor_dim() const { return m * n_y; }
    void validate() const;
    bool operator==(const TrajectoryDataset&) const = default;
};

/// One (s~_j, y~_{j+1}) pair plus where it came from.
struct RegressorPair {
    Vec s_tilde;
    Vec y_next;
    std::size_t trajectory = 0;
    std::size_t time = 0;  // index j of the newest sample in s_tilde
};

struct RegressorDataset {
    std::vector<RegressorPair> pairs;
    std::size_t m = 1;
    std::size_t n_y = 1;
    Norm p = Norm::Inf;
    NoiseBounds noise;
    OutputDomain domain;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
    std::size_t n() const { return m * n_y; }

    /// Same metadata, only the listed pairs (in the given order).
    RegressorDataset subset(std::span<const std::size_t> indices) const;
    /// The first `count` pairs in trajectory-major order.
    RegressorDataset prefix(std::size_t count) const;
};

/// Stack [y_k, y_{k-1}, ..., y_{k-n_y+1}] from `samples`, newest first.
Vec stack_regressor(std::span<const Vec> samples, std::size_t k, std::size_t n_y);

/// Every full window of n_y consecutive samples that has a successor, trajectory-major.
RegressorDataset build_regressor_dataset(const TrajectoryDataset& d);

/// Bound on ||s - s~||_p induced by the measurement noise bounds.
double epsilon_s(const NoiseBounds& noise, std::size_t n_y, Norm p);

/// Dataset directory layout: manifest.json plus one CSV per trajectory.
void save_dataset(const TrajectoryDataset& d, const std::filesystem::path& dir);
TrajectoryDataset load_dataset(const std::filesystem::path& dir);

/// CSV with header `k,y_1,...,y_m`. Rows must have increasing k.
void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& file);
Trajectory read_trajectory_csv(const std::filesystem::path& file, std::optional<std::size_t> expected_m = std::nullopt);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace lipinval

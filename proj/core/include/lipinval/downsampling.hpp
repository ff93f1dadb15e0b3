#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lipinval/dataset.hpp"

namespace lipinval {

/// Uniform grid over the regressor box, cells_per_dim cells along every coordinate.
struct GridParams {
    std::size_t cells_per_dim = 4;
    std::size_t boundary_extras = 2;
    std::uint64_t seed = 0;
};

/// Lloyd's algorithm with k-means++ seeding.
struct KMeansParams {
    std::size_t k = 8;
    std::size_t extras_per_other_cluster = 1;
    std::size_t max_iters = 100;
    std::uint64_t seed = 0;
};

struct KnnParams {
    std::size_t k = 16;
};

using Downsampler = std::variant<GridParams, KMeansParams, KnnParams>;

/// "grid", "kmeans" or "knn".
std::string downsampler_name(const Downsampler& ds);
/// The size parameter: cells per dim, cluster count, or neighbour count.
std::size_t downsampler_param(const Downsampler& ds);

/// Precomputed per-dataset state; immutable after prepare().
class SelectorState {
public:
    const Downsampler& config() const { return config_; }
    const RegressorDataset& data() const { return *data_; }

    /// Grid: cell coordinates of each pair. Empty for other variants.
    const std::vector<std::vector<std::size_t>>& pair_cells() const { return pair_cells_; }
    /// KMeans: final centroids and member lists (members sorted ascending).
    const std::vector<Vec>& centroids() const { return centroids_; }
    const std::vector<std::vector<std::size_t>>& clusters() const { return clusters_; }
    std::size_t kmeans_iterations() const { return iterations_; }

    std::vector<std::size_t> cell_of(std::span<const double> s) const;

private:
    friend SelectorState prepare(const Downsampler& ds, const RegressorDataset& data);
    friend std::vector<std::size_t> select(const SelectorState& state, std::span<const double> query);

    Downsampler config_;
    const RegressorDataset* data_ = nullptr;
    Vec lo_;
    Vec width_;
    std::vector<std::vector<std::size_t>> pair_cells_;
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> cells_;
    std::vector<Vec> centroids_;
    std::vector<std::vector<std::size_t>> clusters_;
    std::size_t iterations_ = 0;
};

/// Builds the selector. The dataset must outlive the returned state.
/// Throws InvalidInput on empty data, zero parameters, or k-means k above the pair count.
SelectorState prepare(const Downsampler& ds, const RegressorDataset& data);

/// Pair indices to keep for a query regressor; never empty.
/// Grid and k-means results are sorted ascending, kNN results are ordered by (distance, index).
/// Random extras are drawn from a generator seeded by the configured seed and the query bits.
std::vector<std::size_t> select(const SelectorState& state, std::span<const double> query);

}  // namespace lipinval

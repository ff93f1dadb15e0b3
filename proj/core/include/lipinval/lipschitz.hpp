#pragma once

#include <cstddef>
#include <cstdint>

#include "lipinval/abstraction.hpp"
#include "lipinval/dataset.hpp"

namespace lipinval {

/// Accuracy/confidence pair for the PAC sample-size bound.
struct PacParams {
    double eps = 0.1;
    double delta = 0.05;

    void validate() const;
};

/// Noise-corrected pairwise slope maximum, per output component:
///   L^(i) = max{0, max_{j!=k} (|y'_j[i] - y'_k[i]| - 2 eps_v[i]) / (||s~_j - s~_k||_p + 2 eps_s)}
///
/// `max_pairs` > 0 caps the work by keeping every ceil(N/max_pairs)-th pair (deterministic stride);
/// the result on a subset never exceeds the full-data estimate.
/// Throws InconsistentData when two pairs share s~ with eps_s = 0 but differ in y' beyond noise.
Vec estimate_lipschitz(const RegressorDataset& data, std::size_t max_pairs = 0);

/// Plain pairwise slope maximum ignoring noise: max_{j!=k} |y'_j[i]-y'_k[i]| / ||s~_j - s~_k||_p.
/// Pairs with coincident s~ are skipped.
Vec noiseless_slope_max(const RegressorDataset& data);

/// ceil((1/eps) ln(1/delta)), at least 1.
std::uint64_t pac_sample_size(const PacParams& params);

/// L-hat scaled by `scale` with each entry floored at `floor` so it is a valid LipschitzVector.
LipschitzVector make_lipschitz_vector(const Vec& estimate, double scale = 1.0, double floor = 1e-9);

}  // namespace lipinval

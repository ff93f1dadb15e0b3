#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lipinval/dataset.hpp"

namespace lipinval {

/// Per-component Lipschitz constants. Every entry must be positive and finite.
struct LipschitzVector {
    Vec values;

    void validate(std::size_t m) const;
};

/// Lipschitz-interpolation envelope built from a regressor dataset.
///
/// upper_i(s) = min_j ( y'_j[i] + L[i] * ||s - s~_j||_p ) + eps_t[i]
/// lower_i(s) = max_j ( y'_j[i] - L[i] * ||s - s~_j||_p ) - eps_t[i]
/// with eps_t[i] = eps_w[i] + eps_v[i] + L[i] * epsilon_s. The sandwich lower <= f <= upper
/// is guaranteed on the regressor box only, but evaluation is allowed anywhere.
class Abstraction {
public:
    Abstraction(RegressorDataset data, LipschitzVector lip);

    const RegressorDataset& data() const { return data_; }
    const LipschitzVector& lip() const { return lip_; }
    const Vec& eps_t() const { return eps_t_; }
    double eps_s() const { return eps_s_; }
    Norm p() const { return data_.p; }
    std::size_t m() const { return data_.m; }
    std::size_t n() const { return data_.n(); }

    Vec upper(std::span<const double> s) const;
    Vec lower(std::span<const double> s) const;

    /// Envelope restricted to the listed pairs (used by downsampled invalidation).
    Vec upper(std::span<const double> s, std::span<const std::size_t> active) const;
    Vec lower(std::span<const double> s, std::span<const std::size_t> active) const;

private:
    RegressorDataset data_;
    LipschitzVector lip_;
    Vec eps_t_;
    double eps_s_ = 0.0;
};

Abstraction build_abstraction(RegressorDataset data, LipschitzVector lip);
Vec eval_upper(const Abstraction& a, std::span<const double> s);
Vec eval_lower(const Abstraction& a, std::span<const double> s);

/// Grid points where the envelope crosses (lower > upper).
struct CrossingReport {
    struct Entry {
        std::size_t point;
        std::size_t component;
        double lower;
        double upper;
    };
    std::vector<Entry> entries;

    bool empty() const { return entries.empty(); }
};

CrossingReport check_consistency(const Abstraction& a, std::span<const Vec> grid);

}  // namespace lipinval

#include "lipinval/abstraction.hpp"

#include <cmath>
#include <limits>
#include <ranges>

#include "lipinval/errors.hpp"

namespace lipinval {

void LipschitzVector::validate(std::size_t m) const {
    if (values.size() != m) {
        throw InvalidInput("Lipschitz vector has " + std::to_string(values.size()) + " entries, expected " +
                           std::to_string(m));
    }
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidInput("Lipschitz constants must be positive and finite");
        }
    }
}

Abstraction::Abstraction(RegressorDataset data, LipschitzVector lip) : data_(std::move(data)), lip_(std::move(lip)) {
    if (data_.empty()) {
        throw InvalidInput("abstraction needs at least one regressor pair");
    }
    lip_.validate(data_.m);
    data_.noise.validate(data_.m);
    eps_s_ = epsilon_s(data_.noise, data_.n_y, data_.p);
    eps_t_.resize(data_.m);
    for (std::size_t i = 0; i < data_.m; ++i) {
        eps_t_[i] = data_.noise.eps_w[i] + data_.noise.eps_v[i] + lip_.values[i] * eps_s_;
    }
}

namespace {

template <typename IndexRange>
Vec envelope(const Abstraction& a, std::span<const double> s, const IndexRange& indices, bool upper) {
    if (s.size() != a.n()) {
        throw InvalidInput("envelope evaluated at a point of dimension " + std::to_string(s.size()) + ", expected " +
                           std::to_string(a.n()));
    }
    const std::size_t m = a.m();
    const auto& pairs = a.data().pairs;
    const auto& L = a.lip().values;
    Vec out(m, upper ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity());
    for (std::size_t j : indices) {
        const auto& pair = pairs.at(j);
        const double dist = distance(s, pair.s_tilde, a.p());
        for (std::size_t i = 0; i < m; ++i) {
            if (upper) {
                out[i] = std::min(out[i], pair.y_next[i] + L[i] * dist);
            } else {
                out[i] = std::max(out[i], pair.y_next[i] - L[i] * dist);
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        out[i] += upper ? a.eps_t()[i] : -a.eps_t()[i];
    }
    return out;
}

}  // namespace

Vec Abstraction::upper(std::span<const double> s) const {
    return envelope(*this, s, std::views::iota(std::size_t{0}, data_.size()), true);
}

Vec Abstraction::lower(std::span<const double> s) const {
    return envelope(*this, s, std::views::iota(std::size_t{0}, data_.size()), false);
}

Vec Abstraction::upper(std::span<const double> s, std::span<const std::size_t> active) const {
    if (active.empty()) {
        throw InvalidInput("envelope over an empty pair set is undefined");
    }
    return envelope(*this, s, active, true);
}

Vec Abstraction::lower(std::span<const double> s, std::span<const std::size_t> active) const {
    if (active.empty()) {
        throw InvalidInput("envelope over an empty pair set is undefined");
    }
    return envelope(*this, s, active, false);
}

Abstraction build_abstraction(RegressorDataset data, LipschitzVector lip) {
    return Abstraction(std::move(data), std::move(lip));
}

Vec eval_upper(const Abstraction& a, std::span<const double> s) { return a.upper(s); }

Vec eval_lower(const Abstraction& a, std::span<const double> s) { return a.lower(s); }

CrossingReport check_consistency(const Abstraction& a, std::span<const Vec> grid) {
    CrossingReport report;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const Vec up = a.upper(grid[g]);
        const Vec lo = a.lower(grid[g]);
        for (std::size_t i = 0; i < a.m(); ++i) {
            if (lo[i] > up[i]) {
                report.entries.push_back({g, i, lo[i], up[i]});
            }
        }
    }
    return report;
}

}  // namespace lipinval

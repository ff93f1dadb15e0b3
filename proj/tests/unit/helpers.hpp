#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "lipinval/dataset.hpp"

namespace lipinval::test {

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lipinval_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// One-dimensional pairs (s, f(s)) with uniform noise of the given bounds, m = n_y = 1.
inline RegressorDataset sampled_1d(const std::function<double(double)>& f, std::size_t count, double lo, double hi,
                                   double eps_w, double eps_v, Norm p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    RegressorDataset d;
    d.m = 1;
    d.n_y = 1;
    d.p = p;
    d.noise = {{eps_w}, {eps_v}};
    d.domain = {{lo}, {hi}};
    for (std::size_t j = 0; j < count; ++j) {
        const double s = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
        RegressorPair pair;
        pair.s_tilde = {s + eps_v * unit(rng)};
        pair.y_next = {f(s) + eps_w * unit(rng) + eps_v * unit(rng)};
        pair.trajectory = 0;
        pair.time = j;
        d.pairs.push_back(pair);
    }
    return d;
}

inline RegressorDataset pairs_1d(std::initializer_list<std::pair<double, double>> points, double eps_w = 0.0,
                                 double eps_v = 0.0, Norm p = Norm::Inf, double lo = -10.0, double hi = 10.0) {
    RegressorDataset d;
    d.m = 1;
    d.n_y = 1;
    d.p = p;
    d.noise = {{eps_w}, {eps_v}};
    d.domain = {{lo}, {hi}};
    std::size_t j = 0;
    for (const auto& [s, y] : points) {
        d.pairs.push_back({{s}, {y}, 0, j++});
    }
    return d;
}

}  // namespace lipinval::test

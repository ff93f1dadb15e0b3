#include "lipinval/lipschitz.hpp"

#include <algorithm>
#include <cmath>

#include "lipinval/errors.hpp"

namespace lipinval {

void PacParams::validate() const {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw InvalidInput("PAC accuracy eps must lie in (0,1)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidInput("PAC confidence delta must lie in (0,1)");
    }
}

namespace {

std::vector<std::size_t> strided(std::size_t count, std::size_t max_pairs) {
    std::size_t stride = 1;
    if (max_pairs > 0 && count > max_pairs) {
        stride = (count + max_pairs - 1) / max_pairs;
    }
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < count; j += stride) {
        idx.push_back(j);
    }
    return idx;
}

}  // namespace

Vec estimate_lipschitz(const RegressorDataset& data, std::size_t max_pairs) {
    if (data.size() < 2) {
        throw InvalidInput("Lipschitz estimation needs at least two regressor pairs");
    }
    data.noise.validate(data.m);
    const double eps_s = epsilon_s(data.noise, data.n_y, data.p);
    const auto idx = strided(data.size(), max_pairs);
    const std::size_t m = data.m;

    Vec est(m, 0.0);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const auto& pj = data.pairs[idx[a]];
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const auto& pk = data.pairs[idx[b]];
            const double denom = distance(pj.s_tilde, pk.s_tilde, data.p) + 2.0 * eps_s;
            for (std::size_t i = 0; i < m; ++i) {
                const double numer = std::abs(pj.y_next[i] - pk.y_next[i]) - 2.0 * data.noise.eps_v[i];
                if (denom == 0.0) {
                    if (numer > 0.0) {
                        throw InconsistentData("inconsistent data: infinite Lipschitz estimate (pairs " +
                                               std::to_string(idx[a]) + " and " + std::to_string(idx[b]) +
                                               " share a regressor)");
                    }
                    continue;
                }
                est[i] = std::max(est[i], numer / denom);
            }
        }
    }
    return est;
}

Vec noiseless_slope_max(const RegressorDataset& data) {
    Vec out(data.m, 0.0);
    for (std::size_t a = 0; a < data.size(); ++a) {
        for (std::size_t b = a + 1; b < data.size(); ++b) {
            const double dist = distance(data.pairs[a].s_tilde, data.pairs[b].s_tilde, data.p);
            if (dist == 0.0) {
                continue;
            }
            for (std::size_t i = 0; i < data.m; ++i) {
                out[i] = std::max(out[i], std::abs(data.pairs[a].y_next[i] - data.pairs[b].y_next[i]) / dist);
            }
        }
    }
    return out;
}

std::uint64_t pac_sample_size(const PacParams& params) {
    params.validate();
    const double bound = (1.0 / params.eps) * std::log(1.0 / params.delta);
    // Absorb representation error so e.g. eps = 1-1e-9, delta = 1/e gives 1, not 2.
    const double guarded = bound * (1.0 - 1e-8);
    const double n = std::ceil(guarded);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

LipschitzVector make_lipschitz_vector(const Vec& estimate, double scale, double floor) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidInput("Lipschitz scale factor must be positive");
    }
    LipschitzVector lip;
    lip.values.reserve(estimate.size());
    for (double v : estimate) {
        lip.values.push_back(std::max(v * scale, floor));
    }
    return lip;
}

}  // namespace lipinval

#include "lipinval/downsampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lipinval/errors.hpp"

namespace lipinval {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 query_rng(std::uint64_t seed, std::span<const double> query) {
    std::uint64_t h = mix(seed);
    for (double q : query) {
        h = mix(h ^ std::bit_cast<std::uint64_t>(q));
    }
    return std::mt19937_64(h);
}

// Draws up to `count` distinct entries of `pool` (order of pool is canonical).
void draw_extras(std::vector<std::size_t> pool, std::size_t count, std::mt19937_64& rng, std::vector<std::size_t>& out) {
    for (std::size_t taken = 0; taken < count && !pool.empty(); ++taken) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t at = pick(rng);
        out.push_back(pool[at]);
        pool[at] = pool.back();
        pool.pop_back();
    }
}

std::size_t nearest_pair(const RegressorDataset& data, std::span<const double> query) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < data.size(); ++j) {
        const double d = distance(data.pairs[j].s_tilde, query, data.p);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

void grid_geometry(const GridParams& g, const RegressorDataset& data, Vec& lo, Vec& width) {
    if (g.cells_per_dim == 0) {
        throw InvalidInput("grid downsampler: cells_per_dim must be positive");
    }
    const std::size_t n = data.n();
    lo.assign(n, 0.0);
    width.assign(n, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
        const std::size_t i = d % data.m;
        lo[d] = data.domain.lower[i];
        width[d] = (data.domain.upper[i] - data.domain.lower[i]) / static_cast<double>(g.cells_per_dim);
    }
}

}  // namespace

std::string downsampler_name(const Downsampler& ds) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GridParams>) {
                return "grid";
            } else if constexpr (std::is_same_v<T, KMeansParams>) {
                return "kmeans";
            } else {
                return "knn";
            }
        },
        ds);
}

std::size_t downsampler_param(const Downsampler& ds) {
    return std::visit(
        [](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GridParams>) {
                return p.cells_per_dim;
            } else {
                return p.k;
            }
        },
        ds);
}

std::vector<std::size_t> SelectorState::cell_of(std::span<const double> s) const {
    const auto* grid = std::get_if<GridParams>(&config_);
    if (grid == nullptr) {
        return {};
    }
    std::vector<std::size_t> cell(s.size(), 0);
    const auto top = static_cast<double>(grid->cells_per_dim - 1);
    for (std::size_t d = 0; d < s.size(); ++d) {
        if (width_[d] <= 0.0) {
            continue;
        }
        // Points on a shared face belong to the lower-index cell.
        const double raw = std::ceil((s[d] - lo_[d]) / width_[d]) - 1.0;
        cell[d] = static_cast<std::size_t>(std::clamp(raw, 0.0, top));
    }
    return cell;
}

SelectorState prepare(const Downsampler& ds, const RegressorDataset& data) {
    if (data.empty()) {
        throw InvalidInput("downsampler: empty regressor dataset");
    }
    SelectorState state;
    state.config_ = ds;
    state.data_ = &data;

    if (const auto* g = std::get_if<GridParams>(&ds)) {
        grid_geometry(*g, data, state.lo_, state.width_);
        state.pair_cells_.reserve(data.size());
        for (std::size_t j = 0; j < data.size(); ++j) {
            auto cell = state.cell_of(data.pairs[j].s_tilde);
            state.cells_[cell].push_back(j);
            state.pair_cells_.push_back(std::move(cell));
        }
    } else if (const auto* km = std::get_if<KMeansParams>(&ds)) {
        const std::size_t k = km->k;
        const std::size_t count = data.size();
        if (k == 0 || k > count) {
            throw InvalidInput("kmeans downsampler: k must be in [1, " + std::to_string(count) + "]");
        }
        const Norm p = data.p;
        auto point = [&](std::size_t j) -> const Vec& { return data.pairs[j].s_tilde; };

        // k-means++ seeding with squared p-norm distances.
        std::mt19937_64 rng(mix(km->seed));
        std::vector<Vec> centroids;
        std::vector<bool> chosen(count, false);
        {
            std::uniform_int_distribution<std::size_t> first(0, count - 1);
            const std::size_t j0 = first(rng);
            centroids.push_back(point(j0));
            chosen[j0] = true;
        }
        Vec nearest(count);
        for (std::size_t j = 0; j < count; ++j) {
            nearest[j] = std::pow(distance(point(j), centroids[0], p), 2);
        }
        while (centroids.size() < k) {
            const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
            std::size_t pick = count;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                double target = u(rng);
                for (std::size_t j = 0; j < count; ++j) {
                    if (nearest[j] <= 0.0) {
                        continue;
                    }
                    target -= nearest[j];
                    pick = j;
                    if (target <= 0.0) {
                        break;
                    }
                }
            } else {
                // All remaining points coincide with a centroid; take the first unused one.
                for (std::size_t j = 0; j < count; ++j) {
                    if (!chosen[j]) {
                        pick = j;
                        break;
                    }
                }
            }
            chosen[pick] = true;
            centroids.push_back(point(pick));
            for (std::size_t j = 0; j < count; ++j) {
                nearest[j] = std::min(nearest[j], std::pow(distance(point(j), centroids.back(), p), 2));
            }
        }

        std::vector<std::size_t> assign(count, k);
        std::size_t iter = 0;
        for (; iter < std::max<std::size_t>(km->max_iters, 1); ++iter) {
            bool changed = false;
            for (std::size_t j = 0; j < count; ++j) {
                std::size_t best = 0;
                double best_d = distance(point(j), centroids[0], p);
                for (std::size_t c = 1; c < k; ++c) {
                    const double d = distance(point(j), centroids[c], p);
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                if (assign[j] != best) {
                    assign[j] = best;
                    changed = true;
                }
            }
            // Repair empty clusters with the point farthest from its own centroid.
            std::vector<std::size_t> sizes(k, 0);
            for (std::size_t a : assign) {
                ++sizes[a];
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (sizes[c] != 0) {
                    continue;
                }
                std::size_t far = count;
                double far_d = -1.0;
                for (std::size_t j = 0; j < count; ++j) {
                    if (sizes[assign[j]] <= 1) {
                        continue;
                    }
                    const double d = distance(point(j), centroids[assign[j]], p);
                    if (d > far_d) {
                        far_d = d;
                        far = j;
                    }
                }
                if (far == count) {
                    continue;
                }
                --sizes[assign[far]];
                assign[far] = c;
                sizes[c] = 1;
                centroids[c] = point(far);
                changed = true;
            }
            if (!changed && iter > 0) {
                break;
            }
            const std::size_t n = data.n();
            std::vector<Vec> sums(k, Vec(n, 0.0));
            for (std::size_t j = 0; j < count; ++j) {
                for (std::size_t d = 0; d < n; ++d) {
                    sums[assign[j]][d] += point(j)[d];
                }
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (sizes[c] == 0) {
                    continue;
                }
                for (std::size_t d = 0; d < n; ++d) {
                    centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
                }
            }
        }
        state.iterations_ = iter;
        state.centroids_ = std::move(centroids);
        state.clusters_.assign(k, {});
        for (std::size_t j = 0; j < count; ++j) {
            state.clusters_[assign[j]].push_back(j);
        }
    } else {
        const auto& knn = std::get<KnnParams>(ds);
        if (knn.k == 0) {
            throw InvalidInput("knn downsampler: k must be positive");
        }
    }
    return state;
}

std::vector<std::size_t> select(const SelectorState& state, std::span<const double> query) {
    const RegressorDataset& data = state.data();
    if (query.size() != data.n()) {
        throw InvalidInput("downsampler: query has dimension " + std::to_string(query.size()) + ", expected " +
                           std::to_string(data.n()));
    }
    std::vector<std::size_t> out;

    if (const auto* g = std::get_if<GridParams>(&state.config_)) {
        const auto cell = state.cell_of(query);
        if (auto it = state.cells_.find(cell); it != state.cells_.end()) {
            out = it->second;
        } else {
            out.push_back(nearest_pair(data, query));
        }
        if (g->boundary_extras > 0) {
            std::vector<std::size_t> pool;
            for (std::size_t d = 0; d < cell.size(); ++d) {
                for (int delta : {-1, 1}) {
                    if ((delta < 0 && cell[d] == 0) || (delta > 0 && cell[d] + 1 >= g->cells_per_dim)) {
                        continue;
                    }
                    auto neighbour = cell;
                    neighbour[d] = delta < 0 ? cell[d] - 1 : cell[d] + 1;
                    if (auto it = state.cells_.find(neighbour); it != state.cells_.end()) {
                        pool.insert(pool.end(), it->second.begin(), it->second.end());
                    }
                }
            }
            std::sort(pool.begin(), pool.end());
            std::erase_if(pool, [&](std::size_t j) { return std::binary_search(out.begin(), out.end(), j); });
            auto rng = query_rng(g->seed, query);
            draw_extras(std::move(pool), g->boundary_extras, rng, out);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    if (const auto* km = std::get_if<KMeansParams>(&state.config_)) {
        std::size_t best = 0;
        double best_d = distance(query, state.centroids_[0], data.p);
        for (std::size_t c = 1; c < state.centroids_.size(); ++c) {
            const double d = distance(query, state.centroids_[c], data.p);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        out = state.clusters_[best];
        auto rng = query_rng(km->seed, query);
        for (std::size_t c = 0; c < state.clusters_.size(); ++c) {
            if (c != best) {
                draw_extras(state.clusters_[c], km->extras_per_other_cluster, rng, out);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    const auto& knn = std::get<KnnParams>(state.config_);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        order.emplace_back(distance(data.pairs[j].s_tilde, query, data.p), j);
    }
    const std::size_t k = std::min(knn.k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end());
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
        out.push_back(order[r].second);
    }
    return out;
}

}  // namespace lipinval

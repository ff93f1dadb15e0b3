#include "lipinval/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <thread>

#include <json.hpp>

#include "lipinval/abstraction.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/invalidation.hpp"
#include "lipinval/lipschitz.hpp"

namespace lipinval {

namespace {

struct Config {
    std::size_t size;
    std::string name;
    std::size_t param;
    std::shared_ptr<const Abstraction> abstraction;
    std::shared_ptr<const SelectorState> selector;
};

nlohmann::json downsampler_json(const std::optional<Downsampler>& ds) {
    if (!ds) {
        return {{"kind", "none"}};
    }
    nlohmann::json j{{"kind", downsampler_name(*ds)}};
    if (const auto* g = std::get_if<GridParams>(&*ds)) {
        j["cells_per_dim"] = g->cells_per_dim;
        j["boundary_extras"] = g->boundary_extras;
        j["seed"] = g->seed;
    } else if (const auto* k = std::get_if<KMeansParams>(&*ds)) {
        j["k"] = k->k;
        j["extras_per_other_cluster"] = k->extras_per_other_cluster;
        j["max_iters"] = k->max_iters;
        j["seed"] = k->seed;
    } else {
        j["k"] = std::get<KnnParams>(*ds).k;
    }
    return j;
}

std::string describe(const SweepSpec& spec, const Vec& lip, std::size_t num_train) {
    nlohmann::json j;
    j["train_kp"] = spec.train.kp;
    j["train_seed"] = spec.train.seed;
    j["train_trajectories"] = num_train;
    j["test_kp"] = spec.test_kp;
    j["test_seed"] = spec.test_seed;
    j["num_test"] = spec.num_test;
    j["horizon"] = spec.train.horizon;
    j["randomize_init"] = spec.train.randomize_init;
    j["init_position_spread"] = spec.train.init_position_spread;
    j["init_heading_spread"] = spec.train.init_heading_spread;
    j["process_noise"] = spec.train.process_noise;
    j["meas_noise"] = spec.train.meas_noise;
    j["sizes"] = spec.sizes;
    j["lip_scale"] = spec.lip_scale;
    j["lip"] = lip;
    j["timing_repeats"] = spec.timing_repeats;
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : spec.downsamplers) {
        ds.push_back(downsampler_json(d));
    }
    j["downsamplers"] = ds;
    return j.dump();
}

}  // namespace

std::size_t SweepSpec::train_trajectories() const {
    const std::size_t per = train.horizon > 1 ? train.horizon - 1 : 0;
    if (per == 0 || sizes.empty()) {
        return 0;
    }
    const std::size_t need = *std::max_element(sizes.begin(), sizes.end());
    return (need + per - 1) / per;
}

SweepResult run_sweep(const SweepSpec& spec, const TrajectoryDataset& train, const TrajectoryDataset& test) {
    train.validate();
    test.validate();
    if (test.m != train.m || test.n_y != train.n_y) {
        throw InvalidInput("sweep: training and test data have different dimensions");
    }
    const RegressorDataset full = build_regressor_dataset(train);
    for (std::size_t s : spec.sizes) {
        if (s == 0 || s > full.size()) {
            throw InvalidInput("sweep: size " + std::to_string(s) + " outside [1, " + std::to_string(full.size()) + "]");
        }
    }

    // One Lipschitz vector for the whole sweep so the envelopes at different sizes are nested.
    SweepResult result;
    if (spec.lip) {
        result.lip = *spec.lip;
    } else {
        result.lip = make_lipschitz_vector(estimate_lipschitz(full), spec.lip_scale).values;
    }
    const LipschitzVector lip{result.lip};
    result.config = describe(spec, result.lip, train.trajectories.size());

    std::vector<Config> configs;
    for (std::size_t s : spec.sizes) {
        auto abstraction = std::make_shared<const Abstraction>(full.prefix(s), lip);
        for (const auto& ds : spec.downsamplers) {
            Config c{s, "none", 0, abstraction, nullptr};
            if (ds) {
                c.name = downsampler_name(*ds);
                c.param = downsampler_param(*ds);
                c.selector = std::make_shared<const SelectorState>(prepare(*ds, abstraction->data()));
            }
            configs.push_back(std::move(c));
        }
    }

    const std::size_t num_test = test.trajectories.size();
    const std::size_t cells = configs.size() * num_test;
    result.rows.resize(cells);

    InvalidateOptions options;
    options.solver = spec.solver;
    options.audit_prescreen = spec.audit_prescreen;
    const std::size_t repeats = std::max<std::size_t>(spec.timing_repeats, 1);

    auto run_cell = [&](std::size_t cell) {
        const Config& c = configs[cell / num_test];
        const std::size_t t = cell % num_test;
        SweepRow& row = result.rows[cell];
        row.dataset_size = c.size;
        row.downsampler = c.name;
        row.param = c.param;
        row.traj_id = t;
        InvalidationProblem prob;
        prob.abstraction = c.abstraction;
        prob.observed.samples = test.trajectories[t].samples;
        prob.selector = c.selector;
        prob.y_bounds = test.domain;
        std::vector<double> times;
        try {
            for (std::size_t r = 0; r < repeats; ++r) {
                const Verdict v = invalidate(prob, options);
                times.push_back(v.stats.wall_ms);
                row.verdict = to_string(v.outcome);
                row.by_prescreen = v.by == DecidedBy::Prescreen;
                row.audit = v.audit;
                row.constraints = v.stats.constraints;
                row.binaries = v.stats.binaries;
            }
        } catch (const Inconclusive&) {
            row.verdict = "inconclusive";
        }
        if (!times.empty()) {
            std::sort(times.begin(), times.end());
            row.wall_ms = times[times.size() / 2];
        }
    };

    const std::size_t threads = std::max<std::size_t>(spec.threads, 1);
    if (threads == 1) {
        for (std::size_t cell = 0; cell < cells; ++cell) {
            run_cell(cell);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t cell = next++; cell < cells; cell = next++) {
                    run_cell(cell);
                }
            });
        }
    }

    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        SweepAggregate agg;
        agg.dataset_size = configs[ci].size;
        agg.downsampler = configs[ci].name;
        agg.param = configs[ci].param;
        agg.total = num_test;
        double sum = 0.0;
        for (std::size_t t = 0; t < num_test; ++t) {
            const SweepRow& row = result.rows[ci * num_test + t];
            agg.invalidated += row.verdict == "invalidated" ? 1 : 0;
            sum += row.wall_ms;
        }
        agg.mean_wall_ms = num_test > 0 ? sum / static_cast<double>(num_test) : 0.0;
        result.aggregates.push_back(agg);
    }
    return result;
}

SweepResult run_sweep(const SweepSpec& spec) {
    const TrajectoryDataset train = make_swarm_dataset(spec.train, spec.train_trajectories());
    SwarmConfig test_cfg = spec.train;
    test_cfg.kp = spec.test_kp;
    test_cfg.seed = spec.test_seed;
    const TrajectoryDataset test = make_swarm_dataset(test_cfg, spec.num_test);
    return run_sweep(spec, train, test);
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& results_csv,
                     const std::filesystem::path& aggregate_csv) {
    std::ofstream rows(results_csv);
    if (!rows) {
        throw std::runtime_error("cannot write " + results_csv.string());
    }
    rows << "# config " << result.config << '\n';
    rows << "dataset_size,downsampler,param,traj_id,verdict,wall_ms,constraints,binaries\n";
    for (const auto& r : result.rows) {
        rows << r.dataset_size << ',' << r.downsampler << ',' << r.param << ',' << r.traj_id << ',' << r.verdict << ','
             << format_double(r.wall_ms) << ',' << r.constraints << ',' << r.binaries << '\n';
    }

    std::ofstream agg(aggregate_csv);
    if (!agg) {
        throw std::runtime_error("cannot write " + aggregate_csv.string());
    }
    const std::size_t total = result.aggregates.empty() ? 20 : result.aggregates.front().total;
    agg << "# config " << result.config << '\n';
    agg << "dataset_size,downsampler,param,invalidated_of_" << total << ",mean_wall_ms\n";
    for (const auto& a : result.aggregates) {
        agg << a.dataset_size << ',' << a.downsampler << ',' << a.param << ',' << a.invalidated << ','
            << format_double(a.mean_wall_ms) << '\n';
    }
}

}  // namespace lipinval

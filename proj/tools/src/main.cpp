#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lipinval/abstraction.hpp"
#include "lipinval/dataset.hpp"
#include "lipinval/downsampling.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/invalidation.hpp"
#include "lipinval/lipschitz.hpp"
#include "lipinval/swarmsim.hpp"
#include "lipinval/sweep.hpp"
#include "lipinval_oracles/suites.hpp"

namespace {

using namespace lipinval;

constexpr int kExitNotInvalidated = 0;
constexpr int kExitInvalidated = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitError = 2;

struct LipOptions {
    std::vector<double> values;
    bool estimate = false;
    double scale = 1.0;
    std::size_t max_pairs = 0;
};

void add_lip_options(CLI::App* cmd, LipOptions& o) {
    auto* lip = cmd->add_option("--lip", o.values, "Lipschitz constants, one per output or a single value for all");
    auto* est = cmd->add_flag("--estimate-lip", o.estimate, "Estimate L from the dataset (default when --lip is absent)");
    lip->excludes(est);
    cmd->add_option("--lip-scale", o.scale, "Safety factor applied to the estimate")->check(CLI::PositiveNumber);
    cmd->add_option("--max-pairs", o.max_pairs, "Cap on pairs used by the estimator (0 = all)");
}

LipschitzVector resolve_lip(const LipOptions& o, const RegressorDataset& data) {
    if (o.values.empty()) {
        return make_lipschitz_vector(estimate_lipschitz(data, o.max_pairs), o.scale);
    }
    Vec values = o.values;
    if (values.size() == 1) {
        values.assign(data.m, o.values.front());
    }
    LipschitzVector lip{values};
    lip.validate(data.m);
    return lip;
}

std::string join(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + format_double(v[i]);
    }
    return out;
}

// ---- gen

struct GenArgs {
    double kp = 0.5;
    std::size_t traj = 1;
    std::size_t horizon = 16;
    std::uint64_t seed = 1;
    std::string out;
    bool randomize_init = false;
    double position_spread = 0.0;
    double heading_spread = 0.0;
    std::vector<double> fixed_centroid;
    std::vector<double> meas_noise;
};

int run_gen(const GenArgs& a) {
    SwarmConfig cfg;
    cfg.horizon = a.horizon;
    cfg.seed = a.seed;
    cfg.randomize_init = a.randomize_init;
    cfg.init_position_spread = a.position_spread;
    cfg.init_heading_spread = a.heading_spread;
    if (!a.fixed_centroid.empty()) {
        cfg.centroid_mode = CentroidMode::Fixed;
        cfg.centroid_x = a.fixed_centroid[0];
        cfg.centroid_y = a.fixed_centroid[1];
    }
    if (!a.meas_noise.empty()) {
        cfg.meas_noise = a.meas_noise;
    }
    const TrajectoryDataset d = generate_benchmark(a.kp, a.traj, cfg, a.out);
    std::cout << "wrote " << d.trajectories.size() << " trajectories (m=" << d.m << ", T=" << a.horizon << ") to "
              << a.out << '\n';
    return 0;
}

// ---- estimate-lipschitz

struct EstimateArgs {
    std::string dir;
    double pac_eps = 0.1;
    double pac_delta = 0.05;
    std::size_t max_pairs = 0;
    double scale = 1.0;
};

int run_estimate(const EstimateArgs& a) {
    const RegressorDataset data = build_regressor_dataset(load_dataset(a.dir));
    const Vec est = estimate_lipschitz(data, a.max_pairs);
    const std::uint64_t pac = pac_sample_size({a.pac_eps, a.pac_delta});
    std::cout << "pairs " << data.size() << '\n';
    for (std::size_t i = 0; i < est.size(); ++i) {
        std::cout << "L_hat[" << i << "] " << format_double(est[i]) << '\n';
    }
    std::cout << "pac_sample_size " << pac << " (eps=" << format_double(a.pac_eps)
              << ", delta=" << format_double(a.pac_delta) << ")\n";
    if (data.size() < pac) {
        std::cout << "warning: fewer pairs than the PAC sample size\n";
    }
    if (a.scale != 1.0) {
        std::cout << "L_scaled " << join(make_lipschitz_vector(est, a.scale).values) << '\n';
    }
    return 0;
}

// ---- abstract eval

struct EvalArgs {
    std::string dir;
    LipOptions lip;
    std::size_t axis = 0;
    std::size_t grid = 100;
    std::optional<double> from;
    std::optional<double> to;
    std::vector<double> at;
    std::string points_file;
    std::string out;
};

std::vector<Vec> read_points(const std::string& file, std::size_t n) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("cannot read " + file);
    }
    std::vector<Vec> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || (line_no == 1 && line.rfind("s_", 0) == 0)) {
            continue;
        }
        Vec p;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                p.push_back(std::stod(cell, &used));
                if (used != cell.size()) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw ParseError(file, line_no, "not a number: '" + cell + "'");
            }
        }
        if (p.size() != n) {
            throw ParseError(file, line_no, "expected " + std::to_string(n) + " values");
        }
        points.push_back(std::move(p));
    }
    return points;
}

int run_eval(const EvalArgs& a) {
    const RegressorDataset data = build_regressor_dataset(load_dataset(a.dir));
    const LipschitzVector lip = resolve_lip(a.lip, data);
    const Abstraction abstraction(data, lip);
    const std::size_t n = abstraction.n();
    const std::size_t m = abstraction.m();

    std::vector<Vec> points;
    if (!a.points_file.empty()) {
        points = read_points(a.points_file, n);
    } else {
        if (a.axis >= n) {
            throw InvalidInput("--axis must be below the regressor dimension " + std::to_string(n));
        }
        Vec base(n);
        if (!a.at.empty()) {
            if (a.at.size() != n) {
                throw InvalidInput("--at needs " + std::to_string(n) + " values");
            }
            base = a.at;
        } else {
            for (std::size_t d = 0; d < n; ++d) {
                base[d] = 0.5 * (data.domain.lower[d % m] + data.domain.upper[d % m]);
            }
        }
        const double lo = a.from.value_or(data.domain.lower[a.axis % m]);
        const double hi = a.to.value_or(data.domain.upper[a.axis % m]);
        for (std::size_t g = 0; g < a.grid; ++g) {
            Vec p = base;
            p[a.axis] = a.grid == 1 ? lo : lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(a.grid - 1);
            points.push_back(std::move(p));
        }
    }

    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) {
            throw std::runtime_error("cannot write " + a.out);
        }
    }
    std::ostream& out = a.out.empty() ? std::cout : file;
    nlohmann::json config{{"dataset", a.dir}, {"lip", lip.values}, {"p", to_string(data.p)}, {"pairs", data.size()}};
    out << "# config " << config.dump() << '\n';
    for (std::size_t d = 0; d < n; ++d) {
        out << "s_" << d + 1 << ',';
    }
    for (std::size_t i = 0; i < m; ++i) {
        out << "fbar_" << i + 1 << ',';
    }
    for (std::size_t i = 0; i < m; ++i) {
        out << "flow_" << i + 1 << (i + 1 < m ? "," : "\n");
    }
    for (const Vec& p : points) {
        const Vec up = abstraction.upper(p);
        const Vec low = abstraction.lower(p);
        out << join(p) << ',' << join(up) << ',' << join(low) << '\n';
    }
    return 0;
}

// ---- invalidate

struct InvalidateArgs {
    std::string dir;
    std::string trajectory;
    LipOptions lip;
    std::string downsample = "none";
    std::size_t grid_size = 4;
    std::size_t clusters = 8;
    std::size_t knn = 16;
    std::optional<std::size_t> extras;
    std::uint64_t seed = 0;
    std::string dump_lp;
    bool literal = false;
    bool audit = false;
    bool no_prescreen = false;
    std::uint64_t max_nodes = SolverOptions{}.max_nodes;
    std::uint64_t max_pivots = SolverOptions{}.max_pivots;
};

std::optional<Downsampler> make_downsampler(const std::string& kind, std::size_t grid_size, std::size_t clusters,
                                            std::size_t knn, std::optional<std::size_t> extras, std::uint64_t seed) {
    if (kind == "none") {
        return std::nullopt;
    }
    if (kind == "grid") {
        return GridParams{grid_size, extras.value_or(GridParams{}.boundary_extras), seed};
    }
    if (kind == "kmeans") {
        KMeansParams k;
        k.k = clusters;
        k.extras_per_other_cluster = extras.value_or(k.extras_per_other_cluster);
        k.seed = seed;
        return k;
    }
    return KnnParams{knn};
}

int run_invalidate(const InvalidateArgs& a) {
    const TrajectoryDataset dataset = load_dataset(a.dir);
    RegressorDataset data = build_regressor_dataset(dataset);
    const LipschitzVector lip = resolve_lip(a.lip, data);

    InvalidationProblem prob;
    prob.abstraction = std::make_shared<const Abstraction>(std::move(data), lip);
    prob.observed.samples = read_trajectory_csv(a.trajectory, dataset.m).samples;
    prob.downsampler = make_downsampler(a.downsample, a.grid_size, a.clusters, a.knn, a.extras, a.seed);

    InvalidateOptions options;
    options.encode.tighten = !a.literal;
    options.audit_prescreen = a.audit;
    options.use_prescreen = !a.no_prescreen;
    options.solver.max_nodes = a.max_nodes;
    options.solver.max_pivots = a.max_pivots;
    if (!a.dump_lp.empty()) {
        options.dump_lp = a.dump_lp;
    }

    std::cout << "lip " << join(lip.values) << '\n';
    try {
        const Verdict v = invalidate(prob, options);
        std::cout << "verdict " << to_string(v.outcome) << '\n';
        std::cout << "decided_by " << to_string(v.by) << '\n';
        if (v.hit) {
            const bool empty = v.hit->kind == PrescreenHit::Kind::EmptyBox;
            std::cout << "prescreen_hit " << (empty ? "empty_box" : "envelope") << " step=" << v.hit->step;
            if (!empty) {
                std::cout << " pair=" << v.hit->pair;
            }
            std::cout << " component=" << v.hit->component << '\n';
        }
        if (v.audit) {
            std::cout << "audit " << to_string(*v.audit) << '\n';
        }
        std::cout << "variables " << v.stats.variables << '\n';
        std::cout << "constraints " << v.stats.constraints << '\n';
        std::cout << "binaries " << v.stats.binaries << '\n';
        std::cout << "nodes " << v.stats.solver.nodes << '\n';
        std::cout << "pivots " << v.stats.solver.pivots << '\n';
        std::cout << "wall_ms " << format_double(v.stats.wall_ms) << '\n';
        return v.outcome == Outcome::Invalidated ? kExitInvalidated : kExitNotInvalidated;
    } catch (const Inconclusive& e) {
        std::cout << "verdict inconclusive\n";
        std::cerr << "inconclusive: " << e.what() << '\n';
        return kExitInconclusive;
    }
}

// ---- sweep

struct SweepArgs {
    std::vector<std::size_t> sizes{16, 48, 112, 208};
    std::vector<std::string> downsamplers{"none"};
    std::size_t num_test = 20;
    double train_kp = 0.5;
    double test_kp = -0.5;
    std::uint64_t train_seed = 1;
    std::uint64_t test_seed = 1001;
    std::size_t horizon = 16;
    bool fixed_init = false;
    double position_spread = 0.0;
    double heading_spread = 0.4;
    LipOptions lip;
    std::size_t timing_repeats = 1;
    std::size_t threads = 1;
    bool audit = false;
    std::string train_dir;
    std::string test_dir;
    std::string out = "sweep_results.csv";
    std::string aggregate = "sweep_aggregate.csv";
};

// "grid:4", "kmeans:8", "knn:16" or "none".
std::optional<Downsampler> parse_downsampler(const std::string& text, std::uint64_t seed) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    if (kind != "none" && kind != "grid" && kind != "kmeans" && kind != "knn") {
        throw InvalidInput("unknown downsampler '" + text + "'");
    }
    std::size_t param = 0;
    if (colon != std::string::npos) {
        try {
            param = std::stoul(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidInput("bad downsampler parameter in '" + text + "'");
        }
    }
    const auto pick = [&](std::size_t fallback) { return colon == std::string::npos ? fallback : param; };
    return make_downsampler(kind, pick(GridParams{}.cells_per_dim), pick(KMeansParams{}.k), pick(KnnParams{}.k),
                            std::nullopt, seed);
}

int run_sweep_cmd(const SweepArgs& a) {
    SweepSpec spec;
    spec.train.kp = a.train_kp;
    spec.train.seed = a.train_seed;
    spec.train.horizon = a.horizon;
    spec.train.randomize_init = !a.fixed_init;
    spec.train.init_position_spread = a.position_spread;
    spec.train.init_heading_spread = a.heading_spread;
    spec.test_kp = a.test_kp;
    spec.test_seed = a.test_seed;
    spec.num_test = a.num_test;
    spec.sizes = a.sizes;
    spec.downsamplers.clear();
    for (const auto& d : a.downsamplers) {
        spec.downsamplers.push_back(parse_downsampler(d, a.train_seed));
    }
    if (!a.lip.values.empty()) {
        spec.lip = a.lip.values;
    }
    spec.lip_scale = a.lip.scale;
    spec.timing_repeats = a.timing_repeats;
    spec.threads = a.threads;
    spec.audit_prescreen = a.audit;

    SweepResult result;
    if (!a.train_dir.empty() || !a.test_dir.empty()) {
        if (a.train_dir.empty() || a.test_dir.empty()) {
            throw InvalidInput("--train-dir and --test-dir must be given together");
        }
        result = run_sweep(spec, load_dataset(a.train_dir), load_dataset(a.test_dir));
    } else {
        result = run_sweep(spec);
    }
    write_sweep_csv(result, a.out, a.aggregate);

    std::cout << "lip " << join(result.lip) << '\n';
    std::cout << "dataset_size,downsampler,param,invalidated,total,mean_wall_ms\n";
    std::size_t inconclusive = 0;
    for (const auto& row : result.rows) {
        inconclusive += row.verdict == "inconclusive" ? 1 : 0;
    }
    for (const auto& agg : result.aggregates) {
        std::cout << agg.dataset_size << ',' << agg.downsampler << ',' << agg.param << ',' << agg.invalidated << ','
                  << agg.total << ',' << format_double(agg.mean_wall_ms) << '\n';
    }
    if (inconclusive > 0) {
        std::cout << "inconclusive rows " << inconclusive << '\n';
    }
    std::cout << "wrote " << a.out << " and " << a.aggregate << '\n';
    return 0;
}

// ---- selftest

struct SelftestArgs {
    double scale = 1.0;
    std::uint64_t seed = 12345;
};

int run_selftest(const SelftestArgs& a) {
    const auto n = [&](std::size_t base) { return std::max<std::size_t>(1, static_cast<std::size_t>(base * a.scale)); };
    const std::vector<oracle::SuiteReport> reports{
        oracle::lp_suite(n(500), a.seed),
        oracle::milf_suite(n(200), a.seed + 1),
        oracle::invalidation_suite(n(50), a.seed + 2),
        oracle::lipschitz_suite(n(100), a.seed + 3),
    };
    bool ok = true;
    for (const auto& r : reports) {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.summary() << '\n';
        for (const auto& f : r.failures) {
            std::cout << "  " << f << '\n';
        }
        ok = ok && r.passed();
    }
    std::cout << (ok ? "selftest passed" : "selftest failed") << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven model invalidation with Lipschitz abstractions"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a swarm trajectory dataset");
    gen_cmd->add_option("--kp", gen.kp, "Controller gain")->required();
    gen_cmd->add_option("--traj", gen.traj, "Number of trajectories")->required();
    gen_cmd->add_option("--T", gen.horizon, "Samples per trajectory")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Master seed");
    gen_cmd->add_option("--out", gen.out, "Output dataset directory")->required();
    gen_cmd->add_flag("--randomize-init", gen.randomize_init, "Perturb initial states per trajectory");
    gen_cmd->add_option("--init-position-spread", gen.position_spread, "Initial position perturbation bound (m)");
    gen_cmd->add_option("--init-heading-spread", gen.heading_spread, "Initial heading perturbation bound (rad)");
    gen_cmd->add_option("--fixed-centroid", gen.fixed_centroid, "Steer towards a fixed point CX CY")->expected(2);
    gen_cmd->add_option("--meas-noise", gen.meas_noise, "Measurement noise bounds on px py theta")->expected(3);

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate-lipschitz", "Estimate per-output Lipschitz constants");
    est_cmd->add_option("dataset", est.dir, "Dataset directory")->required();
    est_cmd->add_option("--pac-eps", est.pac_eps, "PAC accuracy");
    est_cmd->add_option("--pac-delta", est.pac_delta, "PAC confidence");
    est_cmd->add_option("--max-pairs", est.max_pairs, "Cap on pairs used (0 = all)");
    est_cmd->add_option("--lip-scale", est.scale, "Also print the estimate times this factor")->check(CLI::PositiveNumber);

    EvalArgs eval;
    auto* abstract_cmd = app.add_subcommand("abstract", "Envelope utilities");
    abstract_cmd->require_subcommand(1);
    auto* eval_cmd = abstract_cmd->add_subcommand("eval", "Evaluate the envelope on a grid and print CSV");
    eval_cmd->add_option("dataset", eval.dir, "Dataset directory")->required();
    add_lip_options(eval_cmd, eval.lip);
    eval_cmd->add_option("--axis", eval.axis, "Regressor coordinate swept by the grid");
    eval_cmd->add_option("--grid", eval.grid, "Number of grid points")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--from", eval.from, "Grid start (default: domain lower bound)");
    eval_cmd->add_option("--to", eval.to, "Grid end (default: domain upper bound)");
    eval_cmd->add_option("--at", eval.at, "Values of the other coordinates (default: domain midpoint)");
    eval_cmd->add_option("--points", eval.points_file, "CSV of regressor points instead of a grid")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval.out, "Output CSV (default: stdout)");

    InvalidateArgs inv;
    auto* inv_cmd = app.add_subcommand("invalidate", "Decide whether a trajectory invalidates the abstraction");
    inv_cmd->add_option("dataset", inv.dir, "Dataset directory")->required();
    inv_cmd->add_option("trajectory", inv.trajectory, "Trajectory CSV")->required()->check(CLI::ExistingFile);
    add_lip_options(inv_cmd, inv.lip);
    inv_cmd->add_option("--downsample", inv.downsample, "Pair selection")
        ->check(CLI::IsMember({"none", "grid", "kmeans", "knn"}));
    inv_cmd->add_option("--grid-size", inv.grid_size, "Grid cells per dimension")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--clusters", inv.clusters, "k-means cluster count")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--knn", inv.knn, "Nearest neighbours kept")->check(CLI::PositiveNumber);
    inv_cmd->add_option("--extras", inv.extras, "Random extras per neighbouring cell or other cluster");
    inv_cmd->add_option("--seed", inv.seed, "Seed for downsampling randomness");
    inv_cmd->add_option("--dump-lp", inv.dump_lp, "Write the mixed-integer program to this file");
    inv_cmd->add_flag("--literal", inv.literal, "Plain big-M encoding without interval tightening");
    inv_cmd->add_flag("--audit", inv.audit, "Also solve the program when the prescreen fires");
    inv_cmd->add_flag("--no-prescreen", inv.no_prescreen, "Skip the interval prescreen");
    inv_cmd->add_option("--max-nodes", inv.max_nodes, "Branch-and-bound node limit");
    inv_cmd->add_option("--max-pivots", inv.max_pivots, "Total simplex pivot limit");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the swarm benchmark over dataset sizes and downsamplers");
    sweep_cmd->add_option("--sizes", sw.sizes, "Dataset sizes (leading regressor pairs)")->delimiter(',');
    sweep_cmd->add_option("--downsample", sw.downsamplers, "none, grid:N, kmeans:K, knn:K")->delimiter(',');
    sweep_cmd->add_option("--num-test", sw.num_test, "Test trajectories");
    sweep_cmd->add_option("--train-kp", sw.train_kp, "Gain of the training model");
    sweep_cmd->add_option("--test-kp", sw.test_kp, "Gain generating the test trajectories");
    sweep_cmd->add_option("--train-seed", sw.train_seed, "Training master seed");
    sweep_cmd->add_option("--test-seed", sw.test_seed, "Test master seed");
    sweep_cmd->add_option("--T", sw.horizon, "Samples per trajectory")->check(CLI::PositiveNumber);
    sweep_cmd->add_flag("--fixed-init", sw.fixed_init, "Use the nominal initial states for every trajectory");
    sweep_cmd->add_option("--init-position-spread", sw.position_spread, "Initial position perturbation bound (m)");
    sweep_cmd->add_option("--init-heading-spread", sw.heading_spread, "Initial heading perturbation bound (rad)");
    sweep_cmd->add_option("--lip", sw.lip.values, "Lipschitz constants instead of the estimate");
    sw.lip.scale = 1.5;
    sweep_cmd->add_option("--lip-scale", sw.lip.scale, "Safety factor applied to the estimate")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--timing-repeats", sw.timing_repeats, "Solves per cell; the median is reported");
    sweep_cmd->add_option("--threads", sw.threads, "Worker threads");
    sweep_cmd->add_flag("--audit", sw.audit, "Solve the program for prescreened cells as well");
    sweep_cmd->add_option("--train-dir", sw.train_dir, "Load training data instead of generating it");
    sweep_cmd->add_option("--test-dir", sw.test_dir, "Load test data instead of generating it");
    sweep_cmd->add_option("--out", sw.out, "Per-trajectory results CSV");
    sweep_cmd->add_option("--aggregate", sw.aggregate, "Aggregate CSV");

    SelftestArgs self;
    auto* self_cmd = app.add_subcommand("selftest", "Run the small-instance oracle suites");
    self_cmd->add_option("--scale", self.scale, "Multiplier on the instance counts")->check(CLI::PositiveNumber);
    self_cmd->add_option("--seed", self.seed, "Base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0) {
            std::cerr << app.help();
        }
        return code;
    }

    try {
        if (*gen_cmd) {
            return run_gen(gen);
        }
        if (*est_cmd) {
            return run_estimate(est);
        }
        if (*eval_cmd) {
            return run_eval(eval);
        }
        if (*inv_cmd) {
            return run_invalidate(inv);
        }
        if (*sweep_cmd) {
            return run_sweep_cmd(sw);
        }
        if (*self_cmd) {
            return run_selftest(self);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lipinval/abstraction.hpp"
#include "lipinval/dataset.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/invalidation.hpp"
#include "lipinval/lipschitz.hpp"
#include "lipinval/sweep.hpp"
#include "lipinval_oracles/suites.hpp"

namespace {

using namespace lipinval;
using Clock = std::chrono::steady_clock;

struct Check {
    bool ok = true;
    std::string detail;
};

struct PrescreenTally {
    std::size_t fired = 0;
    std::size_t audit_failures = 0;

    void add(std::size_t f, std::size_t failures) {
        fired += f;
        audit_failures += failures;
    }
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Check()>& body) {
    const auto start = Clock::now();
    Check out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = budget_s <= 0.0 || secs < budget_s;
    const bool pass = out.ok && in_time;
    failures += pass ? 0 : 1;
    std::ostringstream time;
    time << std::fixed << std::setprecision(2) << secs << " s";
    if (budget_s > 0.0) {
        time << " / " << budget_s << " s";
    }
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << out.detail << " ["
              << time.str() << (in_time ? "" : ", over budget") << "]" << std::endl;
}

// Samples f on an even grid of `count` points in [lo, hi] with uniform noise of the given bounds.
RegressorDataset noisy_samples(const std::function<double(double)>& f, std::size_t count, double lo, double hi,
                               double eps_w, double eps_v, Norm p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RegressorDataset d;
    d.m = 1;
    d.n_y = 1;
    d.p = p;
    d.noise = {{eps_w}, {eps_v}};
    d.domain = {{lo}, {hi}};
    for (std::size_t j = 0; j < count; ++j) {
        const double s = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
        d.pairs.push_back({{s + eps_v * u(rng)}, {f(s) + eps_w * u(rng) + eps_v * u(rng)}, 0, j});
    }
    return d;
}

// ---------------------------------------------------------------- 1

Check envelope_soundness() {
    std::mt19937_64 rng(1);
    std::size_t violations = 0;
    std::size_t checks = 0;
    const double two_pi = 2.0 * std::numbers::pi;
    for (Norm p : {Norm::One, Norm::Inf}) {
        const Abstraction a(noisy_samples([](double x) { return std::cos(x); }, 50, 0.0, two_pi, 0.1, 0.1, p, rng),
                            LipschitzVector{{1.0}});
        for (int g = 0; g < 1000; ++g) {
            const double x = two_pi * g / 999.0;
            const double truth = std::cos(x);
            violations += (a.lower(Vec{x})[0] > truth) + (a.upper(Vec{x})[0] < truth);
            checks += 2;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) + " checks"};
}

// ---------------------------------------------------------------- 2

Check envelope_lipschitz() {
    std::mt19937_64 rng(2);
    double worst = -kInf;
    std::size_t bad = 0;
    std::size_t checks = 0;
    for (Norm p : {Norm::One, Norm::Two, Norm::Inf}) {
        // Two outputs over a two-dimensional regressor.
        RegressorDataset d;
        d.m = 2;
        d.n_y = 1;
        d.p = p;
        d.noise = {{0.05, 0.02}, {0.03, 0.01}};
        d.domain = {{-3.0, -3.0}, {3.0, 3.0}};
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (std::size_t j = 0; j < 60; ++j) {
            const double a = u(rng);
            const double b = u(rng);
            d.pairs.push_back({{a, b}, {std::sin(a) * std::cos(b), 0.5 * a - 0.3 * b}, 0, j});
        }
        const Vec lip{1.3, 0.7};
        const Abstraction env(d, LipschitzVector{lip});
        std::uniform_real_distribution<double> q(-4.0, 4.0);
        for (int i = 0; i < 10000 / 3 + 1; ++i) {
            const Vec s1{q(rng), q(rng)};
            const Vec s2{q(rng), q(rng)};
            const double dist = distance(s1, s2, p);
            const Vec u1 = env.upper(s1);
            const Vec u2 = env.upper(s2);
            const Vec l1 = env.lower(s1);
            const Vec l2 = env.lower(s2);
            for (std::size_t c = 0; c < 2; ++c) {
                const double slack_u = std::abs(u1[c] - u2[c]) - lip[c] * dist;
                const double slack_l = std::abs(l1[c] - l2[c]) - lip[c] * dist;
                worst = std::max({worst, slack_u, slack_l});
                bad += (slack_u > 1e-9) + (slack_l > 1e-9);
                checks += 2;
            }
        }
    }
    std::ostringstream out;
    out << bad << " of " << checks << " checks exceed L*dist + 1e-9 (worst excess " << std::scientific
        << std::setprecision(2) << worst << ")";
    return {bad == 0, out.str()};
}

// ---------------------------------------------------------------- 3

Check monotonicity() {
    std::mt19937_64 rng(3);
    const RegressorDataset full =
        noisy_samples([](double x) { return std::sin(2.0 * x); }, 80, -2.0, 2.0, 0.02, 0.02, Norm::Inf, rng);
    const Abstraction whole(full, LipschitzVector{{2.5}});
    std::size_t bad = 0;
    std::size_t checks = 0;
    std::bernoulli_distribution keep(0.5);
    std::uniform_real_distribution<double> q(-2.5, 2.5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < full.size(); ++j) {
            if (keep(rng)) {
                idx.push_back(j);
            }
        }
        if (idx.empty()) {
            idx.push_back(0);
        }
        const Abstraction part(full.subset(idx), LipschitzVector{{2.5}});
        for (int g = 0; g < 100; ++g) {
            const Vec s{q(rng)};
            bad += part.upper(s)[0] < whole.upper(s)[0] - 1e-12;
            bad += part.lower(s)[0] > whole.lower(s)[0] + 1e-12;
            checks += 2;
        }
    }
    return {bad == 0, std::to_string(bad) + " of " + std::to_string(checks) + " subset comparisons out of order"};
}

// ---------------------------------------------------------------- 4

Check solver_oracle() {
    const auto r = oracle::milf_suite(500, 4);
    return {r.passed() && r.checked == 500, r.summary()};
}

// ---------------------------------------------------------------- 5

Check invalidation_oracle(PrescreenTally& tally) {
    const auto r = oracle::invalidation_suite(100, 5, 1e-3);
    tally.add(r.prescreen_fired, r.prescreen_audit_failures);
    return {r.passed() && r.checked == 100, r.summary()};
}

// ---------------------------------------------------------------- 6

struct System {
    std::size_t m;
    std::size_t n_y;
    std::function<Vec(const Vec&)> f;  // regressor -> next output
};

// Collects training trajectories of `sys`, builds the envelope, then checks that trajectories
// driven by lambda * upper + (1 - lambda) * lower with admissible noise are never invalidated.
// Generated trajectories that leave the output domain are redrawn.
void soundness_family(const System& sys, Norm p, const Vec& lip, std::size_t count, std::uint64_t seed,
                      std::size_t& invalidated, std::size_t& inconclusive, std::size_t& checked,
                      std::size_t& redrawn, PrescreenTally& tally) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec eps_w(sys.m, 0.02);
    const Vec eps_v(sys.m, 0.01);

    TrajectoryDataset train;
    train.m = sys.m;
    train.n_y = sys.n_y;
    train.p = p;
    train.noise = {eps_w, eps_v};
    train.domain = {Vec(sys.m, -6.0), Vec(sys.m, 6.0)};
    bool left_domain = false;
    const auto run = [&](const std::function<Vec(const Vec&)>& step_fn, std::size_t T) {
        left_domain = false;
        std::vector<Vec> y;
        for (std::size_t k = 0; k < sys.n_y; ++k) {
            Vec y0(sys.m);
            for (double& v : y0) {
                v = 1.5 * u(rng);
            }
            y.push_back(y0);
        }
        while (y.size() < T) {
            Vec next = step_fn(stack_regressor(y, y.size() - 1, sys.n_y));
            for (std::size_t i = 0; i < sys.m; ++i) {
                next[i] += eps_w[i] * u(rng);
            }
            left_domain = left_domain || !train.domain.contains(next);
            y.push_back(next);
        }
        Trajectory t;
        for (const Vec& yk : y) {
            Vec obs = yk;
            for (std::size_t i = 0; i < sys.m; ++i) {
                obs[i] += eps_v[i] * u(rng);
            }
            t.samples.push_back(obs);
        }
        return t;
    };
    for (int l = 0; l < 20; ++l) {
        train.trajectories.push_back(run(sys.f, 10));
    }
    auto abstraction = std::make_shared<const Abstraction>(build_regressor_dataset(train), LipschitzVector{lip});

    InvalidateOptions options;
    options.audit_prescreen = true;
    for (std::size_t t = 0; t < count; ++t) {
        const double pick = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double lambda = pick < 0.1 ? 0.0 : pick < 0.2 ? 1.0 : (pick - 0.2) / 0.8;
        const auto g = [&](const Vec& s) {
            const Vec hi = abstraction->upper(s);
            const Vec lo = abstraction->lower(s);
            Vec out(sys.m);
            for (std::size_t i = 0; i < sys.m; ++i) {
                out[i] = lambda * hi[i] + (1.0 - lambda) * lo[i];
            }
            return out;
        };
        InvalidationProblem prob;
        prob.abstraction = abstraction;
        prob.observed.samples = run(g, 8).samples;
        if (left_domain) {
            ++redrawn;
            --t;
            continue;
        }
        ++checked;
        try {
            const Verdict v = invalidate(prob, options);
            invalidated += v.outcome == lipinval::Outcome::Invalidated;
            if (v.outcome == lipinval::Outcome::Invalidated) std::cerr << "DBG seed " << seed << " t " << t << " lambda " << lambda << " by " << to_string(v.by) << "\n";
            if (v.by == DecidedBy::Prescreen) {
                tally.add(1, v.audit == SolveStatus::Infeasible ? 0 : 1);
            }
        } catch (const Inconclusive&) {
            ++inconclusive;
        }
    }
}

Check end_to_end_soundness(PrescreenTally& tally) {
    const System scalar{1, 1, [](const Vec& s) { return Vec{std::cos(s[0])}; }};
    const System coupled{2, 2, [](const Vec& s) {
                             // s = [y1_k, y2_k, y1_{k-1}, y2_{k-1}]
                             return Vec{0.6 * std::cos(s[0]) - 0.2 * s[3], 0.5 * std::sin(s[1] + s[2])};
                         }};
    std::size_t invalidated = 0;
    std::size_t inconclusive = 0;
    std::size_t checked = 0;
    std::size_t redrawn = 0;
    soundness_family(scalar, Norm::One, {1.0}, 50, 61, invalidated, inconclusive, checked, redrawn, tally);
    soundness_family(scalar, Norm::Inf, {1.0}, 50, 62, invalidated, inconclusive, checked, redrawn, tally);
    soundness_family(coupled, Norm::One, {1.0, 1.0}, 50, 63, invalidated, inconclusive, checked, redrawn, tally);
    soundness_family(coupled, Norm::Inf, {1.0, 1.0}, 50, 64, invalidated, inconclusive, checked, redrawn, tally);
    std::ostringstream out;
    out << invalidated << " of " << checked << " envelope-driven trajectories invalidated, " << inconclusive
        << " inconclusive, " << redrawn << " redrawn after leaving the domain";
    return {invalidated == 0 && inconclusive == 0 && checked == 200, out.str()};
}

// ---------------------------------------------------------------- 7, 8

struct SweepOutcome {
    SweepResult result;
    bool ran = false;
};

SweepOutcome& benchmark_sweep() {
    static SweepOutcome cache;
    if (!cache.ran) {
        SweepSpec spec;  // calibrated benchmark defaults
        spec.downsamplers = {std::nullopt, GridParams{4, 2, 0}, KMeansParams{8, 1, 100, 0}, KnnParams{16}};
        spec.timing_repeats = 3;
        spec.audit_prescreen = true;
        cache.result = run_sweep(spec);
        cache.ran = true;
    }
    return cache;
}

void tally_sweep(const SweepResult& r, PrescreenTally& tally) {
    for (const auto& row : r.rows) {
        if (row.by_prescreen) {
            tally.add(1, row.audit == SolveStatus::Infeasible ? 0 : 1);
        }
    }
}

const SweepAggregate* find(const SweepResult& r, std::size_t size, const std::string& name) {
    for (const auto& a : r.aggregates) {
        if (a.dataset_size == size && a.downsampler == name) {
            return &a;
        }
    }
    return nullptr;
}

Check trend(PrescreenTally& tally) {
    const SweepResult& r = benchmark_sweep().result;
    tally_sweep(r, tally);
    std::vector<std::size_t> counts;
    std::ostringstream out;
    out << "invalidated of 20 at |D|=16/48/112/208 (lip-scale 1.5, seed 1):";
    std::size_t inconclusive = 0;
    for (const auto& row : r.rows) {
        inconclusive += row.verdict == "inconclusive";
    }
    for (std::size_t s : {16, 48, 112, 208}) {
        const auto* a = find(r, s, "none");
        counts.push_back(a ? a->invalidated : 0);
        out << ' ' << counts.back();
    }
    bool nondecreasing = true;
    for (std::size_t i = 1; i < counts.size(); ++i) {
        nondecreasing = nondecreasing && counts[i] + 1 >= counts[i - 1];
    }
    out << ", inconclusive " << inconclusive;
    return {counts.front() == 0 && counts.back() > counts.front() && nondecreasing && inconclusive == 0, out.str()};
}

Check downsampling_soundness() {
    const SweepResult& r = benchmark_sweep().result;
    const std::size_t size = 208;
    std::vector<bool> full(20, false);
    for (const auto& row : r.rows) {
        if (row.dataset_size == size && row.downsampler == "none") {
            full[row.traj_id] = row.verdict == "invalidated";
        }
    }
    const auto* none = find(r, size, "none");
    if (!none) {
        return {false, "missing no-downsampling rows"};
    }
    bool ok = true;
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << "|D|=208 none " << none->invalidated << " inv, "
        << none->mean_wall_ms << " ms";
    for (const std::string name : {"grid", "kmeans", "knn"}) {
        std::size_t escapes = 0;
        for (const auto& row : r.rows) {
            if (row.dataset_size == size && row.downsampler == name && row.verdict == "invalidated" &&
                !full[row.traj_id]) {
                ++escapes;
            }
        }
        const auto* a = find(r, size, name);
        const bool faster = a && a->mean_wall_ms < none->mean_wall_ms;
        ok = ok && a && escapes == 0 && faster;
        out << "; " << name << ' ' << (a ? a->invalidated : 0) << " inv, " << (a ? a->mean_wall_ms : 0.0)
            << " ms, " << escapes << " outside full set";
    }
    return {ok, out.str()};
}

// ---------------------------------------------------------------- 9

// Independent evaluation of the noise-corrected pairwise slope maximum.
double reference_estimate(const RegressorDataset& d) {
    const double eps_s = epsilon_s(d.noise, d.n_y, d.p);
    double best = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (j == k) {
                continue;
            }
            const double num = std::abs(d.pairs[j].y_next[0] - d.pairs[k].y_next[0]) - 2.0 * d.noise.eps_v[0];
            const double den = distance(d.pairs[j].s_tilde, d.pairs[k].s_tilde, d.p) + 2.0 * eps_s;
            best = std::max(best, num / den);
        }
    }
    return best;
}

Check lipschitz_estimation() {
    std::mt19937_64 rng(9);
    const RegressorDataset dense = noisy_samples([](double x) { return std::cos(x); }, 1000, 0.0,
                                                 2.0 * std::numbers::pi, 0.0, 0.0, Norm::Inf, rng);
    const double L = estimate_lipschitz(dense)[0];
    const double ref = reference_estimate(dense);

    RegressorDataset two;
    two.m = 1;
    two.n_y = 1;
    two.p = Norm::Inf;
    two.noise = {{0.0}, {0.5}};
    two.domain = {{-1.0}, {2.0}};
    two.pairs = {{{0.0}, {0.0}, 0, 0}, {{1.0}, {1.0}, 0, 1}};
    const double L0 = estimate_lipschitz(two)[0];
    const std::uint64_t n = pac_sample_size({0.1, 0.05});
    const auto expected_n = static_cast<std::uint64_t>(std::ceil(10.0 * std::log(20.0)));

    std::ostringstream out;
    out << std::setprecision(6) << "dense cos L=" << L << " (reference " << ref << "), two-point L=" << L0
        << ", pac(0.1,0.05)=" << n;
    const bool ok = L >= 0.95 && L <= 1.0 && std::abs(L - ref) <= 1e-12 && L0 == 0.0 && n == 30 && expected_n == 30;
    return {ok, out.str()};
}

}  // namespace

int main() {
    PrescreenTally tally;
    std::cout << "acceptance: 10 criteria" << std::endl;
    report(1, "envelope soundness", 1.0, envelope_soundness);
    report(2, "envelope Lipschitz bound", 5.0, envelope_lipschitz);
    report(3, "monotonicity", 10.0, monotonicity);
    report(4, "solver oracle equivalence", 60.0, solver_oracle);
    report(5, "invalidation oracle equivalence", 120.0, [&] { return invalidation_oracle(tally); });
    report(6, "end-to-end soundness", 300.0, [&] { return end_to_end_soundness(tally); });
    report(7, "trend reproduction", 1800.0, [&] { return trend(tally); });
    report(8, "downsampling soundness", 1800.0, downsampling_soundness);
    report(9, "Lipschitz estimation", 5.0, lipschitz_estimation);
    report(10, "prescreen soundness", 0.0, [&] {
        std::ostringstream out;
        out << tally.fired << " prescreen hits audited across criteria 5-8, " << tally.audit_failures
            << " not confirmed infeasible";
        return Check{tally.fired > 0 && tally.audit_failures == 0, out.str()};
    });
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}

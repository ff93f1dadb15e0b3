#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/invalidation.hpp"
#include "lipinval/lipschitz.hpp"
#include "lipinval/swarmsim.hpp"
#include "lipinval_oracles/oracles.hpp"

namespace lipinval {
namespace {

InvalidationProblem problem_1d(RegressorDataset data, double L, std::vector<double> observed) {
    InvalidationProblem prob;
    prob.abstraction = std::make_shared<const Abstraction>(std::move(data), LipschitzVector{{L}});
    for (double y : observed) {
        prob.observed.samples.push_back({y});
    }
    return prob;
}

TEST(Invalidation, TwoNormRejected) {
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}}, 0.0, 0.0, Norm::Two), 1.0, {0.0, 0.0});
    try {
        invalidate(prob);
        FAIL() << "expected InvalidInput";
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("MILP encoding requires p"), std::string::npos);
    }
}

TEST(Invalidation, DimensionMismatchRejected) {
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}}), 1.0, {0.0});
    prob.observed.samples.push_back({0.0, 1.0});
    EXPECT_THROW(invalidate(prob), InvalidInput);
}

TEST(Invalidation, NoDynamicStepsIsVacuous) {
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}}), 1.0, {5.0});
    const auto enc = encode(prob);
    EXPECT_EQ(enc.stats.envelope_rows, 0u);
    EXPECT_EQ(enc.stats.binaries, 0u);
    EXPECT_EQ(milf_feasible(enc.milf).status, SolveStatus::Feasible);
    const auto v = invalidate(prob);
    EXPECT_EQ(v.outcome, Outcome::NotInvalidated);
    EXPECT_EQ(first_dynamic_step(1), 0u);
    EXPECT_EQ(first_dynamic_step(3), 2u);
}

TEST(Invalidation, LiteralEncodingCounts) {
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}}, 0.01, 0.01), 1.0, {0.3, 0.2});
    const auto enc = encode(prob, {.tighten = false});
    EXPECT_EQ(enc.stats.envelope_rows, 2u);
    EXPECT_EQ(enc.stats.norm_vars, 1u);
    // One sign binary for the single coordinate; the selector collapses when n = 1.
    EXPECT_EQ(enc.stats.binaries, 1u);
    EXPECT_EQ(enc.layout.y_var.size(), 2u);
    EXPECT_EQ(enc.layout.w_var.size(), 1u);
    EXPECT_GT(enc.milf.big_m, 0.0);
}

TEST(Invalidation, PrescreenExample) {
    for (double eps_w : {0.0, 0.1}) {
        auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}}, eps_w, 0.0, Norm::Inf, -200.0, 200.0), 1.0, {0.0, 100.0});
        const auto hit = prescreen(prob);
        ASSERT_TRUE(hit);
        EXPECT_EQ(hit->kind, PrescreenHit::Kind::Envelope);
        EXPECT_EQ(hit->step, 0u);
        EXPECT_EQ(hit->pair, 0u);

        InvalidateOptions audit;
        audit.audit_prescreen = true;
        const auto v = invalidate(prob, audit);
        EXPECT_EQ(v.outcome, Outcome::Invalidated);
        EXPECT_EQ(v.by, DecidedBy::Prescreen);
        EXPECT_EQ(v.audit, SolveStatus::Infeasible);

        InvalidateOptions milp;
        milp.use_prescreen = false;
        const auto w = invalidate(prob, milp);
        EXPECT_EQ(w.outcome, Outcome::Invalidated);
        EXPECT_EQ(w.by, DecidedBy::Milf);
    }
}

TEST(Invalidation, EmptyBoxFiresPrescreen) {
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}}, 0.0, 0.01, Norm::Inf, -1.0, 1.0), 1.0, {0.0, 5.0});
    const auto hit = prescreen(prob);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->kind, PrescreenHit::Kind::EmptyBox);
    EXPECT_EQ(hit->step, 1u);
    InvalidateOptions milp;
    milp.use_prescreen = false;
    EXPECT_EQ(invalidate(prob, milp).outcome, Outcome::Invalidated);
}

TEST(Invalidation, SameGeneratorNotInvalidated) {
    const auto f = [](double x) { return 0.8 * std::sin(x); };
    for (Norm p : {Norm::One, Norm::Inf}) {
        const auto data = test::sampled_1d(f, 40, -2.0, 2.0, 0.02, 0.01, p, 4);
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> observed;
        double y = 0.7;
        for (int k = 0; k < 8; ++k) {
            observed.push_back(y + 0.01 * u(rng));
            y = f(y) + 0.02 * u(rng);
        }
        for (bool tighten : {true, false}) {
            // The plain big-M program is solved on fewer pairs to keep branch and bound short.
            const auto prob = problem_1d(tighten ? data : data.prefix(6), 1.0, observed);
            EXPECT_FALSE(prescreen(prob));
            InvalidateOptions opt;
            opt.encode.tighten = tighten;
            const auto v = invalidate(prob, opt);
            ASSERT_EQ(v.outcome, Outcome::NotInvalidated);
            EXPECT_LE(witness_violation(prob, v.witness), kFeasibilityTol);
            for (std::size_t k = 0; k < observed.size(); ++k) {
                EXPECT_EQ(v.witness.v[k][0], observed[k] - v.witness.y[k][0]);
                EXPECT_LE(std::abs(v.witness.v[k][0]), 0.01 + 1e-12);
            }
        }
    }
}

TEST(Invalidation, AgreesWithGridOracle) {
    std::mt19937_64 rng(321);
    int checked = 0;
    while (checked < 40) {
        const auto prob = oracle::random_tiny_invalidation(rng);
        const auto expected = oracle::invalidation_grid(prob);
        if (expected == oracle::GridVerdict::Ambiguous) {
            continue;
        }
        ++checked;
        const Outcome want =
            expected == oracle::GridVerdict::Feasible ? Outcome::NotInvalidated : Outcome::Invalidated;
        for (bool tighten : {true, false}) {
            InvalidateOptions opt;
            opt.encode.tighten = tighten;
            opt.use_prescreen = tighten;
            EXPECT_EQ(invalidate(prob, opt).outcome, want) << "tighten=" << tighten;
        }
    }
}

TEST(Invalidation, MonotoneInData) {
    std::mt19937_64 rng(55);
    for (int i = 0; i < 100; ++i) {
        const auto prob = oracle::random_tiny_invalidation(rng);
        const auto& data = prob.abstraction->data();
        if (data.size() < 2) {
            continue;
        }
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j + 1 < data.size(); ++j) {
            keep.push_back(j);
        }
        InvalidationProblem sub = prob;
        sub.abstraction = std::make_shared<const Abstraction>(data.subset(keep), prob.abstraction->lip());
        if (invalidate(sub).outcome == Outcome::Invalidated) {
            EXPECT_EQ(invalidate(prob).outcome, Outcome::Invalidated);
        }
    }
}

TEST(Invalidation, IterationLimitIsInconclusive) {
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}, {1.0, 0.5}}, 0.01, 0.01), 1.0, {0.2, 0.3, 0.1});
    InvalidateOptions opt;
    opt.use_prescreen = false;
    opt.solver.max_nodes = 0;
    EXPECT_THROW(invalidate(prob, opt), Inconclusive);
}

TEST(Invalidation, DumpLpReadsBack) {
    const auto dir = test::temp_dir("dump");
    auto prob = problem_1d(test::pairs_1d({{0.0, 0.0}, {1.0, 0.5}}, 0.01, 0.01), 1.0, {0.2, 0.3, 0.1});
    InvalidateOptions opt;
    opt.dump_lp = dir / "p.lpdump";
    const auto v = invalidate(prob, opt);
    std::ifstream in(dir / "p.lpdump");
    ASSERT_TRUE(in);
    const auto back = read_lpdump(in);
    const auto status = milf_feasible(back).status;
    EXPECT_EQ(status == SolveStatus::Infeasible, v.outcome == Outcome::Invalidated);
}

TEST(Invalidation, DownsampledVerdictImpliesFull) {
    SwarmConfig train = benchmark_swarm_config();
    const auto data = build_regressor_dataset(make_swarm_dataset(train, 4)).prefix(48);
    const auto lip = make_lipschitz_vector(estimate_lipschitz(data), 1.5);
    SwarmConfig wrong = train;
    wrong.kp = -0.5;
    wrong.seed = 77;
    const auto test_set = make_swarm_dataset(wrong, 6);
    auto abstraction = std::make_shared<const Abstraction>(data, lip);
    for (const auto& t : test_set.trajectories) {
        InvalidationProblem full;
        full.abstraction = abstraction;
        full.observed.samples = t.samples;
        full.y_bounds = test_set.domain;
        const bool full_inv = invalidate(full).outcome == Outcome::Invalidated;
        for (const Downsampler& ds : {Downsampler{GridParams{}}, Downsampler{KMeansParams{}}, Downsampler{KnnParams{8}}}) {
            InvalidationProblem sub = full;
            sub.downsampler = ds;
            if (invalidate(sub).outcome == Outcome::Invalidated) {
                EXPECT_TRUE(full_inv) << downsampler_name(ds);
            }
        }
    }
}

}  // namespace
}  // namespace lipinval

#include "lipinval_oracles/suites.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "lipinval/errors.hpp"
#include "lipinval/lipschitz.hpp"
#include "lipinval_oracles/oracles.hpp"

namespace lipinval::oracle {

namespace {

class Timer {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void fail(SuiteReport& r, std::size_t instance, const std::string& what) {
    ++r.mismatches;
    if (r.failures.size() < 20) {
        r.failures.push_back("instance " + std::to_string(instance) + ": " + what);
    }
}

}  // namespace

std::string SuiteReport::summary() const {
    std::ostringstream out;
    out << name << ": checked=" << checked << " skipped=" << skipped << " mismatches=" << mismatches;
    if (prescreen_fired > 0) {
        out << " prescreen=" << prescreen_fired << " audit_failures=" << prescreen_audit_failures;
    }
    out << " ms=" << static_cast<long long>(std::llround(wall_ms));
    return out.str();
}

SuiteReport lp_suite(std::size_t count, std::uint64_t seed) {
    SuiteReport r;
    r.name = "lp-vertex";
    Timer timer;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const LinearProgram lp = random_small_lp(rng);
        const VertexResult expected = lp_vertex_enum(lp);
        if (expected.best_violation > 1e-9 && expected.best_violation <= 1e-6) {
            ++r.skipped;
            continue;
        }
        ++r.checked;
        const SolveResult got = lp_feasible(lp);
        const bool feasible = got.status == SolveStatus::Feasible;
        if (got.status == SolveStatus::IterationLimit) {
            fail(r, i, "iteration limit");
        } else if (feasible != expected.feasible) {
            fail(r, i, "solver says " + to_string(got.status));
        } else if (feasible && !verify_witness(lp, got.witness)) {
            fail(r, i, "witness rejected");
        } else if (!feasible && (!got.certificate || !verify_certificate(lp, *got.certificate))) {
            fail(r, i, "certificate rejected");
        }
    }
    r.wall_ms = timer.ms();
    return r;
}

SuiteReport milf_suite(std::size_t count, std::uint64_t seed) {
    SuiteReport r;
    r.name = "milf-enumeration";
    Timer timer;
    std::mt19937_64 rng(seed);
    SolverOptions options;
    options.keep_leaf_certificates = true;
    for (std::size_t i = 0; i < count; ++i) {
        const MilfProblem problem = random_milf(rng);
        const SolveStatus expected = milf_enumerate(problem);
        const SolveResult got = milf_feasible(problem, options);
        ++r.checked;
        if (got.status != expected) {
            fail(r, i, "solver " + to_string(got.status) + ", enumeration " + to_string(expected));
            continue;
        }
        if (got.status == SolveStatus::Feasible && !verify_witness(problem, got.witness)) {
            fail(r, i, "witness rejected");
        }
        for (const LeafCertificate& leaf : got.leaf_certificates) {
            if (!verify_leaf(problem, leaf)) {
                fail(r, i, "leaf certificate rejected");
                break;
            }
        }
    }
    r.wall_ms = timer.ms();
    return r;
}

SuiteReport invalidation_suite(std::size_t count, std::uint64_t seed, double grid_step) {
    SuiteReport r;
    r.name = "invalidation-grid";
    Timer timer;
    std::mt19937_64 rng(seed);
    InvalidateOptions tightened;
    tightened.audit_prescreen = true;
    InvalidateOptions literal;
    literal.encode.tighten = false;
    literal.use_prescreen = false;
    std::size_t drawn = 0;
    while (r.checked < count) {
        const std::size_t i = drawn++;
        const InvalidationProblem prob = random_tiny_invalidation(rng);
        const GridVerdict expected = invalidation_grid(prob, grid_step);
        if (expected == GridVerdict::Ambiguous) {
            ++r.skipped;
            continue;
        }
        ++r.checked;
        const Outcome want = expected == GridVerdict::Feasible ? Outcome::NotInvalidated : Outcome::Invalidated;
        try {
            const Verdict a = invalidate(prob, tightened);
            const Verdict b = invalidate(prob, literal);
            if (a.outcome != want || b.outcome != want) {
                fail(r, i, "verdicts " + to_string(a.outcome) + "/" + to_string(b.outcome) + ", oracle " + to_string(want));
            }
            if (a.by == DecidedBy::Prescreen) {
                ++r.prescreen_fired;
                if (a.audit != SolveStatus::Infeasible) {
                    ++r.prescreen_audit_failures;
                    r.failures.push_back("instance " + std::to_string(i) + ": prescreen audit not infeasible");
                }
            }
        } catch (const Inconclusive& e) {
            fail(r, i, std::string("inconclusive: ") + e.what());
        }
    }
    r.wall_ms = timer.ms();
    return r;
}

SuiteReport lipschitz_suite(std::size_t count, std::uint64_t seed) {
    SuiteReport r;
    r.name = "lipschitz-brute-force";
    Timer timer;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Norm norms[] = {Norm::One, Norm::Two, Norm::Inf};
    for (std::size_t i = 0; i < count; ++i) {
        RegressorDataset data;
        data.m = 1 + rng() % 2;
        data.n_y = 1 + rng() % 2;
        data.p = norms[rng() % 3];
        data.noise.eps_w.assign(data.m, 0.01);
        data.noise.eps_v.assign(data.m, 0.0);
        for (double& e : data.noise.eps_v) {
            e = unit(rng) < 0.3 ? 0.0 : 0.05 * unit(rng);
        }
        data.domain.lower.assign(data.m, -10.0);
        data.domain.upper.assign(data.m, 10.0);
        const std::size_t pairs = 2 + rng() % 30;
        for (std::size_t j = 0; j < pairs; ++j) {
            RegressorPair pair;
            for (std::size_t d = 0; d < data.n(); ++d) {
                pair.s_tilde.push_back(4.0 * unit(rng) - 2.0);
            }
            for (std::size_t c = 0; c < data.m; ++c) {
                pair.y_next.push_back(std::sin(2.0 * pair.s_tilde[c % data.n()]) + 0.1 * unit(rng));
            }
            pair.trajectory = j;
            data.pairs.push_back(std::move(pair));
        }
        ++r.checked;
        const Vec got = estimate_lipschitz(data);
        const Vec want = brute_force_lipschitz(data);
        for (std::size_t c = 0; c < data.m; ++c) {
            if (std::abs(got[c] - want[c]) > 1e-12 * std::max(1.0, std::abs(want[c]))) {
                fail(r, i, "component " + std::to_string(c));
                break;
            }
        }
    }
    r.wall_ms = timer.ms();
    return r;
}

}  // namespace lipinval::oracle

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lipinval/errors.hpp"
#include "lipinval/feasolver.hpp"

namespace lipinval {

std::size_t MilfProblem::add_binary() {
    const std::size_t idx = lp.add_variable(0.0, 1.0);
    binary_vars.push_back(idx);
    return idx;
}

void MilfProblem::validate() const {
    lp.validate();
    for (std::size_t b : binary_vars) {
        if (b >= lp.num_vars) {
            throw InvalidInput("MilfProblem: binary index " + std::to_string(b) + " out of range");
        }
    }
}

bool verify_witness(const MilfProblem& problem, std::span<const double> x, double tol) {
    if (!verify_witness(problem.lp, x, tol)) {
        return false;
    }
    return std::ranges::all_of(problem.binary_vars, [&](std::size_t b) {
        return std::abs(x[b] - std::round(x[b])) <= kIntegralityTol;
    });
}

namespace {

VariableBounds binary_range(VariableBounds b) {
    b.lo = std::ceil(std::max(b.lo, 0.0) - kIntegralityTol);
    b.hi = std::floor(std::min(b.hi, 1.0) + kIntegralityTol);
    return b;
}

}  // namespace

LinearProgram leaf_program(const MilfProblem& problem, std::span<const std::pair<std::size_t, double>> fixings) {
    LinearProgram lp = problem.lp;
    for (std::size_t v : problem.binary_vars) {
        lp.bounds[v] = binary_range(lp.bounds[v]);
    }
    for (const auto& [v, value] : fixings) {
        lp.bounds.at(v) = {value, value};
    }
    return lp;
}

bool verify_leaf(const MilfProblem& problem, const LeafCertificate& leaf, double tol) {
    return verify_certificate(leaf_program(problem, leaf.fixings), leaf.certificate, tol);
}

namespace {

// -1 free, 0 or 1 fixed.
using Fixing = std::vector<signed char>;

struct Node {
    Fixing fixing;
};

std::vector<std::pair<std::size_t, double>> fixings_of(const MilfProblem& problem, const Fixing& fixing) {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t i = 0; i < fixing.size(); ++i) {
        if (fixing[i] >= 0) {
            out.emplace_back(problem.binary_vars[i], static_cast<double>(fixing[i]));
        }
    }
    return out;
}

}  // namespace

SolveResult milf_feasible(const MilfProblem& problem, const SolverOptions& options) {
    problem.validate();
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;

    Fixing root(problem.binary_vars.size(), -1);
    const bool empty_binary = std::ranges::any_of(problem.binary_vars, [&](std::size_t v) {
        const VariableBounds b = binary_range(problem.lp.bounds[v]);
        return b.lo > b.hi;
    });

    auto finish = [&](SolveResult r) {
        r.stats = result.stats;
        r.leaf_certificates = std::move(result.leaf_certificates);
        r.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return r;
    };

    if (empty_binary) {
        SolveResult r;
        r.status = SolveStatus::Infeasible;
        r.note = "binary with empty integer range";
        return finish(std::move(r));
    }

    auto solve = [&](const LinearProgram& lp) -> std::optional<SolveResult> {
        if (result.stats.nodes >= options.max_nodes) {
            return std::nullopt;
        }
        SolverOptions sub = options;
        sub.max_pivots = options.max_pivots > result.stats.pivots ? options.max_pivots - result.stats.pivots : 0;
        SolveResult r = lp_feasible(lp, sub);
        ++result.stats.nodes;
        result.stats.pivots += r.stats.pivots;
        return r;
    };

    std::vector<Node> stack;
    stack.push_back({root});
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();

        const LinearProgram lp = leaf_program(problem, fixings_of(problem, node.fixing));
        auto relaxed = solve(lp);
        if (!relaxed) {
            SolveResult r;
            r.note = "node limit reached";
            return finish(std::move(r));
        }
        if (relaxed->status == SolveStatus::IterationLimit) {
            return finish(std::move(*relaxed));
        }
        if (relaxed->status == SolveStatus::Infeasible) {
            if (options.keep_leaf_certificates && relaxed->certificate) {
                result.leaf_certificates.push_back({fixings_of(problem, node.fixing), *relaxed->certificate});
            }
            continue;
        }

        const Vec& x = relaxed->witness;
        // Most fractional free binary, ties to the lowest index.
        std::size_t branch = problem.binary_vars.size();
        double best_frac = -1.0;
        bool integral = true;
        for (std::size_t i = 0; i < problem.binary_vars.size(); ++i) {
            if (node.fixing[i] >= 0) {
                continue;
            }
            const double v = x[problem.binary_vars[i]];
            const double frac = std::abs(v - std::round(v));
            if (frac > kIntegralityTol) {
                integral = false;
            }
            if (frac > best_frac) {
                best_frac = frac;
                branch = i;
            }
        }

        if (branch == problem.binary_vars.size()) {
            // Every binary fixed: the relaxation is the exact subproblem.
            return finish(std::move(*relaxed));
        }
        if (integral) {
            // Snap binaries to {0,1} and re-solve so the witness is exactly integral.
            Fixing snapped = node.fixing;
            for (std::size_t i = 0; i < snapped.size(); ++i) {
                snapped[i] = static_cast<signed char>(std::lround(x[problem.binary_vars[i]]) != 0 ? 1 : 0);
            }
            auto polished = solve(leaf_program(problem, fixings_of(problem, snapped)));
            if (!polished) {
                SolveResult r;
                r.note = "node limit reached";
                return finish(std::move(r));
            }
            if (polished->status == SolveStatus::Feasible) {
                return finish(std::move(*polished));
            }
            if (polished->status == SolveStatus::IterationLimit) {
                return finish(std::move(*polished));
            }
            // Snapping lost feasibility; fall through and branch on the most fractional free binary.
        }

        const double v = x[problem.binary_vars[branch]];
        Node down{node.fixing};
        Node up{node.fixing};
        down.fixing[branch] = 0;
        up.fixing[branch] = 1;
        // Nearer child is explored first, so it goes on top.
        if (v >= 0.5) {
            stack.push_back(std::move(down));
            stack.push_back(std::move(up));
        } else {
            stack.push_back(std::move(up));
            stack.push_back(std::move(down));
        }
    }

    SolveResult r;
    r.status = SolveStatus::Infeasible;
    return finish(std::move(r));
}

}  // namespace lipinval

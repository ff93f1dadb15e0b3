#pragma once

// Brute-force reference implementations for cross-checking the library on small instances.

#include <cstddef>
#include <random>

#include "lipinval/dataset.hpp"
#include "lipinval/feasolver.hpp"
#include "lipinval/invalidation.hpp"

namespace lipinval::oracle {

struct VertexResult {
    bool feasible = false;
    /// Smallest worst-row violation over all candidate vertices (<= 0 means a feasible vertex exists).
    double best_violation = kInf;
    Vec point;
};

/// Enumerates every vertex of the box-bounded polyhedron. Needs num_vars <= 3 and finite bounds.
VertexResult lp_vertex_enum(const LinearProgram& lp);

/// Tries all 2^k binary assignments, each checked with lp_feasible.
SolveStatus milf_enumerate(const MilfProblem& problem, const SolverOptions& options = {});

enum class GridVerdict { Feasible, Infeasible, Ambiguous };

/// Decides the raw invalidation constraints for m = 1, n_y = 1 by gridding y_0..y_{T-2}
/// (step `step`) and solving for y_{T-1} and every w exactly. The answer is reported as
/// Ambiguous when it flips under a +-(1 + L) * step perturbation of the envelope width.
GridVerdict invalidation_grid(const InvalidationProblem& prob, double step = 1e-3);

/// Noise-corrected pairwise slope maximum evaluated over all ordered pairs.
Vec brute_force_lipschitz(const RegressorDataset& data);

/// Random LP on 1..3 variables with finite bounds and 1..5 halfspaces.
LinearProgram random_small_lp(std::mt19937_64& rng);

/// Random mixed-integer program with 1..6 binaries and up to 10 continuous variables.
MilfProblem random_milf(std::mt19937_64& rng);

/// Random invalidation instance with m = 1, n_y = 1, T in {2, 3}, 1..3 pairs and p in {1, inf}.
InvalidationProblem random_tiny_invalidation(std::mt19937_64& rng);

}  // namespace lipinval::oracle

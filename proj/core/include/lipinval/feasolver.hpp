#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipinval/norm.hpp"

namespace lipinval {

/// Constraint residual allowed in a feasible witness.
inline constexpr double kFeasibilityTol = 1e-7;
/// Distance from {0,1} accepted for a binary in a witness.
inline constexpr double kIntegralityTol = 1e-6;
/// Minimum contradiction margin of an infeasibility certificate.
inline constexpr double kCertificateTol = 1e-9;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, GreaterEq, Equal };

struct LinearTerm {
    std::size_t var;
    double coef;
};

struct LinearConstraint {
    std::vector<LinearTerm> terms;
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
};

struct VariableBounds {
    double lo = -kInf;
    double hi = kInf;
};

/// Feasibility-only LP: find x with lo <= x <= hi satisfying every constraint.
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<VariableBounds> bounds;
    std::vector<LinearConstraint> constraints;

    std::size_t add_variable(double lo, double hi);
    void add_constraint(std::vector<LinearTerm> terms, Relation rel, double rhs);
    /// Throws InvalidInput on out-of-range indices, lo > hi, or non-finite data.
    void validate() const;
};

/// LP plus a set of variables restricted to {0,1}.
struct MilfProblem {
    LinearProgram lp;
    std::vector<std::size_t> binary_vars;
    double big_m = 0.0;  // informational

    std::size_t add_binary();
    void validate() const;
};

enum class SolveStatus { Feasible, Infeasible, IterationLimit };

std::string to_string(SolveStatus s);

/// Row multipliers proving infeasibility of an LP.
///
/// Sign rules: multiplier >= 0 on `<=` rows, <= 0 on `>=` rows, free on `=` rows. Then
/// (sum_r mult_r a_r) x <= sum_r mult_r b_r holds for every feasible x, and the certificate
/// is valid when the left side's minimum over the variable box exceeds the right side.
struct FarkasCertificate {
    Vec multipliers;
    double margin = 0.0;  // min over box of combined row minus combined rhs, as computed by the solver
};

/// Certificate of one pruned branch-and-bound node, with the binary fixings that define its LP.
struct LeafCertificate {
    std::vector<std::pair<std::size_t, double>> fixings;  // (variable, value)
    FarkasCertificate certificate;
};

struct SolveStats {
    std::uint64_t pivots = 0;
    std::uint64_t nodes = 0;
    double wall_ms = 0.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::IterationLimit;
    Vec witness;                                        // set when Feasible
    std::optional<FarkasCertificate> certificate;       // set when an LP is Infeasible
    std::vector<LeafCertificate> leaf_certificates;     // branch-and-bound leaves, on request
    SolveStats stats;
    std::string note;                                   // reason for IterationLimit, if any
};

struct SolverOptions {
    std::uint64_t max_pivots = 1'000'000;
    std::uint64_t max_nodes = 100'000;
    bool keep_leaf_certificates = false;
    /// Consecutive degenerate pivots tolerated before switching from largest-coefficient pricing to Bland's rule.
    std::uint32_t degenerate_switch = 50;
};

/// Phase-1 bounded-variable primal simplex.
SolveResult lp_feasible(const LinearProgram& lp, const SolverOptions& options = {});

/// Depth-first branch and bound on the binaries, most-fractional branching.
SolveResult milf_feasible(const MilfProblem& problem, const SolverOptions& options = {});

/// Largest violation of any bound or constraint at x, computed directly from the problem data.
double max_violation(const LinearProgram& lp, std::span<const double> x);

bool verify_witness(const LinearProgram& lp, std::span<const double> x, double tol = kFeasibilityTol);
bool verify_witness(const MilfProblem& problem, std::span<const double> x, double tol = kFeasibilityTol);

/// Recomputes the combined row and rhs from scratch and returns the contradiction margin,
/// or -inf when the multipliers have a wrong sign or the combined row is unbounded below.
double certificate_margin(const LinearProgram& lp, const FarkasCertificate& cert);
bool verify_certificate(const LinearProgram& lp, const FarkasCertificate& cert, double tol = kCertificateTol);

/// The LP relaxation of a branch-and-bound node: binaries restricted to [0,1], fixed ones pinned.
LinearProgram leaf_program(const MilfProblem& problem, std::span<const std::pair<std::size_t, double>> fixings);
bool verify_leaf(const MilfProblem& problem, const LeafCertificate& leaf, double tol = kCertificateTol);

/// Plain-text dump: header, one `bound` line per variable, `binary` lines, then one
/// constraint per line written as `coef*xIDX ... REL rhs`.
void write_lpdump(const MilfProblem& problem, std::ostream& out);
MilfProblem read_lpdump(std::istream& in);

}  // namespace lipinval

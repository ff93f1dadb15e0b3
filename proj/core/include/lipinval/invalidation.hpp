#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipinval/abstraction.hpp"
#include "lipinval/dataset.hpp"
#include "lipinval/downsampling.hpp"
#include "lipinval/feasolver.hpp"

namespace lipinval {

/// Newly measured noisy outputs, samples[k] for k = 0..T-1.
struct ObservedTrajectory {
    std::vector<Vec> samples;

    std::size_t length() const { return samples.size(); }
};

struct InvalidationProblem {
    std::shared_ptr<const Abstraction> abstraction;
    ObservedTrajectory observed;
    /// Per-step pair selection. A prepared `selector` takes precedence over `downsampler`.
    std::optional<Downsampler> downsampler;
    std::shared_ptr<const SelectorState> selector;
    /// Box on the noise-free outputs; defaults to the abstraction's domain.
    std::optional<OutputDomain> y_bounds;

    const OutputDomain& bounds() const;
    /// Throws InvalidInput on missing abstraction, dimension mismatch, or p = 2.
    void validate() const;
};

/// First dynamic step: s_k needs y_{k-n_y+1}, ..., y_k and the step constrains y_{k+1}.
std::size_t first_dynamic_step(std::size_t n_y);

/// Active pair indices for each dynamic step k = n_y-1 .. T-2 (all pairs without downsampling).
std::vector<std::vector<std::size_t>> active_pairs(const InvalidationProblem& prob);

/// Noise-free output box at each time: [y~ - eps_v, y~ + eps_v] intersected with the bounds.
/// Entries may be empty (lower > upper).
struct TimeBoxes {
    std::vector<Vec> lower;
    std::vector<Vec> upper;

    bool empty_at(std::size_t k) const;
};
TimeBoxes time_boxes(const InvalidationProblem& prob);

struct EncodeOptions {
    /// Use interval reasoning on the boxes to drop redundant rows, fix known signs and skip
    /// binaries where the norm is affine. The projected feasible set is unchanged.
    bool tighten = true;
};

struct EncodingLayout {
    std::size_t T = 0;
    std::size_t m = 0;
    std::size_t first_step = 0;
    std::vector<std::size_t> y_var;  // y_var[k * m + i]
    std::vector<std::size_t> w_var;  // w_var[(k - first_step) * m + i]
};

struct EncodingStats {
    std::size_t variables = 0;
    std::size_t constraints = 0;
    std::size_t binaries = 0;
    std::size_t envelope_rows = 0;
    std::size_t norm_vars = 0;  // nu variables created
    std::vector<std::size_t> active_pairs;  // per dynamic step
};

struct Encoding {
    MilfProblem milf;
    EncodingLayout layout;
    EncodingStats stats;
};

/// Builds the mixed-integer feasibility program; infeasible iff the trajectory is invalidated
/// (for the active pair sets).
Encoding encode(const InvalidationProblem& prob, const EncodeOptions& options = {});

struct PrescreenHit {
    enum class Kind { EmptyBox, Envelope };
    Kind kind = Kind::Envelope;
    std::size_t step = 0;       // time k of the empty box, or dynamic step k
    std::size_t pair = 0;       // data pair index (Envelope only)
    std::size_t component = 0;  // output component
};

/// Interval test of single envelope conjuncts; a hit proves infeasibility.
std::optional<PrescreenHit> prescreen(const InvalidationProblem& prob);

struct Witness {
    std::vector<Vec> y;  // k = 0..T-1
    std::vector<Vec> w;  // k = 0..T-2, zero outside the dynamic range
    std::vector<Vec> v;  // y~ - y
};

/// Largest violation of the raw constraints (noise boxes, bounds, envelope rows with exact
/// norms) by a candidate witness, using the active pair sets of `prob`.
double witness_violation(const InvalidationProblem& prob, const Witness& witness);

enum class Outcome { Invalidated, NotInvalidated };
enum class DecidedBy { Prescreen, Milf, Vacuous };

std::string to_string(Outcome o);
std::string to_string(DecidedBy d);

struct VerdictStats {
    std::size_t constraints = 0;
    std::size_t binaries = 0;
    std::size_t variables = 0;
    std::vector<std::size_t> active_pairs;
    SolveStats solver;
    double wall_ms = 0.0;  // prescreen + encode + solve, excluding any audit
};

struct Verdict {
    Outcome outcome = Outcome::NotInvalidated;
    DecidedBy by = DecidedBy::Milf;
    std::optional<PrescreenHit> hit;
    Witness witness;  // NotInvalidated only
    VerdictStats stats;
    /// Solver status of the program when the prescreen fired and auditing was requested.
    std::optional<SolveStatus> audit;
};

struct InvalidateOptions {
    EncodeOptions encode;
    SolverOptions solver;
    bool use_prescreen = true;
    bool audit_prescreen = false;
    std::optional<std::filesystem::path> dump_lp;
};

/// Throws Inconclusive when the solver stops on a limit or the witness fails re-verification.
Verdict invalidate(const InvalidationProblem& prob, const InvalidateOptions& options = {});

}  // namespace lipinval

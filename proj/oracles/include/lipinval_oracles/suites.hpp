#pragma once

// Randomized cross-checks of the library against the brute-force oracles.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lipinval::oracle {

struct SuiteReport {
    std::string name;
    std::size_t checked = 0;
    std::size_t skipped = 0;     // instances too close to the decision boundary for the oracle
    std::size_t mismatches = 0;
    std::size_t prescreen_fired = 0;
    std::size_t prescreen_audit_failures = 0;
    double wall_ms = 0.0;
    std::vector<std::string> failures;

    bool passed() const { return mismatches == 0 && prescreen_audit_failures == 0 && checked > 0; }
    std::string summary() const;
};

/// lp_feasible against vertex enumeration; witnesses and certificates re-verified.
SuiteReport lp_suite(std::size_t count, std::uint64_t seed);

/// milf_feasible against exhaustive enumeration; witnesses and every leaf certificate re-verified.
SuiteReport milf_suite(std::size_t count, std::uint64_t seed);

/// invalidate (both encodings) against the dense-grid oracle. Ambiguous draws are replaced
/// until `count` instances have been checked. Prescreen hits are audited through the program.
SuiteReport invalidation_suite(std::size_t count, std::uint64_t seed, double grid_step = 1e-3);

/// estimate_lipschitz against the all-pairs formula on random small datasets.
SuiteReport lipschitz_suite(std::size_t count, std::uint64_t seed);

}  // namespace lipinval::oracle

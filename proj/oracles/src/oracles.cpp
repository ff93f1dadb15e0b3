#include "lipinval_oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "lipinval/abstraction.hpp"
#include "lipinval/errors.hpp"

namespace lipinval::oracle {

namespace {

struct Plane {
    Vec a;
    double b;
};

// Gaussian elimination with partial pivoting; false when (near) singular.
bool solve_square(std::vector<Vec> a, Vec b, Vec& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
                piv = r;
            }
        }
        if (std::abs(a[piv][c]) < 1e-10) {
            return false;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[i] / a[i][i];
    }
    return true;
}

std::vector<double> grid_points(double lo, double hi, double step) {
    std::vector<double> pts;
    for (std::size_t i = 0;; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        if (v >= hi) {
            break;
        }
        pts.push_back(v);
    }
    pts.push_back(hi);
    return pts;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

VertexResult lp_vertex_enum(const LinearProgram& lp) {
    lp.validate();
    const std::size_t n = lp.num_vars;
    if (n > 3) {
        throw InvalidInput("vertex oracle supports at most 3 variables");
    }
    std::vector<Plane> planes;
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(lp.bounds[j].lo) || !std::isfinite(lp.bounds[j].hi)) {
            throw InvalidInput("vertex oracle needs finite bounds");
        }
        Vec e(n, 0.0);
        e[j] = 1.0;
        planes.push_back({e, lp.bounds[j].lo});
        planes.push_back({e, lp.bounds[j].hi});
    }
    for (const auto& c : lp.constraints) {
        Vec a(n, 0.0);
        for (const auto& t : c.terms) {
            a[t.var] += t.coef;
        }
        planes.push_back({a, c.rhs});
    }

    VertexResult best;
    auto consider = [&](const Vec& x) {
        const double v = max_violation(lp, x);
        if (v < best.best_violation) {
            best.best_violation = v;
            best.point = x;
        }
    };
    if (n == 0) {
        consider({});
    } else {
        // Every choice of n planes; indices strictly increasing.
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = i;
        }
        const std::size_t count = planes.size();
        while (true) {
            std::vector<Vec> a;
            Vec b;
            for (std::size_t i : idx) {
                a.push_back(planes[i].a);
                b.push_back(planes[i].b);
            }
            Vec x;
            if (solve_square(a, b, x)) {
                consider(x);
            }
            std::size_t pos = n;
            while (pos > 0 && idx[pos - 1] == count - n + pos - 1) {
                --pos;
            }
            if (pos == 0) {
                break;
            }
            ++idx[pos - 1];
            for (std::size_t i = pos; i < n; ++i) {
                idx[i] = idx[i - 1] + 1;
            }
        }
    }
    best.feasible = best.best_violation <= 1e-9;
    return best;
}

SolveStatus milf_enumerate(const MilfProblem& problem, const SolverOptions& options) {
    problem.validate();
    const std::size_t k = problem.binary_vars.size();
    if (k > 20) {
        throw InvalidInput("enumeration oracle supports at most 20 binaries");
    }
    bool limit = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        LinearProgram lp = problem.lp;
        bool possible = true;
        for (std::size_t b = 0; b < k; ++b) {
            const double v = (mask >> b) & 1U ? 1.0 : 0.0;
            auto& bounds = lp.bounds[problem.binary_vars[b]];
            if (v < bounds.lo || v > bounds.hi) {
                possible = false;
                break;
            }
            bounds = {v, v};
        }
        if (!possible) {
            continue;
        }
        const SolveResult r = lp_feasible(lp, options);
        if (r.status == SolveStatus::Feasible) {
            return SolveStatus::Feasible;
        }
        limit = limit || r.status == SolveStatus::IterationLimit;
    }
    return limit ? SolveStatus::IterationLimit : SolveStatus::Infeasible;
}

GridVerdict invalidation_grid(const InvalidationProblem& prob, double step) {
    prob.validate();
    const Abstraction& a = *prob.abstraction;
    if (a.m() != 1 || a.data().n_y != 1) {
        throw InvalidInput("grid oracle supports m = 1, n_y = 1 only");
    }
    const TimeBoxes boxes = time_boxes(prob);
    const std::size_t T = prob.observed.length();
    for (std::size_t k = 0; k < T; ++k) {
        if (boxes.lower[k][0] > boxes.upper[k][0]) {
            return GridVerdict::Infeasible;
        }
    }
    if (T < 2) {
        return GridVerdict::Feasible;
    }
    if (T > 3) {
        throw InvalidInput("grid oracle supports T <= 3");
    }
    const auto active = active_pairs(prob);
    const auto& pairs = a.data().pairs;
    const double L = a.lip().values[0];
    const double et = a.eps_t()[0];
    const double ew = a.data().noise.eps_w[0];

    // Admissible interval for y_{k+1} given y_k, with the envelope widened by `slack`.
    auto next_range = [&](std::size_t step_index, double yk, double slack) {
        double lo = -kInf;
        double hi = kInf;
        for (std::size_t j : active[step_index]) {
            const double width = L * std::abs(yk - pairs[j].s_tilde[0]) + et + slack;
            lo = std::max(lo, pairs[j].y_next[0] - width);
            hi = std::min(hi, pairs[j].y_next[0] + width);
        }
        if (lo > hi) {
            return std::pair{kInf, -kInf};
        }
        return std::pair{lo - ew, hi + ew};
    };
    auto feasible = [&](double slack) {
        for (double y0 : grid_points(boxes.lower[0][0], boxes.upper[0][0], step)) {
            auto [lo1, hi1] = next_range(0, y0, slack);
            lo1 = std::max(lo1, boxes.lower[1][0]);
            hi1 = std::min(hi1, boxes.upper[1][0]);
            if (lo1 > hi1) {
                continue;
            }
            if (T == 2) {
                return true;
            }
            for (double y1 : grid_points(boxes.lower[1][0], boxes.upper[1][0], step)) {
                if (y1 < lo1 || y1 > hi1) {
                    continue;
                }
                auto [lo2, hi2] = next_range(1, y1, slack);
                if (std::max(lo2, boxes.lower[2][0]) <= std::min(hi2, boxes.upper[2][0])) {
                    return true;
                }
            }
        }
        return false;
    };
    const double eta = (1.0 + L) * step;
    if (feasible(-eta)) {
        return GridVerdict::Feasible;
    }
    if (!feasible(eta)) {
        return GridVerdict::Infeasible;
    }
    return GridVerdict::Ambiguous;
}

Vec brute_force_lipschitz(const RegressorDataset& data) {
    const double es = epsilon_s(data.noise, data.n_y, data.p);
    Vec out(data.m, 0.0);
    for (std::size_t j = 0; j < data.size(); ++j) {
        for (std::size_t k = 0; k < data.size(); ++k) {
            if (j == k) {
                continue;
            }
            const double den = distance(data.pairs[j].s_tilde, data.pairs[k].s_tilde, data.p) + 2.0 * es;
            for (std::size_t i = 0; i < data.m; ++i) {
                const double num =
                    std::abs(data.pairs[j].y_next[i] - data.pairs[k].y_next[i]) - 2.0 * data.noise.eps_v[i];
                if (den == 0.0) {
                    if (num > 0.0) {
                        out[i] = kInf;
                    }
                    continue;
                }
                out[i] = std::max(out[i], num / den);
            }
        }
    }
    return out;
}

LinearProgram random_small_lp(std::mt19937_64& rng) {
    LinearProgram lp;
    const std::size_t n = uniform_int(rng, 1, 3);
    Vec anchor(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = uniform(rng, -5.0, 0.0);
        lp.add_variable(lo, lo + uniform(rng, 0.5, 5.0));
        anchor[j] = uniform(rng, lo - 1.0, lo + 6.0);
    }
    const std::size_t rows = uniform_int(rng, 1, 5);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<LinearTerm> terms;
        double at_anchor = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (uniform(rng, 0.0, 1.0) < 0.2) {
                continue;
            }
            const double c = std::round(uniform(rng, -2.0, 2.0) * 100.0) / 100.0;
            terms.push_back({j, c});
            at_anchor += c * anchor[j];
        }
        const double pick = uniform(rng, 0.0, 1.0);
        const Relation rel = pick < 0.45 ? Relation::LessEq : pick < 0.9 ? Relation::GreaterEq : Relation::Equal;
        const double offset = rel == Relation::Equal ? 0.0 : uniform(rng, -1.5, 1.5);
        const double rhs = rel == Relation::GreaterEq ? at_anchor - offset : at_anchor + offset;
        lp.add_constraint(std::move(terms), rel, rhs);
    }
    return lp;
}

MilfProblem random_milf(std::mt19937_64& rng) {
    MilfProblem p;
    const std::size_t nc = uniform_int(rng, 1, 10);
    const std::size_t nb = uniform_int(rng, 1, 6);
    Vec anchor;
    for (std::size_t j = 0; j < nc; ++j) {
        const double lo = uniform(rng, -4.0, 0.0);
        const double hi = lo + uniform(rng, 0.5, 6.0);
        const bool free_above = uniform(rng, 0.0, 1.0) < 0.15;
        p.lp.add_variable(lo, free_above ? kInf : hi);
        anchor.push_back(uniform(rng, lo, hi));
    }
    for (std::size_t b = 0; b < nb; ++b) {
        p.add_binary();
        anchor.push_back(uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0);
    }
    p.big_m = 10.0;
    const std::size_t n = nc + nb;
    const std::size_t rows = uniform_int(rng, 2, 8);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<LinearTerm> terms;
        double at_anchor = 0.0;
        if (uniform(rng, 0.0, 1.0) < 0.3) {
            // Big-M style switch: x_c <= lo_c + M * b  or  x_c >= hi_c - M * (1 - b)
            const std::size_t c = uniform_int(rng, 0, nc - 1);
            const std::size_t b = nc + uniform_int(rng, 0, nb - 1);
            const double cut = uniform(rng, p.lp.bounds[c].lo, p.lp.bounds[c].lo + 2.0);
            if (uniform(rng, 0.0, 1.0) < 0.5) {
                p.lp.add_constraint({{c, 1.0}, {b, -p.big_m}}, Relation::LessEq, cut);
            } else {
                p.lp.add_constraint({{c, 1.0}, {b, -p.big_m}}, Relation::GreaterEq, cut - p.big_m);
            }
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (uniform(rng, 0.0, 1.0) < 0.5) {
                continue;
            }
            const double c = std::round(uniform(rng, -3.0, 3.0) * 100.0) / 100.0;
            terms.push_back({j, c});
            at_anchor += c * anchor[j];
        }
        const double pick = uniform(rng, 0.0, 1.0);
        const Relation rel = pick < 0.45 ? Relation::LessEq : pick < 0.9 ? Relation::GreaterEq : Relation::Equal;
        const double offset = rel == Relation::Equal ? 0.0 : uniform(rng, -2.0, 1.0);
        const double rhs = rel == Relation::GreaterEq ? at_anchor - offset : at_anchor + offset;
        p.lp.add_constraint(std::move(terms), rel, rhs);
    }
    return p;
}

InvalidationProblem random_tiny_invalidation(std::mt19937_64& rng) {
    const Norm p = uniform(rng, 0.0, 1.0) < 0.5 ? Norm::One : Norm::Inf;
    const double L = uniform(rng, 0.5, 2.0);
    const double eps_w = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.0, 0.05);
    const double eps_v = uniform(rng, 0.01, 0.08);
    const double amp = uniform(rng, 0.2, 0.5) * L;
    const double phase = uniform(rng, 0.0, 6.0);
    auto f = [&](double s) { return amp * std::sin(s + phase); };

    RegressorDataset data;
    data.m = 1;
    data.n_y = 1;
    data.p = p;
    data.noise.eps_w = {eps_w};
    data.noise.eps_v = {eps_v};
    data.domain.lower = {-2.0};
    data.domain.upper = {3.0};
    const std::size_t num_pairs = uniform_int(rng, 1, 3);
    for (std::size_t j = 0; j < num_pairs; ++j) {
        const double s = uniform(rng, 0.0, 1.0);
        RegressorPair pair;
        pair.s_tilde = {s + uniform(rng, -eps_v, eps_v)};
        pair.y_next = {f(s) + uniform(rng, -eps_w, eps_w) + uniform(rng, -eps_v, eps_v)};
        pair.trajectory = j;
        pair.time = 0;
        data.pairs.push_back(pair);
    }

    InvalidationProblem prob;
    prob.abstraction = std::make_shared<const Abstraction>(std::move(data), LipschitzVector{{L}});
    const std::size_t T = uniform_int(rng, 2, 3);
    const double mode = uniform(rng, 0.0, 1.0);
    const double spread = mode < 0.1 ? 3.0 : uniform(rng, 0.0, 0.2);
    double y = uniform(rng, 0.0, 1.0);
    for (std::size_t k = 0; k < T; ++k) {
        prob.observed.samples.push_back({y + uniform(rng, -eps_v, eps_v)});
        if (mode > 0.5) {
            // Land near the envelope edge, where the answer depends on how the boxes couple.
            const Vec s{prob.observed.samples.back()[0]};
            const double edge = uniform(rng, 0.0, 1.0) < 0.5 ? prob.abstraction->upper(s)[0] : prob.abstraction->lower(s)[0];
            y = edge + uniform(rng, -1.0, 1.0) * (L + 1.0) * eps_v;
        } else {
            y = f(y) + uniform(rng, -spread, spread);
        }
        y = std::clamp(y, -1.9, 2.9);
    }
    return prob;
}

}  // namespace lipinval::oracle

// Phase-1 bounded-variable primal simplex on a dense tableau.
//
// Each row r of the LP becomes  a_r x + s_r (+ sign_r * art_r) = b_r  with slack bounds
//   <= : s_r in [0, inf)    >= : s_r in (-inf, 0]    = : s_r in [0, 0]
// An artificial column is only created for rows whose slack cannot absorb the initial
// residual. Phase 1 minimises the sum of artificials; a zero optimum yields a witness, a
// positive one yields Farkas multipliers read off the slack reduced costs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "lipinval/errors.hpp"
#include "lipinval/feasolver.hpp"

namespace lipinval {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr double kPrimalTol = 1e-9;
constexpr double kPhaseOneZero = 1e-9;

double initial_value(double lo, double hi) {
    if (std::isfinite(lo)) {
        return lo;
    }
    if (std::isfinite(hi)) {
        return hi;
    }
    return 0.0;
}

// Dense LU with partial pivoting, used to recompute basic values and duals from the original data.
class DenseLu {
public:
    explicit DenseLu(std::vector<double> a, std::size_t n) : lu_(std::move(a)), n_(n), perm_(n) {
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t piv = k;
            double best = std::abs(at(k, k));
            for (std::size_t r = k + 1; r < n_; ++r) {
                if (std::abs(at(r, k)) > best) {
                    best = std::abs(at(r, k));
                    piv = r;
                }
            }
            if (best < 1e-14) {
                singular_ = true;
                return;
            }
            if (piv != k) {
                for (std::size_t c = 0; c < n_; ++c) {
                    std::swap(at(k, c), at(piv, c));
                }
                std::swap(perm_[k], perm_[piv]);
            }
            const double inv = 1.0 / at(k, k);
            for (std::size_t r = k + 1; r < n_; ++r) {
                const double f = at(r, k) * inv;
                if (f == 0.0) {
                    continue;
                }
                at(r, k) = f;
                for (std::size_t c = k + 1; c < n_; ++c) {
                    at(r, c) -= f * at(k, c);
                }
            }
        }
    }

    bool singular() const { return singular_; }

    // Solves B x = rhs.
    Vec solve(const Vec& rhs) const {
        Vec x(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            x[i] = rhs[perm_[i]];
        }
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t c = 0; c < i; ++c) {
                x[i] -= at(i, c) * x[c];
            }
        }
        for (std::size_t i = n_; i-- > 0;) {
            for (std::size_t c = i + 1; c < n_; ++c) {
                x[i] -= at(i, c) * x[c];
            }
            x[i] /= at(i, i);
        }
        return x;
    }

    // Solves B^T y = rhs.
    Vec solve_transposed(const Vec& rhs) const {
        // B = P^T L U  =>  B^T = U^T L^T P
        Vec z = rhs;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t c = 0; c < i; ++c) {
                z[i] -= at(c, i) * z[c];
            }
            z[i] /= at(i, i);
        }
        for (std::size_t i = n_; i-- > 0;) {
            for (std::size_t c = i + 1; c < n_; ++c) {
                z[i] -= at(c, i) * z[c];
            }
        }
        Vec y(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            y[perm_[i]] = z[i];
        }
        return y;
    }

private:
    double& at(std::size_t r, std::size_t c) { return lu_[r * n_ + c]; }
    double at(std::size_t r, std::size_t c) const { return lu_[r * n_ + c]; }

    std::vector<double> lu_;
    std::size_t n_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
};

class PhaseOneSimplex {
public:
    PhaseOneSimplex(const LinearProgram& lp, const SolverOptions& options) : lp_(lp), options_(options) {
        setup();
    }

    SolveResult run() {
        SolveResult result;
        std::uint32_t degenerate_streak = 0;
        while (true) {
            if (basic_art_count_ == 0 || phase_one_value() <= kPhaseOneZero) {
                break;
            }
            const bool bland = degenerate_streak >= options_.degenerate_switch;
            const auto [enter, dir] = price(bland);
            if (enter == kNone) {
                break;
            }
            if (pivots_ >= options_.max_pivots) {
                result.status = SolveStatus::IterationLimit;
                result.note = "pivot limit reached";
                result.stats.pivots = pivots_;
                return result;
            }
            const double step = iterate(enter, dir, bland);
            ++pivots_;
            degenerate_streak = step <= 1e-12 ? degenerate_streak + 1 : 0;
        }
        result = conclude();
        result.stats.pivots = pivots_;
        return result;
    }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    double& tab(std::size_t r, std::size_t c) { return t_[r * ncols_ + c]; }
    double tab(std::size_t r, std::size_t c) const { return t_[r * ncols_ + c]; }

    void setup() {
        m_ = lp_.constraints.size();
        n_ = lp_.num_vars;

        lo_.assign(n_ + m_, 0.0);
        hi_.assign(n_ + m_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = lp_.bounds[j].lo;
            hi_[j] = lp_.bounds[j].hi;
        }
        for (std::size_t r = 0; r < m_; ++r) {
            switch (lp_.constraints[r].rel) {
                case Relation::LessEq:
                    lo_[n_ + r] = 0.0;
                    hi_[n_ + r] = kInf;
                    break;
                case Relation::GreaterEq:
                    lo_[n_ + r] = -kInf;
                    hi_[n_ + r] = 0.0;
                    break;
                case Relation::Equal:
                    lo_[n_ + r] = 0.0;
                    hi_[n_ + r] = 0.0;
                    break;
            }
        }

        x_.assign(n_ + m_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            x_[j] = initial_value(lo_[j], hi_[j]);
        }

        // Residuals decide which rows need an artificial.
        Vec residual(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            double ax = 0.0;
            for (const auto& term : lp_.constraints[r].terms) {
                ax += term.coef * x_[term.var];
            }
            residual[r] = lp_.constraints[r].rhs - ax;
        }
        std::vector<std::size_t> art_rows;
        for (std::size_t r = 0; r < m_; ++r) {
            const double res = residual[r];
            if (res < lo_[n_ + r] || res > hi_[n_ + r]) {
                art_rows.push_back(r);
            }
        }
        num_art_ = art_rows.size();
        ncols_ = n_ + m_ + num_art_;
        lo_.resize(ncols_, 0.0);
        hi_.resize(ncols_, kInf);
        x_.resize(ncols_, 0.0);
        art_row_.assign(num_art_, 0);
        art_sign_.assign(num_art_, 1.0);

        t_.assign(m_ * ncols_, 0.0);
        basis_.assign(m_, kNone);
        pos_.assign(ncols_, kNone);

        std::vector<std::size_t> row_art(m_, kNone);
        for (std::size_t a = 0; a < num_art_; ++a) {
            row_art[art_rows[a]] = a;
        }
        for (std::size_t r = 0; r < m_; ++r) {
            const std::size_t slack = n_ + r;
            double row_scale = 1.0;
            if (row_art[r] == kNone) {
                basis_[r] = slack;
                x_[slack] = residual[r];
            } else {
                const std::size_t a = row_art[r];
                const double bound = std::clamp(residual[r], lo_[slack], hi_[slack]);
                x_[slack] = bound;
                const double gap = residual[r] - bound;
                art_row_[a] = r;
                art_sign_[a] = gap > 0.0 ? 1.0 : -1.0;
                const std::size_t col = n_ + m_ + a;
                basis_[r] = col;
                x_[col] = std::abs(gap);
                row_scale = art_sign_[a];
                tab(r, col) = 1.0;
            }
            for (const auto& term : lp_.constraints[r].terms) {
                tab(r, term.var) += row_scale * term.coef;
            }
            tab(r, slack) = row_scale;
            pos_[basis_[r]] = r;
        }

        basic_art_count_ = num_art_;
        d_.assign(ncols_, 0.0);
        for (std::size_t a = 0; a < num_art_; ++a) {
            d_[n_ + m_ + a] = 1.0;
        }
        for (std::size_t r = 0; r < m_; ++r) {
            if (is_art(basis_[r])) {
                for (std::size_t c = 0; c < ncols_; ++c) {
                    d_[c] -= tab(r, c);
                }
            }
        }
    }

    bool is_art(std::size_t col) const { return col >= n_ + m_; }

    double phase_one_value() const {
        double sum = 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
            if (is_art(basis_[r])) {
                sum += x_[basis_[r]];
            }
        }
        return sum;
    }

    std::pair<std::size_t, int> price(bool bland) const {
        std::size_t best = kNone;
        int best_dir = 0;
        double best_score = 0.0;
        for (std::size_t j = 0; j < ncols_; ++j) {
            if (pos_[j] != kNone || lo_[j] == hi_[j]) {
                continue;
            }
            const double dj = d_[j];
            int dir = 0;
            if (dj < -kReducedCostTol && x_[j] < hi_[j]) {
                dir = 1;
            } else if (dj > kReducedCostTol && x_[j] > lo_[j]) {
                dir = -1;
            }
            if (dir == 0) {
                continue;
            }
            if (bland) {
                return {j, dir};
            }
            const double score = std::abs(dj);
            if (score > best_score) {
                best_score = score;
                best = j;
                best_dir = dir;
            }
        }
        return {best, best_dir};
    }

    // Moves nonbasic `enter` in direction `dir`; returns the step length.
    double iterate(std::size_t enter, int dir, bool bland) {
        const double sgn = static_cast<double>(dir);
        double theta = kInf;
        std::size_t leave_row = kNone;

        if (bland) {
            for (std::size_t r = 0; r < m_; ++r) {
                const double alpha = sgn * tab(r, enter);
                const double limit = row_limit(r, alpha, 0.0);
                if (limit < theta || (limit == theta && leave_row != kNone && basis_[r] < basis_[leave_row])) {
                    theta = limit;
                    leave_row = r;
                }
            }
        } else {
            // Harris two-pass: relaxed bound first, then the largest pivot among rows within it.
            double relaxed = kInf;
            for (std::size_t r = 0; r < m_; ++r) {
                const double alpha = sgn * tab(r, enter);
                relaxed = std::min(relaxed, row_limit(r, alpha, kPrimalTol));
            }
            double best_alpha = 0.0;
            for (std::size_t r = 0; r < m_; ++r) {
                const double alpha = sgn * tab(r, enter);
                const double limit = row_limit(r, alpha, 0.0);
                if (limit <= relaxed && std::abs(alpha) > best_alpha) {
                    best_alpha = std::abs(alpha);
                    leave_row = r;
                    theta = limit;
                }
            }
        }

        const double flip = hi_[enter] - lo_[enter];
        if (flip <= theta) {
            theta = flip;
            leave_row = kNone;
        }
        if (!std::isfinite(theta)) {
            // Phase 1 is bounded below by zero, so this cannot happen with exact arithmetic.
            throw Inconclusive("simplex: unbounded phase-1 ray");
        }
        theta = std::max(theta, 0.0);

        for (std::size_t r = 0; r < m_; ++r) {
            const double coef = tab(r, enter);
            if (coef != 0.0) {
                x_[basis_[r]] -= sgn * theta * coef;
            }
        }
        x_[enter] += sgn * theta;

        if (leave_row == kNone) {
            x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
            return theta;
        }

        const std::size_t leave = basis_[leave_row];
        const double alpha = sgn * tab(leave_row, enter);
        x_[leave] = alpha > 0.0 ? lo_[leave] : hi_[leave];
        if (is_art(leave)) {
            // An artificial that leaves never comes back.
            hi_[leave] = 0.0;
            x_[leave] = 0.0;
            --basic_art_count_;
        }
        pivot(leave_row, enter);
        return theta;
    }

    // Step length allowed by row r's basic variable when its coefficient (times direction) is alpha.
    double row_limit(std::size_t r, double alpha, double slack) const {
        const std::size_t b = basis_[r];
        if (alpha > kPivotTol) {
            if (!std::isfinite(lo_[b])) {
                return kInf;
            }
            return std::max(0.0, (x_[b] - lo_[b] + slack) / alpha);
        }
        if (alpha < -kPivotTol) {
            if (!std::isfinite(hi_[b])) {
                return kInf;
            }
            return std::max(0.0, (hi_[b] - x_[b] + slack) / -alpha);
        }
        return kInf;
    }

    void pivot(std::size_t row, std::size_t enter) {
        double* prow = &t_[row * ncols_];
        const double inv = 1.0 / prow[enter];
        for (std::size_t c = 0; c < ncols_; ++c) {
            prow[c] *= inv;
        }
        prow[enter] = 1.0;
        for (std::size_t r = 0; r < m_; ++r) {
            if (r == row) {
                continue;
            }
            double* trow = &t_[r * ncols_];
            const double f = trow[enter];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < ncols_; ++c) {
                trow[c] -= f * prow[c];
            }
            trow[enter] = 0.0;
        }
        const double fd = d_[enter];
        if (fd != 0.0) {
            for (std::size_t c = 0; c < ncols_; ++c) {
                d_[c] -= fd * prow[c];
            }
            d_[enter] = 0.0;
        }
        pos_[basis_[row]] = kNone;
        basis_[row] = enter;
        pos_[enter] = row;
    }

    Vec structural_witness() const {
        Vec w(x_.begin(), x_.begin() + static_cast<long>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            w[j] = std::clamp(w[j], lo_[j], hi_[j]);
        }
        return w;
    }

    FarkasCertificate certificate_from_duals(const Vec& lambda) const {
        FarkasCertificate cert;
        cert.multipliers = lambda;
        for (std::size_t r = 0; r < m_; ++r) {
            const auto rel = lp_.constraints[r].rel;
            if ((rel == Relation::LessEq && cert.multipliers[r] < 0.0) ||
                (rel == Relation::GreaterEq && cert.multipliers[r] > 0.0)) {
                cert.multipliers[r] = 0.0;
            }
        }
        cert.margin = certificate_margin(lp_, cert);
        return cert;
    }

    // Original-data column of the computational form.
    void add_column(std::size_t col, std::vector<double>& dense_basis, std::size_t slot) const {
        if (col < n_) {
            for (std::size_t r = 0; r < m_; ++r) {
                for (const auto& term : lp_.constraints[r].terms) {
                    if (term.var == col) {
                        dense_basis[r * m_ + slot] += term.coef;
                    }
                }
            }
        } else if (col < n_ + m_) {
            dense_basis[(col - n_) * m_ + slot] = 1.0;
        } else {
            const std::size_t a = col - n_ - m_;
            dense_basis[art_row_[a] * m_ + slot] = art_sign_[a];
        }
    }

    // Recomputes basic values and phase-1 duals from the original data with a fresh factorisation.
    bool refactor(Vec& duals) {
        std::vector<double> dense(m_ * m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            add_column(basis_[r], dense, r);
        }
        const DenseLu lu(std::move(dense), m_);
        if (lu.singular()) {
            return false;
        }
        Vec rhs(m_);
        for (std::size_t r = 0; r < m_; ++r) {
            rhs[r] = lp_.constraints[r].rhs;
        }
        for (std::size_t c = 0; c < ncols_; ++c) {
            if (pos_[c] != kNone || x_[c] == 0.0) {
                continue;
            }
            if (c < n_) {
                continue;  // handled row-wise below
            }
            if (c < n_ + m_) {
                rhs[c - n_] -= x_[c];
            } else {
                const std::size_t a = c - n_ - m_;
                rhs[art_row_[a]] -= art_sign_[a] * x_[c];
            }
        }
        for (std::size_t r = 0; r < m_; ++r) {
            for (const auto& term : lp_.constraints[r].terms) {
                if (pos_[term.var] == kNone) {
                    rhs[r] -= term.coef * x_[term.var];
                }
            }
        }
        const Vec xb = lu.solve(rhs);
        for (std::size_t r = 0; r < m_; ++r) {
            x_[basis_[r]] = xb[r];
        }
        Vec cb(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            cb[r] = is_art(basis_[r]) ? 1.0 : 0.0;
        }
        const Vec y = lu.solve_transposed(cb);
        duals.assign(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            duals[r] = -y[r];
        }
        return true;
    }

    SolveResult conclude() {
        SolveResult result;
        for (int attempt = 0; attempt < 2; ++attempt) {
            Vec lambda(m_);
            if (attempt == 0) {
                for (std::size_t r = 0; r < m_; ++r) {
                    lambda[r] = d_[n_ + r];
                }
            } else if (!refactor(lambda)) {
                break;
            }

            if (phase_one_value() <= kPhaseOneZero) {
                Vec w = structural_witness();
                if (max_violation(lp_, w) <= kFeasibilityTol) {
                    result.status = SolveStatus::Feasible;
                    result.witness = std::move(w);
                    return result;
                }
                continue;
            }
            FarkasCertificate cert = certificate_from_duals(lambda);
            if (cert.margin > kCertificateTol) {
                result.status = SolveStatus::Infeasible;
                result.certificate = std::move(cert);
                return result;
            }
            Vec w = structural_witness();
            if (max_violation(lp_, w) <= kFeasibilityTol) {
                result.status = SolveStatus::Feasible;
                result.witness = std::move(w);
                return result;
            }
        }
        result.status = SolveStatus::IterationLimit;
        result.note = "numerical trouble: neither witness nor certificate verified";
        return result;
    }

    const LinearProgram& lp_;
    const SolverOptions& options_;

    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::size_t num_art_ = 0;
    std::size_t ncols_ = 0;
    std::size_t basic_art_count_ = 0;
    std::uint64_t pivots_ = 0;

    Vec lo_;
    Vec hi_;
    Vec x_;
    Vec d_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> pos_;
    std::vector<std::size_t> art_row_;
    Vec art_sign_;
};

}  // namespace

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Feasible:
            return "feasible";
        case SolveStatus::Infeasible:
            return "infeasible";
        case SolveStatus::IterationLimit:
            return "iteration-limit";
    }
    return "?";
}

std::size_t LinearProgram::add_variable(double lo, double hi) {
    bounds.push_back({lo, hi});
    return num_vars++;
}

void LinearProgram::add_constraint(std::vector<LinearTerm> terms, Relation rel, double rhs) {
    constraints.push_back({std::move(terms), rel, rhs});
}

void LinearProgram::validate() const {
    if (bounds.size() != num_vars) {
        throw InvalidInput("LinearProgram: bounds size differs from num_vars");
    }
    for (std::size_t j = 0; j < num_vars; ++j) {
        const auto& b = bounds[j];
        if (std::isnan(b.lo) || std::isnan(b.hi) || b.lo > b.hi || b.lo == kInf || b.hi == -kInf) {
            throw InvalidInput("LinearProgram: invalid bounds on variable " + std::to_string(j));
        }
    }
    for (std::size_t r = 0; r < constraints.size(); ++r) {
        const auto& c = constraints[r];
        if (!std::isfinite(c.rhs)) {
            throw InvalidInput("LinearProgram: non-finite rhs in constraint " + std::to_string(r));
        }
        for (const auto& term : c.terms) {
            if (term.var >= num_vars || !std::isfinite(term.coef)) {
                throw InvalidInput("LinearProgram: bad term in constraint " + std::to_string(r));
            }
        }
    }
}

double max_violation(const LinearProgram& lp, std::span<const double> x) {
    if (x.size() != lp.num_vars) {
        return kInf;
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
        if (!std::isfinite(x[j])) {
            return kInf;
        }
        worst = std::max(worst, lp.bounds[j].lo - x[j]);
        worst = std::max(worst, x[j] - lp.bounds[j].hi);
    }
    for (const auto& c : lp.constraints) {
        double ax = 0.0;
        for (const auto& term : c.terms) {
            ax += term.coef * x[term.var];
        }
        switch (c.rel) {
            case Relation::LessEq:
                worst = std::max(worst, ax - c.rhs);
                break;
            case Relation::GreaterEq:
                worst = std::max(worst, c.rhs - ax);
                break;
            case Relation::Equal:
                worst = std::max(worst, std::abs(ax - c.rhs));
                break;
        }
    }
    return worst;
}

bool verify_witness(const LinearProgram& lp, std::span<const double> x, double tol) {
    return max_violation(lp, x) <= tol;
}

double certificate_margin(const LinearProgram& lp, const FarkasCertificate& cert) {
    if (cert.multipliers.size() != lp.constraints.size()) {
        return -kInf;
    }
    Vec combined(lp.num_vars, 0.0);
    double rhs = 0.0;
    double scale = 0.0;
    for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
        const double mult = cert.multipliers[r];
        const auto& c = lp.constraints[r];
        if (!std::isfinite(mult) || (c.rel == Relation::LessEq && mult < 0.0) ||
            (c.rel == Relation::GreaterEq && mult > 0.0)) {
            return -kInf;
        }
        if (mult == 0.0) {
            continue;
        }
        for (const auto& term : c.terms) {
            combined[term.var] += mult * term.coef;
            scale = std::max(scale, std::abs(mult * term.coef));
        }
        rhs += mult * c.rhs;
    }
    // Coefficients at roundoff level on unbounded variables are treated as exact zeros.
    const double zero = 1e-12 * std::max(1.0, scale);
    double lhs_min = 0.0;
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
        const double cj = combined[j];
        const auto& b = lp.bounds[j];
        if (cj > 0.0) {
            if (std::isfinite(b.lo)) {
                lhs_min += cj * b.lo;
            } else if (cj > zero) {
                return -kInf;
            }
        } else if (cj < 0.0) {
            if (std::isfinite(b.hi)) {
                lhs_min += cj * b.hi;
            } else if (cj < -zero) {
                return -kInf;
            }
        }
    }
    return lhs_min - rhs;
}

bool verify_certificate(const LinearProgram& lp, const FarkasCertificate& cert, double tol) {
    return certificate_margin(lp, cert) > tol;
}

SolveResult lp_feasible(const LinearProgram& lp, const SolverOptions& options) {
    lp.validate();
    const auto start = std::chrono::steady_clock::now();
    PhaseOneSimplex simplex(lp, options);
    SolveResult result = simplex.run();
    result.stats.nodes = 1;
    result.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace lipinval

#include "lipinval/invalidation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "lipinval/errors.hpp"

namespace lipinval {

namespace {

constexpr double kPrescreenMargin = 1e-9;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Range of |x| for x in [a, b].
Interval abs_range(double a, double b) {
    const double hi = std::max(std::abs(a), std::abs(b));
    if (a >= 0.0) {
        return {a, hi};
    }
    if (b <= 0.0) {
        return {-b, hi};
    }
    return {0.0, hi};
}

// Interval information on s_k - s~_j, coordinate by coordinate.
struct PairGeometry {
    std::vector<Interval> diff;  // x_d range
    std::vector<Interval> mag;   // |x_d| range
    Interval norm;               // ||x||_p range
};

PairGeometry geometry(const TimeBoxes& boxes, const Vec& s_tilde, std::size_t k, std::size_t m, std::size_t n_y,
                      Norm p) {
    PairGeometry g;
    const std::size_t n = m * n_y;
    g.diff.resize(n);
    g.mag.resize(n);
    for (std::size_t l = 0; l < n_y; ++l) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t d = l * m + i;
            g.diff[d] = {boxes.lower[k - l][i] - s_tilde[d], boxes.upper[k - l][i] - s_tilde[d]};
            g.mag[d] = abs_range(g.diff[d].lo, g.diff[d].hi);
        }
    }
    for (const auto& a : g.mag) {
        if (p == Norm::One) {
            g.norm.lo += a.lo;
            g.norm.hi += a.hi;
        } else {
            g.norm.lo = std::max(g.norm.lo, a.lo);
            g.norm.hi = std::max(g.norm.hi, a.hi);
        }
    }
    return g;
}

std::vector<std::vector<std::size_t>> compute_active(const InvalidationProblem& prob, const SelectorState* selector) {
    const Abstraction& a = *prob.abstraction;
    const std::size_t n_y = a.data().n_y;
    const std::size_t T = prob.observed.length();
    std::vector<std::vector<std::size_t>> active;
    const std::size_t first = first_dynamic_step(n_y);
    if (T < n_y + 1) {
        return active;
    }
    std::vector<std::size_t> all(a.data().size());
    for (std::size_t j = 0; j < all.size(); ++j) {
        all[j] = j;
    }
    for (std::size_t k = first; k + 1 < T; ++k) {
        if (selector == nullptr) {
            active.push_back(all);
        } else {
            const Vec query = stack_regressor(prob.observed.samples, k, n_y);
            active.push_back(select(*selector, query));
        }
    }
    return active;
}

// Affine expression sum(coef * var) + constant.
struct Expr {
    std::vector<LinearTerm> terms;
    double constant = 0.0;

    void add(const Expr& e, double scale) {
        for (const auto& t : e.terms) {
            terms.push_back({t.var, scale * t.coef});
        }
        constant += scale * e.constant;
    }
};

std::vector<LinearTerm> merge_terms(std::vector<LinearTerm> terms) {
    std::map<std::size_t, double> acc;
    for (const auto& t : terms) {
        acc[t.var] += t.coef;
    }
    std::vector<LinearTerm> out;
    out.reserve(acc.size());
    for (const auto& [var, coef] : acc) {
        if (coef != 0.0) {
            out.push_back({var, coef});
        }
    }
    return out;
}

class Encoder {
public:
    Encoder(const InvalidationProblem& prob, const std::vector<std::vector<std::size_t>>& active,
            const EncodeOptions& options)
        : prob_(prob), a_(*prob.abstraction), active_(active), options_(options), boxes_(time_boxes(prob)) {}

    Encoding run() {
        const auto& data = a_.data();
        m_ = data.m;
        n_y_ = data.n_y;
        T_ = prob_.observed.length();
        Encoding enc;
        auto& layout = enc.layout;
        layout.T = T_;
        layout.m = m_;
        layout.first_step = first_dynamic_step(n_y_);
        LinearProgram& lp = enc.milf.lp;

        bool empty = false;
        for (std::size_t k = 0; k < T_; ++k) {
            for (std::size_t i = 0; i < m_; ++i) {
                double lo = boxes_.lower[k][i];
                double hi = boxes_.upper[k][i];
                if (lo > hi) {
                    empty = true;
                    hi = lo;
                }
                layout.y_var.push_back(lp.add_variable(lo, hi));
            }
        }
        const Vec& eps_w = data.noise.eps_w;
        const std::size_t steps = active_.size();
        for (std::size_t s = 0; s < steps; ++s) {
            for (std::size_t i = 0; i < m_; ++i) {
                layout.w_var.push_back(lp.add_variable(-eps_w[i], eps_w[i]));
            }
        }
        enc.stats.active_pairs.reserve(steps);
        for (const auto& act : active_) {
            enc.stats.active_pairs.push_back(act.size());
        }
        if (empty) {
            // An empty noise box: record the contradiction as a single row 0 >= 1.
            lp.add_constraint({}, Relation::GreaterEq, 1.0);
            finish(enc);
            return enc;
        }

        big_m_ = big_m();
        enc.milf.big_m = big_m_;

        for (std::size_t s = 0; s < steps; ++s) {
            const std::size_t k = layout.first_step + s;
            encode_step(enc, k, s);
        }
        finish(enc);
        return enc;
    }

private:
    std::size_t y_index(const EncodingLayout& layout, std::size_t k, std::size_t i) const { return layout.y_var[k * m_ + i]; }

    void finish(Encoding& enc) const {
        enc.stats.variables = enc.milf.lp.num_vars;
        enc.stats.constraints = enc.milf.lp.constraints.size();
        enc.stats.binaries = enc.milf.binary_vars.size();
    }

    double big_m() const {
        const auto& data = a_.data();
        const OutputDomain& dom = prob_.bounds();
        Vec range(m_ * n_y_);
        double diam_inf = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            diam_inf = std::max(diam_inf, dom.upper[i] - dom.lower[i]);
        }
        for (std::size_t d = 0; d < range.size(); ++d) {
            const std::size_t i = d % m_;
            range[d] = dom.upper[i] - dom.lower[i];
        }
        const double l_max = *std::max_element(a_.lip().values.begin(), a_.lip().values.end());
        const double et_max = *std::max_element(a_.eps_t().begin(), a_.eps_t().end());
        const double ew_max = *std::max_element(data.noise.eps_w.begin(), data.noise.eps_w.end());
        const double formula = l_max * norm(range, data.p) + diam_inf + 2.0 * et_max + 2.0 * ew_max;

        // The constant must also dominate every |s_k - s~_j| coordinate that occurs.
        double reach = 0.0;
        const std::size_t first = first_dynamic_step(n_y_);
        for (std::size_t s = 0; s < active_.size(); ++s) {
            const std::size_t k = first + s;
            for (std::size_t j : active_[s]) {
                const Vec& st = data.pairs[j].s_tilde;
                for (std::size_t l = 0; l < n_y_; ++l) {
                    for (std::size_t i = 0; i < m_; ++i) {
                        const double sd = st[l * m_ + i];
                        reach = std::max({reach, std::abs(boxes_.lower[k - l][i] - sd), std::abs(boxes_.upper[k - l][i] - sd)});
                    }
                }
            }
        }
        return std::max(formula, 2.0 * reach);
    }

    // x_d = s_k[d] - s~_j[d] as an affine expression.
    Expr coordinate(const EncodingLayout& layout, std::size_t k, std::size_t d, const Vec& s_tilde) const {
        const std::size_t l = d / m_;
        const std::size_t i = d % m_;
        Expr e;
        e.terms.push_back({y_index(layout, k - l, i), 1.0});
        e.constant = -s_tilde[d];
        return e;
    }

    // Expression bounded above by |x_d| and able to reach it: either a signed copy of x_d or a
    // fresh t variable with a sign binary.
    Expr magnitude(Encoding& enc, const Expr& x, const Interval& diff, const Interval& mag, bool fix_sign) {
        if (fix_sign && diff.lo >= 0.0) {
            return x;
        }
        if (fix_sign && diff.hi <= 0.0) {
            Expr neg;
            neg.add(x, -1.0);
            return neg;
        }
        LinearProgram& lp = enc.milf.lp;
        const std::size_t t = lp.add_variable(0.0, options_.tighten ? mag.hi : kInf);
        const std::size_t delta = enc.milf.add_binary();
        // t <= x + M(1 - delta)
        {
            std::vector<LinearTerm> terms{{t, 1.0}, {delta, big_m_}};
            for (const auto& term : x.terms) {
                terms.push_back({term.var, -term.coef});
            }
            lp.add_constraint(merge_terms(std::move(terms)), Relation::LessEq, big_m_ + x.constant);
        }
        // t <= -x + M delta
        {
            std::vector<LinearTerm> terms{{t, 1.0}, {delta, -big_m_}};
            for (const auto& term : x.terms) {
                terms.push_back({term.var, term.coef});
            }
            lp.add_constraint(merge_terms(std::move(terms)), Relation::LessEq, -x.constant);
        }
        Expr e;
        e.terms.push_back({t, 1.0});
        return e;
    }

    // Expression nu with nu <= ||s_k - s~_j||_p that can reach the norm for some binary choice.
    Expr norm_expr(Encoding& enc, std::size_t k, const Vec& s_tilde, const PairGeometry& g) {
        const auto& layout = enc.layout;
        LinearProgram& lp = enc.milf.lp;
        const std::size_t n = m_ * n_y_;
        const bool tight = options_.tighten;

        std::vector<std::size_t> coords;
        if (a_.p() == Norm::Inf && tight) {
            // Coordinates that can never attain the maximum are left out of the selector.
            std::size_t lead = 0;
            for (std::size_t d = 1; d < n; ++d) {
                if (g.mag[d].lo > g.mag[lead].lo) {
                    lead = d;
                }
            }
            for (std::size_t d = 0; d < n; ++d) {
                if (d == lead || g.mag[d].hi > g.mag[lead].lo) {
                    coords.push_back(d);
                }
            }
        } else {
            for (std::size_t d = 0; d < n; ++d) {
                coords.push_back(d);
            }
        }

        std::vector<Expr> mags;
        mags.reserve(coords.size());
        for (std::size_t d : coords) {
            mags.push_back(magnitude(enc, coordinate(layout, k, d, s_tilde), g.diff[d], g.mag[d], tight));
        }

        if (a_.p() == Norm::One) {
            if (tight) {
                Expr sum;
                for (const auto& e : mags) {
                    sum.add(e, 1.0);
                }
                return sum;
            }
            const std::size_t nu = lp.add_variable(0.0, kInf);
            ++enc.stats.norm_vars;
            std::vector<LinearTerm> terms{{nu, 1.0}};
            double rhs = 0.0;
            for (const auto& e : mags) {
                for (const auto& term : e.terms) {
                    terms.push_back({term.var, -term.coef});
                }
                rhs += e.constant;
            }
            lp.add_constraint(merge_terms(std::move(terms)), Relation::Equal, rhs);
            Expr out;
            out.terms.push_back({nu, 1.0});
            return out;
        }

        if (tight && mags.size() == 1) {
            return mags.front();
        }
        const std::size_t nu = lp.add_variable(0.0, tight ? g.norm.hi : kInf);
        ++enc.stats.norm_vars;
        if (mags.size() == 1) {
            // A single coordinate needs no selector: nu <= t_0.
            std::vector<LinearTerm> terms{{nu, 1.0}};
            for (const auto& term : mags.front().terms) {
                terms.push_back({term.var, -term.coef});
            }
            lp.add_constraint(merge_terms(std::move(terms)), Relation::LessEq, mags.front().constant);
        } else {
            std::vector<LinearTerm> pick_one;
            for (const auto& e : mags) {
                // nu <= t_d + M(1 - sigma_d)
                const std::size_t sigma = enc.milf.add_binary();
                pick_one.push_back({sigma, 1.0});
                std::vector<LinearTerm> terms{{nu, 1.0}, {sigma, big_m_}};
                for (const auto& term : e.terms) {
                    terms.push_back({term.var, -term.coef});
                }
                lp.add_constraint(merge_terms(std::move(terms)), Relation::LessEq, big_m_ + e.constant);
            }
            lp.add_constraint(std::move(pick_one), Relation::Equal, 1.0);
        }
        Expr out;
        out.terms.push_back({nu, 1.0});
        return out;
    }

    void encode_step(Encoding& enc, std::size_t k, std::size_t s) {
        const auto& data = a_.data();
        const auto& layout = enc.layout;
        const auto& act = active_[s];
        const Vec& L = a_.lip().values;
        const Vec& et = a_.eps_t();
        const Vec& ew = data.noise.eps_w;

        std::vector<PairGeometry> geo;
        geo.reserve(act.size());
        for (std::size_t j : act) {
            geo.push_back(geometry(boxes_, data.pairs[j].s_tilde, k, m_, n_y_, data.p));
        }

        // keep_upper[r * m + i], keep_lower[r * m + i] for active slot r.
        std::vector<char> keep_upper(act.size() * m_, 1);
        std::vector<char> keep_lower(act.size() * m_, 1);
        if (options_.tighten) {
            for (std::size_t i = 0; i < m_; ++i) {
                const double yhi = boxes_.upper[k + 1][i] + ew[i];
                const double ylo = boxes_.lower[k + 1][i] - ew[i];
                std::size_t best_u = 0;
                std::size_t best_l = 0;
                for (std::size_t r = 1; r < act.size(); ++r) {
                    const double yp = data.pairs[act[r]].y_next[i];
                    const double ypu = data.pairs[act[best_u]].y_next[i];
                    const double ypl = data.pairs[act[best_l]].y_next[i];
                    if (yp + L[i] * geo[r].norm.hi < ypu + L[i] * geo[best_u].norm.hi) {
                        best_u = r;
                    }
                    if (yp - L[i] * geo[r].norm.hi > ypl - L[i] * geo[best_l].norm.hi) {
                        best_l = r;
                    }
                }
                const double cap_u = data.pairs[act[best_u]].y_next[i] + L[i] * geo[best_u].norm.hi;
                const double cap_l = data.pairs[act[best_l]].y_next[i] - L[i] * geo[best_l].norm.hi;
                for (std::size_t r = 0; r < act.size(); ++r) {
                    const double yp = data.pairs[act[r]].y_next[i];
                    const double up_min = yp + L[i] * geo[r].norm.lo;
                    const double low_max = yp - L[i] * geo[r].norm.lo;
                    const bool redundant_u = yhi <= up_min + et[i];
                    const bool dominated_u = r != best_u && up_min >= cap_u;
                    const bool redundant_l = ylo >= low_max - et[i];
                    const bool dominated_l = r != best_l && low_max <= cap_l;
                    keep_upper[r * m_ + i] = !(redundant_u || dominated_u);
                    keep_lower[r * m_ + i] = !(redundant_l || dominated_l);
                }
            }
        }

        LinearProgram& lp = enc.milf.lp;
        for (std::size_t r = 0; r < act.size(); ++r) {
            bool any = false;
            for (std::size_t i = 0; i < m_; ++i) {
                any = any || keep_upper[r * m_ + i] || keep_lower[r * m_ + i];
            }
            if (!any) {
                continue;
            }
            const auto& pair = data.pairs[act[r]];
            const Expr nu = norm_expr(enc, k, pair.s_tilde, geo[r]);
            for (std::size_t i = 0; i < m_; ++i) {
                const std::size_t y = y_index(layout, k + 1, i);
                const std::size_t w = layout.w_var[s * m_ + i];
                if (keep_upper[r * m_ + i]) {
                    // y_{k+1} - w - L nu <= y' + eps_t
                    Expr row;
                    row.terms = {{y, 1.0}, {w, -1.0}};
                    row.add(nu, -L[i]);
                    lp.add_constraint(merge_terms(std::move(row.terms)), Relation::LessEq,
                                      pair.y_next[i] + et[i] - row.constant);
                    ++enc.stats.envelope_rows;
                }
                if (keep_lower[r * m_ + i]) {
                    // y_{k+1} - w + L nu >= y' - eps_t
                    Expr row;
                    row.terms = {{y, 1.0}, {w, -1.0}};
                    row.add(nu, L[i]);
                    lp.add_constraint(merge_terms(std::move(row.terms)), Relation::GreaterEq,
                                      pair.y_next[i] - et[i] - row.constant);
                    ++enc.stats.envelope_rows;
                }
            }
        }
    }

    const InvalidationProblem& prob_;
    const Abstraction& a_;
    const std::vector<std::vector<std::size_t>>& active_;
    EncodeOptions options_;
    TimeBoxes boxes_;
    std::size_t m_ = 0;
    std::size_t n_y_ = 0;
    std::size_t T_ = 0;
    double big_m_ = 0.0;
};

std::optional<PrescreenHit> prescreen_with(const InvalidationProblem& prob,
                                           const std::vector<std::vector<std::size_t>>& active) {
    const TimeBoxes boxes = time_boxes(prob);
    const Abstraction& a = *prob.abstraction;
    const auto& data = a.data();
    const std::size_t m = data.m;
    for (std::size_t k = 0; k < prob.observed.length(); ++k) {
        if (boxes.empty_at(k)) {
            for (std::size_t i = 0; i < m; ++i) {
                if (boxes.lower[k][i] > boxes.upper[k][i]) {
                    return PrescreenHit{PrescreenHit::Kind::EmptyBox, k, 0, i};
                }
            }
        }
    }
    const std::size_t first = first_dynamic_step(data.n_y);
    const Vec& L = a.lip().values;
    const Vec& et = a.eps_t();
    const Vec& ew = data.noise.eps_w;
    for (std::size_t s = 0; s < active.size(); ++s) {
        const std::size_t k = first + s;
        for (std::size_t j : active[s]) {
            const auto& pair = data.pairs[j];
            const PairGeometry g = geometry(boxes, pair.s_tilde, k, m, data.n_y, data.p);
            for (std::size_t i = 0; i < m; ++i) {
                const double lo = boxes.lower[k + 1][i] - pair.y_next[i] - ew[i];
                const double hi = boxes.upper[k + 1][i] - pair.y_next[i] + ew[i];
                const double lhs_min = abs_range(lo, hi).lo;
                const double rhs_max = L[i] * g.norm.hi + et[i];
                if (lhs_min > rhs_max + kPrescreenMargin * (1.0 + rhs_max)) {
                    return PrescreenHit{PrescreenHit::Kind::Envelope, k, j, i};
                }
            }
        }
    }
    return std::nullopt;
}

double witness_violation_with(const InvalidationProblem& prob, const std::vector<std::vector<std::size_t>>& active,
                              const Witness& wit) {
    const Abstraction& a = *prob.abstraction;
    const auto& data = a.data();
    const std::size_t m = data.m;
    const std::size_t T = prob.observed.length();
    if (wit.y.size() != T || wit.v.size() != T || wit.w.size() + 1 < T) {
        return kInf;
    }
    const OutputDomain& dom = prob.bounds();
    double worst = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            const double y = wit.y[k][i];
            const double v = prob.observed.samples[k][i] - y;
            worst = std::max({worst, std::abs(v) - data.noise.eps_v[i], dom.lower[i] - y, y - dom.upper[i],
                              std::abs(v - wit.v[k][i])});
        }
    }
    const std::size_t first = first_dynamic_step(data.n_y);
    const Vec& L = a.lip().values;
    const Vec& et = a.eps_t();
    for (std::size_t s = 0; s < active.size(); ++s) {
        const std::size_t k = first + s;
        const Vec sk = stack_regressor(wit.y, k, data.n_y);
        for (std::size_t i = 0; i < m; ++i) {
            worst = std::max(worst, std::abs(wit.w[k][i]) - data.noise.eps_w[i]);
        }
        for (std::size_t j : active[s]) {
            const auto& pair = data.pairs[j];
            const double dist = distance(sk, pair.s_tilde, data.p);
            for (std::size_t i = 0; i < m; ++i) {
                const double lhs = wit.y[k + 1][i] - wit.w[k][i];
                worst = std::max(worst, lhs - (pair.y_next[i] + L[i] * dist + et[i]));
                worst = std::max(worst, (pair.y_next[i] - L[i] * dist - et[i]) - lhs);
            }
        }
    }
    return worst;
}

std::shared_ptr<const SelectorState> resolve_selector(const InvalidationProblem& prob) {
    if (prob.selector) {
        return prob.selector;
    }
    if (prob.downsampler) {
        return std::make_shared<const SelectorState>(prepare(*prob.downsampler, prob.abstraction->data()));
    }
    return nullptr;
}

}  // namespace

const OutputDomain& InvalidationProblem::bounds() const {
    if (y_bounds) {
        return *y_bounds;
    }
    return abstraction->data().domain;
}

void InvalidationProblem::validate() const {
    if (!abstraction) {
        throw InvalidInput("invalidation: no abstraction");
    }
    if (abstraction->p() == Norm::Two) {
        throw InvalidInput("MILP encoding requires p ∈ {1,∞}");
    }
    const std::size_t m = abstraction->m();
    for (std::size_t k = 0; k < observed.length(); ++k) {
        if (observed.samples[k].size() != m) {
            throw InvalidInput("invalidation: observed sample " + std::to_string(k) + " has dimension " +
                               std::to_string(observed.samples[k].size()) + ", expected " + std::to_string(m));
        }
        for (double v : observed.samples[k]) {
            if (!std::isfinite(v)) {
                throw InvalidInput("invalidation: non-finite observed value at k=" + std::to_string(k));
            }
        }
    }
    bounds().validate(m);
}

std::size_t first_dynamic_step(std::size_t n_y) {
    return n_y - 1;
}

bool TimeBoxes::empty_at(std::size_t k) const {
    for (std::size_t i = 0; i < lower[k].size(); ++i) {
        if (lower[k][i] > upper[k][i]) {
            return true;
        }
    }
    return false;
}

TimeBoxes time_boxes(const InvalidationProblem& prob) {
    const auto& noise = prob.abstraction->data().noise;
    const OutputDomain& dom = prob.bounds();
    TimeBoxes b;
    for (const auto& yk : prob.observed.samples) {
        Vec lo(yk.size());
        Vec hi(yk.size());
        for (std::size_t i = 0; i < yk.size(); ++i) {
            lo[i] = std::max(yk[i] - noise.eps_v[i], dom.lower[i]);
            hi[i] = std::min(yk[i] + noise.eps_v[i], dom.upper[i]);
        }
        b.lower.push_back(std::move(lo));
        b.upper.push_back(std::move(hi));
    }
    return b;
}

std::vector<std::vector<std::size_t>> active_pairs(const InvalidationProblem& prob) {
    prob.validate();
    const auto selector = resolve_selector(prob);
    return compute_active(prob, selector.get());
}

Encoding encode(const InvalidationProblem& prob, const EncodeOptions& options) {
    const auto active = active_pairs(prob);
    return Encoder(prob, active, options).run();
}

std::optional<PrescreenHit> prescreen(const InvalidationProblem& prob) {
    return prescreen_with(prob, active_pairs(prob));
}

double witness_violation(const InvalidationProblem& prob, const Witness& witness) {
    return witness_violation_with(prob, active_pairs(prob), witness);
}

std::string to_string(Outcome o) {
    return o == Outcome::Invalidated ? "invalidated" : "not_invalidated";
}

std::string to_string(DecidedBy d) {
    switch (d) {
        case DecidedBy::Prescreen:
            return "prescreen";
        case DecidedBy::Milf:
            return "milf";
        case DecidedBy::Vacuous:
            return "vacuous";
    }
    return "?";
}

namespace {

void dump(const Encoding& enc, const InvalidateOptions& options) {
    if (!options.dump_lp) {
        return;
    }
    std::ofstream out(*options.dump_lp);
    if (!out) {
        throw std::runtime_error("cannot write " + options.dump_lp->string());
    }
    write_lpdump(enc.milf, out);
}

}  // namespace

Verdict invalidate(const InvalidationProblem& prob, const InvalidateOptions& options) {
    prob.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    const auto selector = resolve_selector(prob);
    const auto active = compute_active(prob, selector.get());

    Verdict verdict;
    verdict.stats.active_pairs.reserve(active.size());
    for (const auto& a : active) {
        verdict.stats.active_pairs.push_back(a.size());
    }

    std::optional<PrescreenHit> hit;
    if (options.use_prescreen) {
        hit = prescreen_with(prob, active);
    }
    if (hit) {
        verdict.outcome = Outcome::Invalidated;
        verdict.by = DecidedBy::Prescreen;
        verdict.hit = hit;
        // The audit is a diagnostic and is not part of the decision time.
        verdict.stats.wall_ms = elapsed();
        if (options.audit_prescreen || options.dump_lp) {
            const Encoding enc = Encoder(prob, active, options.encode).run();
            verdict.stats.constraints = enc.stats.constraints;
            verdict.stats.binaries = enc.stats.binaries;
            verdict.stats.variables = enc.stats.variables;
            dump(enc, options);
            if (options.audit_prescreen) {
                verdict.audit = milf_feasible(enc.milf, options.solver).status;
            }
        }
        return verdict;
    }

    const Encoding enc = Encoder(prob, active, options.encode).run();
    verdict.stats.constraints = enc.stats.constraints;
    verdict.stats.binaries = enc.stats.binaries;
    verdict.stats.variables = enc.stats.variables;
    dump(enc, options);

    const SolveResult result = milf_feasible(enc.milf, options.solver);
    verdict.stats.solver = result.stats;
    if (result.status == SolveStatus::IterationLimit) {
        throw Inconclusive("invalidation inconclusive: " + result.note);
    }
    verdict.by = active.empty() ? DecidedBy::Vacuous : DecidedBy::Milf;
    if (result.status == SolveStatus::Infeasible) {
        verdict.outcome = Outcome::Invalidated;
        verdict.stats.wall_ms = elapsed();
        return verdict;
    }

    const auto& layout = enc.layout;
    const std::size_t T = prob.observed.length();
    const std::size_t m = layout.m;
    Witness& wit = verdict.witness;
    wit.y.assign(T, Vec(m));
    wit.v.assign(T, Vec(m));
    wit.w.assign(T > 0 ? T - 1 : 0, Vec(m, 0.0));
    for (std::size_t k = 0; k < T; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            wit.y[k][i] = result.witness[layout.y_var[k * m + i]];
            wit.v[k][i] = prob.observed.samples[k][i] - wit.y[k][i];
        }
    }
    for (std::size_t s = 0; s < active.size(); ++s) {
        for (std::size_t i = 0; i < m; ++i) {
            wit.w[layout.first_step + s][i] = result.witness[layout.w_var[s * m + i]];
        }
    }
    const double violation = witness_violation_with(prob, active, wit);
    if (!(violation <= kFeasibilityTol)) {
        throw Inconclusive("invalidation inconclusive: witness violates the raw constraints by " +
                           format_double(violation));
    }
    verdict.outcome = Outcome::NotInvalidated;
    verdict.stats.wall_ms = elapsed();
    return verdict;
}

}  // namespace lipinval

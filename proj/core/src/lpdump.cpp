#include <istream>
#include <ostream>
#include <sstream>

#include "lipinval/dataset.hpp"
#include "lipinval/errors.hpp"
#include "lipinval/feasolver.hpp"

namespace lipinval {

namespace {

constexpr const char* kHeader = "lipinval-lpdump 1";

std::string bound_text(double v) {
    if (v == kInf) {
        return "inf";
    }
    if (v == -kInf) {
        return "-inf";
    }
    return format_double(v);
}

double parse_number(const std::string& tok, std::size_t line) {
    if (tok == "inf" || tok == "+inf") {
        return kInf;
    }
    if (tok == "-inf") {
        return -kInf;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) {
            throw std::invalid_argument(tok);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("<lpdump>", line, "bad number '" + tok + "'");
    }
}

std::size_t parse_index(const std::string& tok, std::size_t line, std::size_t limit) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(tok, &used);
        if (used != tok.size() || v >= limit) {
            throw std::out_of_range(tok);
        }
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ParseError("<lpdump>", line, "bad variable index '" + tok + "'");
    }
}

}  // namespace

void write_lpdump(const MilfProblem& problem, std::ostream& out) {
    const LinearProgram& lp = problem.lp;
    out << kHeader << '\n';
    out << "vars " << lp.num_vars << '\n';
    out << "bigm " << format_double(problem.big_m) << '\n';
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
        out << "bound " << j << ' ' << bound_text(lp.bounds[j].lo) << ' ' << bound_text(lp.bounds[j].hi) << '\n';
    }
    for (std::size_t b : problem.binary_vars) {
        out << "binary " << b << '\n';
    }
    for (const auto& c : lp.constraints) {
        out << "c";
        for (const auto& t : c.terms) {
            out << ' ' << format_double(t.coef) << "*x" << t.var;
        }
        switch (c.rel) {
            case Relation::LessEq:
                out << " <= ";
                break;
            case Relation::GreaterEq:
                out << " >= ";
                break;
            case Relation::Equal:
                out << " = ";
                break;
        }
        out << format_double(c.rhs) << '\n';
    }
}

MilfProblem read_lpdump(std::istream& in) {
    MilfProblem problem;
    std::string text;
    std::size_t line_no = 0;
    bool have_header = false;
    bool have_vars = false;
    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') {
            text.pop_back();
        }
        if (text.empty() || text.front() == '#') {
            continue;
        }
        if (!have_header) {
            if (text != kHeader) {
                throw ParseError("<lpdump>", line_no, "missing header");
            }
            have_header = true;
            continue;
        }
        std::istringstream ss(text);
        std::string kind;
        ss >> kind;
        if (kind == "vars") {
            std::string tok;
            ss >> tok;
            const std::size_t n = parse_index(tok, line_no, static_cast<std::size_t>(-1));
            problem.lp.num_vars = n;
            problem.lp.bounds.assign(n, VariableBounds{});
            have_vars = true;
            continue;
        }
        if (!have_vars) {
            throw ParseError("<lpdump>", line_no, "'vars' line must come first");
        }
        if (kind == "bigm") {
            std::string tok;
            ss >> tok;
            problem.big_m = parse_number(tok, line_no);
        } else if (kind == "bound") {
            std::string idx;
            std::string lo;
            std::string hi;
            if (!(ss >> idx >> lo >> hi)) {
                throw ParseError("<lpdump>", line_no, "bound line needs index, lower, upper");
            }
            const std::size_t j = parse_index(idx, line_no, problem.lp.num_vars);
            problem.lp.bounds[j] = {parse_number(lo, line_no), parse_number(hi, line_no)};
        } else if (kind == "binary") {
            std::string idx;
            ss >> idx;
            problem.binary_vars.push_back(parse_index(idx, line_no, problem.lp.num_vars));
        } else if (kind == "c") {
            LinearConstraint c;
            std::string tok;
            bool have_rel = false;
            bool have_rhs = false;
            while (ss >> tok) {
                if (tok == "<=" || tok == ">=" || tok == "=") {
                    if (have_rel) {
                        throw ParseError("<lpdump>", line_no, "two relations in one constraint");
                    }
                    c.rel = tok == "<=" ? Relation::LessEq : tok == ">=" ? Relation::GreaterEq : Relation::Equal;
                    have_rel = true;
                } else if (have_rel) {
                    if (have_rhs) {
                        throw ParseError("<lpdump>", line_no, "trailing tokens after rhs");
                    }
                    c.rhs = parse_number(tok, line_no);
                    have_rhs = true;
                } else {
                    const auto star = tok.find("*x");
                    if (star == std::string::npos) {
                        throw ParseError("<lpdump>", line_no, "term must look like coef*xIDX: '" + tok + "'");
                    }
                    c.terms.push_back({parse_index(tok.substr(star + 2), line_no, problem.lp.num_vars),
                                       parse_number(tok.substr(0, star), line_no)});
                }
            }
            if (!have_rel || !have_rhs) {
                throw ParseError("<lpdump>", line_no, "constraint needs a relation and a rhs");
            }
            problem.lp.constraints.push_back(std::move(c));
        } else {
            throw ParseError("<lpdump>", line_no, "unknown line kind '" + kind + "'");
        }
    }
    if (!have_header) {
        throw ParseError("<lpdump>", line_no, "missing header");
    }
    return problem;
}

}  // namespace lipinval

#include "lipinval/norm.hpp"

#include <algorithm>
#include <cmath>

#include "lipinval/errors.hpp"

namespace lipinval {

Norm parse_norm(std::string_view text) {
    if (text == "1") {
        return Norm::One;
    }
    if (text == "2") {
        return Norm::Two;
    }
    if (text == "inf" || text == "Inf" || text == "INF") {
        return Norm::Inf;
    }
    throw InvalidInput("unknown norm '" + std::string(text) + "' (expected 1, 2 or inf)");
}

std::string to_string(Norm p) {
    switch (p) {
        case Norm::One:
            return "1";
        case Norm::Two:
            return "2";
        case Norm::Inf:
            return "inf";
    }
    return "?";
}

double norm(std::span<const double> x, Norm p) {
    double acc = 0.0;
    switch (p) {
        case Norm::One:
            for (double v : x) {
                acc += std::abs(v);
            }
            return acc;
        case Norm::Two:
            for (double v : x) {
                acc += v * v;
            }
            return std::sqrt(acc);
        case Norm::Inf:
            for (double v : x) {
                acc = std::max(acc, std::abs(v));
            }
            return acc;
    }
    return acc;
}

double distance(std::span<const double> a, std::span<const double> b, Norm p) {
    if (a.size() != b.size()) {
        throw InvalidInput("distance: dimension mismatch");
    }
    double acc = 0.0;
    switch (p) {
        case Norm::One:
            for (std::size_t d = 0; d < a.size(); ++d) {
                acc += std::abs(a[d] - b[d]);
            }
            return acc;
        case Norm::Two:
            for (std::size_t d = 0; d < a.size(); ++d) {
                const double diff = a[d] - b[d];
                acc += diff * diff;
            }
            return std::sqrt(acc);
        case Norm::Inf:
            for (std::size_t d = 0; d < a.size(); ++d) {
                acc = std::max(acc, std::abs(a[d] - b[d]));
            }
            return acc;
    }
    return acc;
}

}  // namespace lipinval

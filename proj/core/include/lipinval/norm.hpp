#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lipinval {

using Vec = std::vector<double>;

/// Vector norm index. Only 1, 2 and infinity are supported anywhere in the library.
enum class Norm { One, Two, Inf };

Norm parse_norm(std::string_view text);
std::string to_string(Norm p);

double norm(std::span<const double> x, Norm p);

/// ||a - b||_p without allocating.
double distance(std::span<const double> a, std::span<const double> b, Norm p);

}  // namespace lipinval

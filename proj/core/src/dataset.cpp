#include "lipinval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "lipinval/errors.hpp"

namespace lipinval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kFormatTag = "lipinval-dataset/1";

void require_size(const Vec& v, std::size_t m, const char* what) {
    if (v.size() != m) {
        throw InvalidInput(std::string(what) + ": expected " + std::to_string(m) + " components, got " +
                           std::to_string(v.size()));
    }
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + file.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line on which `"key"` first appears; 1 if absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

// Typed read of a manifest value; type errors are reported at the key's line.
template <typename T>
T get_field(const std::string& file, const std::string& text, const char* key, const json& value) {
    try {
        return value.get<T>();
    } catch (const json::exception& e) {
        throw ParseError(file, line_of_key(text, key), std::string("field '") + key + "': " + e.what());
    }
}

double parse_double_field(std::string_view field, const std::string& file, std::size_t line) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(file, line, "not a number: '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, ptr);
}

void NoiseBounds::validate(std::size_t m) const {
    require_size(eps_w, m, "eps_w");
    require_size(eps_v, m, "eps_v");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(eps_w[i] >= 0.0) || !(eps_v[i] >= 0.0) || !std::isfinite(eps_w[i]) || !std::isfinite(eps_v[i])) {
            throw InvalidInput("noise bounds must be finite and nonnegative");
        }
    }
}

void OutputDomain::validate(std::size_t m) const {
    require_size(lower, m, "domain.lower");
    require_size(upper, m, "domain.upper");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(lower[i] <= upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
            throw InvalidInput("domain bounds must be finite with lower <= upper (component " + std::to_string(i) +
                               ")");
        }
    }
}

bool OutputDomain::contains(std::span<const double> y) const {
    if (y.size() != lower.size()) {
        return false;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < lower[i] || y[i] > upper[i]) {
            return false;
        }
    }
    return true;
}

void TrajectoryDataset::validate() const {
    if (m == 0 || n_y == 0) {
        throw InvalidInput("m and n_y must be positive");
    }
    noise.validate(m);
    domain.validate(m);
    for (std::size_t l = 0; l < trajectories.size(); ++l) {
        for (std::size_t k = 0; k < trajectories[l].samples.size(); ++k) {
            if (trajectories[l].samples[k].size() != m) {
                throw InvalidInput("trajectory " + std::to_string(l) + " sample " + std::to_string(k) + " has " +
                                   std::to_string(trajectories[l].samples[k].size()) + " components, expected " +
                                   std::to_string(m));
            }
        }
    }
}

RegressorDataset RegressorDataset::subset(std::span<const std::size_t> indices) const {
    RegressorDataset out;
    out.m = m;
    out.n_y = n_y;
    out.p = p;
    out.noise = noise;
    out.domain = domain;
    out.pairs.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= pairs.size()) {
            throw InvalidInput("subset: pair index out of range");
        }
        out.pairs.push_back(pairs[idx]);
    }
    return out;
}

RegressorDataset RegressorDataset::prefix(std::size_t count) const {
    if (count > pairs.size()) {
        throw InvalidInput("prefix: requested " + std::to_string(count) + " pairs but only " +
                           std::to_string(pairs.size()) + " available");
    }
    RegressorDataset out = *this;
    out.pairs.resize(count);
    return out;
}

Vec stack_regressor(std::span<const Vec> samples, std::size_t k, std::size_t n_y) {
    if (k + 1 < n_y || k >= samples.size()) {
        throw InvalidInput("stack_regressor: window out of range");
    }
    Vec s;
    s.reserve(n_y * (samples.empty() ? 0 : samples[k].size()));
    for (std::size_t q = 0; q < n_y; ++q) {
        const Vec& y = samples[k - q];
        s.insert(s.end(), y.begin(), y.end());
    }
    return s;
}

RegressorDataset build_regressor_dataset(const TrajectoryDataset& d) {
    d.validate();
    RegressorDataset out;
    out.m = d.m;
    out.n_y = d.n_y;
    out.p = d.p;
    out.noise = d.noise;
    out.domain = d.domain;
    for (std::size_t l = 0; l < d.trajectories.size(); ++l) {
        const auto& samples = d.trajectories[l].samples;
        if (samples.size() < d.n_y + 1) {
            continue;
        }
        // j runs over n_y-1 .. T-2 so that both s~_j and y~_{j+1} exist.
        for (std::size_t j = d.n_y - 1; j + 1 < samples.size(); ++j) {
            RegressorPair pair;
            pair.s_tilde = stack_regressor(samples, j, d.n_y);
            pair.y_next = samples[j + 1];
            pair.trajectory = l;
            pair.time = j;
            out.pairs.push_back(std::move(pair));
        }
    }
    return out;
}

double epsilon_s(const NoiseBounds& noise, std::size_t n_y, Norm p) {
    const auto& ev = noise.eps_v;
    switch (p) {
        case Norm::Inf:
            return ev.empty() ? 0.0 : *std::max_element(ev.begin(), ev.end());
        case Norm::One: {
            double sum = 0.0;
            for (double e : ev) {
                sum += e;
            }
            return static_cast<double>(n_y) * sum;
        }
        case Norm::Two: {
            double sum = 0.0;
            for (double e : ev) {
                sum += e * e;
            }
            return std::sqrt(static_cast<double>(n_y) * sum);
        }
    }
    return 0.0;
}

void write_trajectory_csv(const Trajectory& t, const fs::path& file) {
    std::ofstream out(file);
    if (!out) {
        throw std::runtime_error("cannot write " + file.string());
    }
    const std::size_t m = t.samples.empty() ? 0 : t.samples.front().size();
    out << "k";
    for (std::size_t i = 1; i <= m; ++i) {
        out << ",y_" << i;
    }
    out << '\n';
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
        out << k;
        for (double v : t.samples[k]) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + file.string());
    }
}

Trajectory read_trajectory_csv(const fs::path& file, std::optional<std::size_t> expected_m) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("cannot open " + file.string());
    }
    const std::string name = file.string();
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(name, 1, "missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_commas(line);
    if (header.empty() || header.front() != "k") {
        throw ParseError(name, 1, "header must start with 'k'");
    }
    const std::size_t m = header.size() - 1;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] != "y_" + std::to_string(i)) {
            throw ParseError(name, 1, "header field " + std::to_string(i + 1) + " must be 'y_" + std::to_string(i) + "'");
        }
    }
    if (expected_m && *expected_m != m) {
        throw ParseError(name, 1, "header declares " + std::to_string(m) + " outputs, manifest says " +
                                      std::to_string(*expected_m));
    }

    Trajectory t;
    std::size_t line_no = 1;
    long long prev_k = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_commas(line);
        if (fields.size() != m + 1) {
            throw ParseError(name, line_no, "expected " + std::to_string(m) + " values, got " +
                                                std::to_string(fields.size() - 1));
        }
        const double k_value = parse_double_field(fields[0], name, line_no);
        const auto k = static_cast<long long>(k_value);
        if (static_cast<double>(k) != k_value || k <= prev_k) {
            throw ParseError(name, line_no, "field k must be an increasing integer");
        }
        prev_k = k;
        Vec y(m);
        for (std::size_t i = 0; i < m; ++i) {
            y[i] = parse_double_field(fields[i + 1], name, line_no);
        }
        t.samples.push_back(std::move(y));
    }
    return t;
}

void save_dataset(const TrajectoryDataset& d, const fs::path& dir) {
    d.validate();
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = kFormatTag;
    manifest["m"] = d.m;
    manifest["n_y"] = d.n_y;
    manifest["p"] = to_string(d.p);
    manifest["eps_w"] = d.noise.eps_w;
    manifest["eps_v"] = d.noise.eps_v;
    manifest["domain"] = {{"lower", d.domain.lower}, {"upper", d.domain.upper}};
    json files = json::array();
    for (std::size_t l = 0; l < d.trajectories.size(); ++l) {
        char name[32];
        std::snprintf(name, sizeof(name), "traj_%04zu.csv", l);
        files.push_back(name);
        write_trajectory_csv(d.trajectories[l], dir / name);
    }
    manifest["trajectories"] = files;
    manifest["seed"] = d.seed ? json(*d.seed) : json(nullptr);
    manifest["metadata"] = d.metadata;

    std::ofstream out(dir / kManifestName);
    if (!out) {
        throw std::runtime_error("cannot write " + (dir / kManifestName).string());
    }
    out << manifest.dump(2) << '\n';
}

TrajectoryDataset load_dataset(const fs::path& dir) {
    const fs::path manifest_path = dir / kManifestName;
    const std::string name = manifest_path.string();
    const std::string text = read_file(manifest_path);

    json manifest;
    try {
        manifest = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(name, line_of_offset(text, e.byte), e.what());
    }

    auto field = [&](const char* key) -> const json& {
        if (!manifest.contains(key)) {
            throw ParseError(name, 1, std::string("missing field '") + key + "'");
        }
        return manifest.at(key);
    };

    TrajectoryDataset d;
    d.m = get_field<std::size_t>(name, text, "m", field("m"));
    d.n_y = get_field<std::size_t>(name, text, "n_y", field("n_y"));
    try {
        d.p = parse_norm(get_field<std::string>(name, text, "p", field("p")));
    } catch (const InvalidInput& e) {
        throw ParseError(name, line_of_key(text, "p"), std::string("field 'p': ") + e.what());
    }
    d.noise.eps_w = get_field<Vec>(name, text, "eps_w", field("eps_w"));
    d.noise.eps_v = get_field<Vec>(name, text, "eps_v", field("eps_v"));
    const json& domain = field("domain");
    if (!domain.is_object() || !domain.contains("lower") || !domain.contains("upper")) {
        throw ParseError(name, line_of_key(text, "domain"), "field 'domain' needs 'lower' and 'upper'");
    }
    d.domain.lower = get_field<Vec>(name, text, "lower", domain.at("lower"));
    d.domain.upper = get_field<Vec>(name, text, "upper", domain.at("upper"));
    if (manifest.contains("seed") && !manifest["seed"].is_null()) {
        d.seed = get_field<std::uint64_t>(name, text, "seed", manifest["seed"]);
    }
    if (manifest.contains("metadata")) {
        d.metadata = get_field<std::map<std::string, std::string>>(name, text, "metadata", manifest["metadata"]);
    }

    try {
        d.noise.validate(d.m);
        d.domain.validate(d.m);
    } catch (const InvalidInput& e) {
        throw ParseError(name, 1, e.what());
    }

    const json& files = field("trajectories");
    if (!files.is_array()) {
        throw ParseError(name, line_of_key(text, "trajectories"), "field 'trajectories' must be an array");
    }
    for (const auto& f : files) {
        d.trajectories.push_back(read_trajectory_csv(dir / f.get<std::string>(), d.m));
    }
    d.validate();
    return d;
}

}  // namespace lipinval

#include "lipinval/swarmsim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "lipinval/errors.hpp"

namespace lipinval {

namespace {

Vec noise_draw(const Vec& bounds, std::mt19937_64& rng) {
    Vec out(bounds.size());
    for (std::size_t c = 0; c < bounds.size(); ++c) {
        std::uniform_real_distribution<double> u(-bounds[c], bounds[c]);
        out[c] = bounds[c] > 0.0 ? u(rng) : 0.0;
        if (std::abs(out[c]) > bounds[c]) {
            throw std::logic_error("noise draw outside its bound");
        }
    }
    return out;
}

std::string config_json(const SwarmConfig& cfg) {
    nlohmann::json j;
    j["num_agents"] = cfg.num_agents;
    j["wheelbase"] = cfg.wheelbase;
    j["speed"] = cfg.speed;
    j["dt"] = cfg.dt;
    j["kp"] = cfg.kp;
    j["steer_limit"] = cfg.steer_limit;
    j["process_noise"] = cfg.process_noise;
    j["meas_noise"] = cfg.meas_noise;
    nlohmann::json init = nlohmann::json::array();
    for (const auto& s : cfg.initial_states) {
        init.push_back({s.px, s.py, s.theta});
    }
    j["initial_states"] = init;
    j["horizon"] = cfg.horizon;
    j["centroid_mode"] = cfg.centroid_mode == CentroidMode::Dynamic ? "dynamic" : "fixed";
    if (cfg.centroid_mode == CentroidMode::Fixed) {
        j["centroid"] = {cfg.centroid_x, cfg.centroid_y};
    }
    j["seed"] = cfg.seed;
    j["randomize_init"] = cfg.randomize_init;
    j["init_position_spread"] = cfg.init_position_spread;
    j["init_heading_spread"] = cfg.init_heading_spread;
    return j.dump();
}

}  // namespace

void SwarmConfig::validate() const {
    if (num_agents == 0) {
        throw InvalidInput("swarm: num_agents must be positive");
    }
    if (!(dt > 0.0) || !(steer_limit > 0.0) || !(steer_limit < std::numbers::pi / 2.0) || !(wheelbase > 0.0)) {
        throw InvalidInput("swarm: dt, wheelbase must be positive and steer_limit in (0, pi/2)");
    }
    if (initial_states.size() != num_agents) {
        throw InvalidInput("swarm: need one initial state per agent");
    }
    if (process_noise.size() != 3 || meas_noise.size() != 3) {
        throw InvalidInput("swarm: noise bounds need 3 entries (p_x, p_y, theta)");
    }
    for (double b : process_noise) {
        if (!(b >= 0.0)) {
            throw InvalidInput("swarm: negative process-noise bound");
        }
    }
    for (double b : meas_noise) {
        if (!(b >= 0.0)) {
            throw InvalidInput("swarm: negative measurement-noise bound");
        }
    }
    if (init_position_spread < 0.0 || init_heading_spread < 0.0) {
        throw InvalidInput("swarm: negative initial-state spread");
    }
}

SwarmConfig benchmark_swarm_config() {
    SwarmConfig cfg;
    cfg.randomize_init = true;
    cfg.init_position_spread = 0.0;
    cfg.init_heading_spread = 0.4;
    return cfg;
}

double steering(const SwarmConfig& cfg, std::span<const AgentState> swarm, std::size_t agent) {
    double cx = cfg.centroid_x;
    double cy = cfg.centroid_y;
    if (cfg.centroid_mode == CentroidMode::Dynamic) {
        cx = 0.0;
        cy = 0.0;
        for (const auto& a : swarm) {
            cx += a.px;
            cy += a.py;
        }
        cx /= static_cast<double>(swarm.size());
        cy /= static_cast<double>(swarm.size());
    }
    const auto& self = swarm[agent];
    const double desired = std::atan2(cy - self.py, cx - self.px);
    return std::clamp(cfg.kp * (desired - self.theta), -cfg.steer_limit, cfg.steer_limit);
}

std::vector<AgentState> step(const SwarmConfig& cfg, std::span<const AgentState> swarm, std::mt19937_64* rng) {
    std::vector<AgentState> next(swarm.size());
    for (std::size_t a = 0; a < swarm.size(); ++a) {
        const double u_phi = steering(cfg, swarm, a);
        const auto& s = swarm[a];
        auto& n = next[a];
        n.px = s.px + cfg.speed * std::cos(s.theta) * cfg.dt;
        n.py = s.py + cfg.speed * std::sin(s.theta) * cfg.dt;
        n.theta = s.theta + cfg.speed / cfg.wheelbase * std::tan(u_phi) * cfg.dt;
        if (rng != nullptr) {
            const Vec w = noise_draw(cfg.process_noise, *rng);
            n.px += w[0];
            n.py += w[1];
            n.theta += w[2];
        }
    }
    return next;
}

std::vector<AgentState> initial_states_for(const SwarmConfig& cfg) {
    std::vector<AgentState> init = cfg.initial_states;
    if (cfg.randomize_init) {
        // Separate stream from the noise draws so both are reproducible on their own.
        std::mt19937_64 rng(trajectory_seed(cfg.seed, 0xA11CE));
        const Vec spread{cfg.init_position_spread, cfg.init_position_spread, cfg.init_heading_spread};
        for (auto& s : init) {
            const Vec d = noise_draw(spread, rng);
            s.px += d[0];
            s.py += d[1];
            s.theta += d[2];
        }
    }
    return init;
}

std::vector<std::vector<AgentState>> simulate_states(const SwarmConfig& cfg, bool noisy) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::vector<AgentState>> states;
    if (cfg.horizon == 0) {
        return states;
    }
    states.push_back(initial_states_for(cfg));
    while (states.size() < cfg.horizon) {
        states.push_back(step(cfg, states.back(), noisy ? &rng : nullptr));
    }
    return states;
}

Trajectory simulate(const SwarmConfig& cfg) {
    cfg.validate();
    // Process and measurement noise come from distinct streams of the same seed.
    const auto states = simulate_states(cfg, true);
    std::mt19937_64 meas(trajectory_seed(cfg.seed, 0x5EED));
    Trajectory t;
    t.samples.reserve(states.size());
    for (const auto& swarm : states) {
        Vec y;
        y.reserve(cfg.output_dim());
        for (const auto& a : swarm) {
            const Vec v = noise_draw(cfg.meas_noise, meas);
            y.push_back(a.px + v[0]);
            y.push_back(a.py + v[1]);
            y.push_back(a.theta + v[2]);
        }
        t.samples.push_back(std::move(y));
    }
    return t;
}

OutputDomain swarm_domain(const SwarmConfig& cfg) {
    cfg.validate();
    const double duration = cfg.dt * static_cast<double>(cfg.horizon);
    const double travel = cfg.speed * duration + cfg.init_position_spread + 1.0;
    const double turn = cfg.speed / cfg.wheelbase * std::tan(cfg.steer_limit) * duration + cfg.init_heading_spread + 0.5;
    OutputDomain d;
    for (const auto& s : cfg.initial_states) {
        d.lower.insert(d.lower.end(), {s.px - travel, s.py - travel, s.theta - turn});
        d.upper.insert(d.upper.end(), {s.px + travel, s.py + travel, s.theta + turn});
    }
    return d;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::size_t index) {
    std::uint64_t z = master + (static_cast<std::uint64_t>(index) + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrajectoryDataset make_swarm_dataset(const SwarmConfig& cfg, std::size_t num_traj) {
    cfg.validate();
    TrajectoryDataset d;
    d.m = cfg.output_dim();
    d.n_y = 1;
    d.p = Norm::Inf;
    d.seed = cfg.seed;
    for (std::size_t a = 0; a < cfg.num_agents; ++a) {
        d.noise.eps_w.insert(d.noise.eps_w.end(), cfg.process_noise.begin(), cfg.process_noise.end());
        d.noise.eps_v.insert(d.noise.eps_v.end(), cfg.meas_noise.begin(), cfg.meas_noise.end());
    }
    d.domain = swarm_domain(cfg);
    std::string seeds;
    for (std::size_t t = 0; t < num_traj; ++t) {
        SwarmConfig one = cfg;
        one.seed = trajectory_seed(cfg.seed, t);
        d.trajectories.push_back(simulate(one));
        seeds += (t == 0 ? "" : ",") + std::to_string(one.seed);
    }
    d.metadata["generator"] = "swarm";
    d.metadata["kp"] = format_double(cfg.kp);
    d.metadata["trajectory_seeds"] = seeds;
    d.metadata["config"] = config_json(cfg);
    return d;
}

TrajectoryDataset generate_benchmark(double kp, std::size_t num_traj, SwarmConfig cfg, const std::filesystem::path& out_dir) {
    cfg.kp = kp;
    TrajectoryDataset d = make_swarm_dataset(cfg, num_traj);
    save_dataset(d, out_dir);
    return d;
}

}  // namespace lipinval

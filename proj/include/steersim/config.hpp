#pragma once

// Run configuration: JSON round trip, named presets, and the config hash that
// every output file embeds.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "steersim/model.hpp"

namespace steersim {

enum class NoiseMode { both, phase, amplitude };

inline std::string to_string(NoiseMode m) {
    switch (m) {
        case NoiseMode::both: return "both";
        case NoiseMode::phase: return "phase";
        case NoiseMode::amplitude: return "amplitude";
    }
    return "both";
}

inline NoiseMode noise_mode_from_string(const std::string& s) {
    if (s == "both") return NoiseMode::both;
    if (s == "phase") return NoiseMode::phase;
    if (s == "amplitude") return NoiseMode::amplitude;
    throw std::invalid_argument("unknown noise mode: " + s + " (want both|phase|amplitude)");
}

struct GammaGrid {
    double min = 1e-3;
    double max = 10.0;
    int count = 17;
};

struct RunConfig {
    ModelSpec model;
    std::string protocol = "n1-target-zero";
    int n_steps = 3000;
    double window_fraction = 0.2;
    int n_trajectories = 500;
    int n_walkers = 100;
    GammaGrid grid;
    NoiseMode noise = NoiseMode::both;
    std::uint64_t master_seed = 20240612;
    int snapshot_stride = 10;
    int workers = 0;  // 0 = hardware concurrency
    std::string out_dir = "out";

    int n_qubits_from_protocol() const {
        if (protocol.rfind("n1-", 0) == 0) return 1;
        if (protocol.rfind("n2-", 0) == 0) return 2;
        throw std::invalid_argument("unknown protocol name: " + protocol);
    }

    void validate(bool for_sweep) const {
        ModelSpec m = model;
        m.n_qubits = n_qubits_from_protocol();
        m.validate();
        if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
        if (n_trajectories < 1) throw std::invalid_argument("n_trajectories must be >= 1");
        if (n_walkers < 1) throw std::invalid_argument("n_walkers must be >= 1");
        if (!(window_fraction > 0.0) || window_fraction > 1.0)
            throw std::invalid_argument("window_fraction must be in (0,1]");
        if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
        if (for_sweep) {
            if (grid.count < 5) throw std::invalid_argument("sweep grid needs at least 5 points");
            if (!(grid.min > 0) || !(grid.max > grid.min))
                throw std::invalid_argument("sweep grid must satisfy 0 < min < max");
        }
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["protocol"] = c.protocol;
    j["delta"] = c.model.delta;
    j["transmission"] = c.model.transmission;
    j["phase_over_pi"] = c.model.phase / kPi;
    j["coupling"] = c.model.coupling;
    j["steer_strength"] = c.model.steer_strength;
    j["dt"] = c.model.dt;
    j["gamma_ad"] = c.model.gamma_ad;
    j["gamma_pd"] = c.model.gamma_pd;
    j["asymmetry"] = c.model.asymmetry;
    j["n_steps"] = c.n_steps;
    j["window_fraction"] = c.window_fraction;
    j["n_trajectories"] = c.n_trajectories;
    j["n_walkers"] = c.n_walkers;
    j["gamma_grid"] = {{"min", c.grid.min}, {"max", c.grid.max}, {"count", c.grid.count}};
    j["noise"] = to_string(c.noise);
    j["master_seed"] = c.master_seed;
    j["snapshot_stride"] = c.snapshot_stride;
    j["workers"] = c.workers;
    j["out_dir"] = c.out_dir;
    return j;
}

inline RunConfig config_from_json(const nlohmann::json& j, RunConfig c = {}) {
    const auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
    };
    get("protocol", c.protocol);
    get("delta", c.model.delta);
    get("transmission", c.model.transmission);
    if (j.contains("phase_over_pi"))
        c.model.phase = j.at("phase_over_pi").get<double>() * kPi;
    else if (j.contains("phase"))
        c.model.phase = j.at("phase").get<double>();
    get("coupling", c.model.coupling);
    get("steer_strength", c.model.steer_strength);
    get("dt", c.model.dt);
    get("gamma_ad", c.model.gamma_ad);
    get("gamma_pd", c.model.gamma_pd);
    get("asymmetry", c.model.asymmetry);
    get("n_steps", c.n_steps);
    get("window_fraction", c.window_fraction);
    get("n_trajectories", c.n_trajectories);
    get("n_walkers", c.n_walkers);
    if (j.contains("gamma_grid")) {
        const auto& g = j.at("gamma_grid");
        c.grid.min = g.value("min", c.grid.min);
        c.grid.max = g.value("max", c.grid.max);
        c.grid.count = g.value("count", c.grid.count);
    }
    if (j.contains("noise")) c.noise = noise_mode_from_string(j.at("noise").get<std::string>());
    get("master_seed", c.master_seed);
    get("snapshot_stride", c.snapshot_stride);
    get("workers", c.workers);
    get("out_dir", c.out_dir);
    c.model.n_qubits = c.n_qubits_from_protocol();
    return c;
}

// FNV-1a over the canonical JSON dump (keys are emitted sorted).
inline std::uint64_t config_hash(const RunConfig& c) {
    const std::string s = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash_hex(const RunConfig& c) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(config_hash(c)));
    return buf;
}

// Named presets. "paper" mirrors the publication-scale statistics; "smoke"
// is the reduced CI-scale variant (not publication quality). Sweep presets
// hold the total simulated time fixed (n_steps * dt = const) so curves for
// different dt are comparable on the same gamma axis.
inline RunConfig preset_config(const std::string& preset, const std::string& protocol) {
    RunConfig c;
    c.protocol = protocol;
    const int nq = c.n_qubits_from_protocol();
    c.model.n_qubits = nq;
    c.model.delta = 1.0;
    c.model.transmission = 0.98;
    c.model.phase = 0.97 * kPi;
    c.model.steer_strength = 3.0;
    c.model.coupling = nq == 1 ? 0.98 : 0.49;
    c.model.dt = 0.03;
    c.model.gamma_ad = 1e-3;
    c.model.gamma_pd = 1e-3;
    const double sim_time = nq == 1 ? 10.0 : 15.0;
    c.n_steps = static_cast<int>(std::lround(sim_time / c.model.dt));
    c.window_fraction = 0.2;
    c.snapshot_stride = 5;
    if (preset == "paper") {
        c.n_trajectories = 500;
        c.n_walkers = 100;
        c.grid = {1e-3, 10.0, 17};
    } else if (preset == "smoke") {
        c.n_trajectories = 50;
        c.n_walkers = 20;
        c.grid = {1e-3, 10.0, 9};
    } else {
        throw std::invalid_argument("unknown preset: " + preset + " (want paper|smoke)");
    }
    return c;
}

}  // namespace steersim

#pragma once

// Sweep orchestration and file output. Trajectories are independent jobs
// dispatched to a bounded worker pool; results land in slots indexed by
// (gamma index, trajectory index), never by completion order, so output
// files are bit-identical for a fixed (config, master_seed) regardless of
// worker count.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "steersim/config.hpp"
#include "steersim/diagnostics.hpp"
#include "steersim/trajectory.hpp"
#include "steersim/version.hpp"

namespace steersim {

inline int resolve_workers(const RunConfig& c) {
    if (c.workers > 0) return c.workers;
    if (const char* env = std::getenv("STEERSIM_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n_jobs) on up to n_workers threads. Exceptions are
// captured per job and returned as messages.
inline std::vector<std::optional<std::string>> parallel_for(
    int n_jobs, int n_workers, const std::function<void(int)>& fn) {
    std::vector<std::optional<std::string>> errors(static_cast<std::size_t>(n_jobs));
    if (n_jobs == 0) return errors;
    std::atomic<int> next{0};
    const int n_threads = std::max(1, std::min(n_workers, n_jobs));
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_jobs) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = "unknown error";
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_threads));
        for (int k = 0; k < n_threads; ++k) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return errors;
}

inline std::vector<double> gamma_grid_values(const GammaGrid& g) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.count));
    for (int k = 0; k < g.count; ++k) {
        const double f = g.count == 1 ? 0.0 : static_cast<double>(k) / (g.count - 1);
        out.push_back(g.min * std::pow(g.max / g.min, f));
    }
    return out;
}

inline void apply_noise_mode(ModelSpec& m, NoiseMode mode, double gamma) {
    switch (mode) {
        case NoiseMode::both: m.gamma_ad = gamma; m.gamma_pd = gamma; break;
        case NoiseMode::phase: m.gamma_ad = 0.0; m.gamma_pd = gamma; break;
        case NoiseMode::amplitude: m.gamma_ad = gamma; m.gamma_pd = 0.0; break;
    }
}

template <int NQ>
Protocol<NQ> protocol_from_name(const std::string& name) {
    if constexpr (NQ == 1) {
        if (name == "n1-target-zero") return protocol_n1_target_zero();
    } else {
        if (name == "n2-bell-0+") return protocol_n2_bell(0, +1);
        if (name == "n2-bell-0-") return protocol_n2_bell(0, -1);
        if (name == "n2-bell-1+") return protocol_n2_bell(1, +1);
        if (name == "n2-bell-1-") return protocol_n2_bell(1, -1);
    }
    throw std::invalid_argument("unknown protocol name: " + name);
}

struct JobError {
    int gamma_index = -1;
    int trajectory_index = -1;
    std::string message;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<ThresholdEstimate> threshold;
    std::string threshold_note;
    std::vector<JobError> errors;
    double wall_seconds = 0;
};

// All trajectories of one sweep point; slot-indexed results.
template <int NQ>
std::vector<TrajectoryRecord<NQ>> run_point(const ModelSpec& spec, const Protocol<NQ>& protocol,
                                            const RunConfig& cfg, std::uint64_t base_traj_id,
                                            int n_workers, std::vector<JobError>* errors_out,
                                            int gamma_index = -1) {
    const StepOperators<NQ> ops(spec);
    const RngPolicy rng{cfg.master_seed};
    std::vector<TrajectoryRecord<NQ>> records(static_cast<std::size_t>(cfg.n_trajectories));
    const auto errs = parallel_for(cfg.n_trajectories, n_workers, [&](int k) {
        TrajectoryOptions<NQ> opt;
        opt.n_steps = cfg.n_steps;
        opt.n_walkers = cfg.n_walkers;
        opt.trajectory_id = base_traj_id + static_cast<std::uint64_t>(k);
        opt.snapshot_stride = cfg.snapshot_stride;
        records[static_cast<std::size_t>(k)] = evolve_trajectory<NQ>(ops, protocol, opt, rng);
    });
    for (int k = 0; k < cfg.n_trajectories; ++k) {
        if (errs[static_cast<std::size_t>(k)] && errors_out)
            errors_out->push_back({gamma_index, k, *errs[static_cast<std::size_t>(k)]});
    }
    return records;
}

template <int NQ>
SweepResult run_sweep_impl(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto protocol = protocol_from_name<NQ>(cfg.protocol);
    const auto gammas = gamma_grid_values(cfg.grid);
    const int n_workers = resolve_workers(cfg);

    SweepResult result;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        ModelSpec spec = cfg.model;
        spec.n_qubits = NQ;
        apply_noise_mode(spec, cfg.noise, gammas[gi]);
        const std::uint64_t base_id = static_cast<std::uint64_t>(gi) *
                                      static_cast<std::uint64_t>(cfg.n_trajectories);
        const auto records =
            run_point<NQ>(spec, protocol, cfg, base_id, n_workers, &result.errors,
                          static_cast<int>(gi));
        SweepPoint pt = late_time_stats<NQ>(std::span<const TrajectoryRecord<NQ>>(records),
                                            cfg.window_fraction);
        pt.gamma = gammas[gi];
        result.points.push_back(pt);
    }
    try {
        result.threshold = locate_threshold(result.points);
    } catch (const std::exception& e) {
        result.threshold_note = e.what();
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline SweepResult run_sweep(const RunConfig& cfg) {
    cfg.validate(true);
    return cfg.n_qubits_from_protocol() == 1 ? run_sweep_impl<1>(cfg) : run_sweep_impl<2>(cfg);
}

// ---- file output -------------------------------------------------------------

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <int NQ>
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord<NQ>& rec,
                          const std::string& hash_hex) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "# config_hash=" << hash_hex << " version=" << kVersion << "\n";
    f << "step,time,alpha,xi,eta,F_target";
    if constexpr (NQ == 1)
        f << ",F_ket0,F_ket1,r_x,r_y,r_z";
    else
        f << ",F_bell_0p,F_bell_0m,F_bell_1p,F_bell_1m";
    f << ",purity_walker_avg\n";
    for (int t = 0; t < rec.n_steps; ++t) {
        const auto u = static_cast<std::size_t>(t);
        f << (t + 1) << ',' << fmt17((t + 1) * rec.dt) << ',' << rec.choice_index[u] << ','
          << static_cast<int>(rec.xi[u]) << ',' << static_cast<int>(rec.eta[u]) << ','
          << fmt17(rec.f_target[u]);
        for (int r = 0; r < rec.n_refs; ++r)
            f << ',' << fmt17(rec.f_refs[u * static_cast<std::size_t>(rec.n_refs) +
                                         static_cast<std::size_t>(r)]);
        if constexpr (NQ == 1)
            f << ',' << fmt17(rec.bloch[u][0]) << ',' << fmt17(rec.bloch[u][1]) << ','
              << fmt17(rec.bloch[u][2]);
        f << ',' << fmt17(rec.purity_inst[u]) << '\n';
    }
}

inline void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result,
                            const std::string& hash_hex) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "# config_hash=" << hash_hex << " version=" << kVersion << "\n";
    f << "gamma,mean_F,var_F,std_F,purity,n_traj\n";
    for (const auto& p : result.points) {
        f << fmt17(p.gamma) << ',' << fmt17(p.mean_fidelity) << ',' << fmt17(p.fidelity_variance)
          << ',' << fmt17(std::sqrt(p.fidelity_variance)) << ',' << fmt17(p.purity) << ','
          << p.n_trajectories << '\n';
    }
}

inline void write_sweep_json(const std::filesystem::path& path, const SweepResult& result,
                             const RunConfig& cfg) {
    nlohmann::json j;
    j["provenance"] = {{"config_hash", config_hash_hex(cfg)},
                       {"master_seed", cfg.master_seed},
                       {"version", kVersion},
                       {"wall_seconds", result.wall_seconds}};
    j["config"] = to_json(cfg);
    j["partial"] = !result.errors.empty();
    for (const auto& e : result.errors)
        j["errors"].push_back({{"gamma_index", e.gamma_index},
                               {"trajectory", e.trajectory_index},
                               {"message", e.message}});
    for (const auto& p : result.points)
        j["points"].push_back({{"gamma", p.gamma},
                               {"mean_F", p.mean_fidelity},
                               {"var_F", p.fidelity_variance},
                               {"std_F", std::sqrt(p.fidelity_variance)},
                               {"purity", p.purity},
                               {"n_traj", p.n_trajectories}});
    if (result.threshold) {
        j["threshold"] = {{"gamma_c", result.threshold->gamma_c},
                          {"min_purity", result.threshold->min_purity},
                          {"grid_index", result.threshold->grid_index}};
    } else {
        j["threshold"] = nullptr;
        j["threshold_note"] = result.threshold_note;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

struct SweepCsv {
    std::string hash_line;
    std::vector<SweepPoint> points;
};

inline SweepCsv read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    SweepCsv out;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            out.hash_line = line;
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // column header
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 6) throw std::runtime_error("malformed sweep CSV row: " + line);
        SweepPoint p;
        p.gamma = std::stod(cells[0]);
        p.mean_fidelity = std::stod(cells[1]);
        p.fidelity_variance = std::stod(cells[2]);
        p.purity = std::stod(cells[4]);
        p.n_trajectories = std::stoi(cells[5]);
        out.points.push_back(p);
    }
    if (out.points.empty()) throw std::runtime_error("sweep CSV has no data rows");
    return out;
}

// ---- single-point run ---------------------------------------------------------

template <int NQ>
void run_single_impl(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto protocol = protocol_from_name<NQ>(cfg.protocol);
    ModelSpec spec = cfg.model;
    spec.n_qubits = NQ;
    const int n_workers = resolve_workers(cfg);
    std::vector<JobError> errors;
    const auto records = run_point<NQ>(spec, protocol, cfg, 0, n_workers, &errors);
    if (!errors.empty())
        throw std::runtime_error("trajectory failed: " + errors.front().message);

    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    const std::string hash = config_hash_hex(cfg);
    for (std::size_t k = 0; k < records.size(); ++k) {
        char name[64];
        std::snprintf(name, sizeof name, "trajectory_%03zu.csv", k);
        write_trajectory_csv<NQ>(dir / name, records[k], hash);
    }

    nlohmann::json j;
    j["provenance"] = {{"config_hash", hash},
                       {"master_seed", cfg.master_seed},
                       {"version", kVersion},
                       {"wall_seconds", std::chrono::duration<double>(
                                            std::chrono::steady_clock::now() - t0)
                                            .count()}};
    j["config"] = to_json(cfg);
    if (records.size() >= 2) {
        const auto pt = late_time_stats<NQ>(std::span<const TrajectoryRecord<NQ>>(records),
                                            cfg.window_fraction);
        j["late_time"] = {{"mean_F", pt.mean_fidelity},
                          {"var_F", pt.fidelity_variance},
                          {"purity", pt.purity},
                          {"n_traj", pt.n_trajectories}};
    } else if (!records.empty() && records[0].n_steps > 0) {
        const auto& rec = records[0];
        const int win = std::max(1, static_cast<int>(std::lround(cfg.window_fraction * rec.n_steps)));
        double s = 0;
        for (int t = rec.n_steps - win; t < rec.n_steps; ++t)
            s += rec.f_target[static_cast<std::size_t>(t)];
        j["late_time"] = {{"mean_F", s / win}, {"n_traj", 1}};
    }
    std::ofstream f(dir / "summary.json");
    if (!f) throw std::runtime_error("cannot write summary.json");
    f << j.dump(2) << '\n';
}

inline void run_single(const RunConfig& cfg) {
    cfg.validate(false);
    if (cfg.n_qubits_from_protocol() == 1)
        run_single_impl<1>(cfg);
    else
        run_single_impl<2>(cfg);
}

inline void write_sweep_files(const RunConfig& cfg, const SweepResult& result) {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_sweep_csv(dir / "sweep.csv", result, config_hash_hex(cfg));
    write_sweep_json(dir / "sweep.json", result, cfg);
}

}  // namespace steersim

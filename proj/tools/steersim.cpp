// Command line front end: single runs, error-rate sweeps, the fast
// verification suite, and re-analysis of existing sweep files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "steersim/config.hpp"
#include "steersim/harness.hpp"
#include "steersim/verify.hpp"
#include "steersim/version.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string preset;
    std::string protocol;
    std::string noise;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> gamma;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--preset", f.preset, "named preset: paper|smoke")
        ->check(CLI::IsMember({"paper", "smoke"}));
    cmd->add_option("--protocol", f.protocol,
                    "n1-target-zero | n2-bell-0+ | n2-bell-0- | n2-bell-1+ | n2-bell-1-");
    cmd->add_option("--noise", f.noise, "noise mode: both|phase|amplitude")
        ->check(CLI::IsMember({"both", "phase", "amplitude"}));
    cmd->add_option("--seed", f.seed, "master seed (64-bit)");
    cmd->add_option("--workers", f.workers, "worker thread count (env STEERSIM_WORKERS)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--gamma", f.gamma, "error rate applied through the noise mode");
}

steersim::RunConfig build_config(const CommonFlags& f) {
    using namespace steersim;
    nlohmann::json file_json;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::invalid_argument("cannot open config file: " + f.config_path);
        in >> file_json;
    }
    std::string protocol = "n1-target-zero";
    if (file_json.contains("protocol")) protocol = file_json["protocol"].get<std::string>();
    if (!f.protocol.empty()) protocol = f.protocol;

    RunConfig cfg = f.preset.empty() ? RunConfig{} : preset_config(f.preset, protocol);
    cfg.protocol = protocol;
    cfg.model.n_qubits = cfg.n_qubits_from_protocol();
    if (!file_json.is_null() && !file_json.empty()) {
        cfg = config_from_json(file_json, cfg);
        cfg.protocol = protocol;
        cfg.model.n_qubits = cfg.n_qubits_from_protocol();
    }
    if (!f.noise.empty()) cfg.noise = noise_mode_from_string(f.noise);
    if (f.seed) cfg.master_seed = *f.seed;
    if (f.workers) cfg.workers = *f.workers;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.gamma) apply_noise_mode(cfg.model, cfg.noise, *f.gamma);
    for (const auto& w : cfg.model.weak_limit_warnings()) std::cerr << "warning: " << w << '\n';
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"active steering simulator for one and two noisy qubits"};
    app.set_version_flag("--version", steersim::kVersion);
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags;
    auto* run_cmd = app.add_subcommand("run", "run trajectories at a single error rate");
    add_common(run_cmd, run_flags);
    auto* sweep_cmd = app.add_subcommand("sweep", "run an error-rate sweep over a log grid");
    add_common(sweep_cmd, sweep_flags);

    std::uint64_t verify_seed = 20240612;
    auto* verify_cmd = app.add_subcommand("verify", "run the fast invariant/oracle suites");
    verify_cmd->add_option("--seed", verify_seed, "master seed for the suites");

    std::string threshold_csv;
    auto* thr_cmd = app.add_subcommand("locate-threshold", "re-analyze an existing sweep CSV");
    thr_cmd->add_option("csv", threshold_csv, "sweep.csv produced by the sweep subcommand")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto cfg = build_config(run_flags);
            steersim::run_single(cfg);
            std::cout << "wrote " << cfg.n_trajectories << " trajectory file(s) and summary.json to "
                      << cfg.out_dir << '\n';
        } else if (sweep_cmd->parsed()) {
            const auto cfg = build_config(sweep_flags);
            const auto result = steersim::run_sweep(cfg);
            steersim::write_sweep_files(cfg, result);
            std::cout << "sweep finished in " << result.wall_seconds << " s, " << result.points.size()
                      << " points -> " << cfg.out_dir << "/sweep.{csv,json}\n";
            if (result.threshold) {
                std::cout << "located threshold gamma_c/Delta = " << result.threshold->gamma_c
                          << " (min purity " << result.threshold->min_purity << ")\n";
            } else {
                std::cout << "threshold not located: " << result.threshold_note << '\n';
            }
            if (!result.errors.empty()) {
                std::cerr << result.errors.size() << " trajectory job(s) failed; results are partial\n";
                return 2;
            }
        } else if (verify_cmd->parsed()) {
            steersim::VerifyOptions opt;
            opt.seed = verify_seed;
            const auto results = steersim::run_verification(opt);
            bool all = true;
            for (const auto& r : results) {
                std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                            r.detail.c_str());
                all = all && r.pass;
            }
            if (!all) return 3;
        } else if (thr_cmd->parsed()) {
            const auto csv = steersim::read_sweep_csv(threshold_csv);
            const auto est = steersim::locate_threshold(csv.points);
            nlohmann::json j{{"gamma_c", est.gamma_c},
                             {"min_purity", est.min_purity},
                             {"grid_index", est.grid_index}};
            std::cout << j.dump(2) << '\n';
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

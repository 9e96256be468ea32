#pragma once

// Fast invariant and oracle suites behind the `verify` subcommand. Each check
// returns a pass flag plus the measured residuals; the full set is meant to
// finish in well under a minute.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "steersim/diagnostics.hpp"
#include "steersim/harness.hpp"
#include "steersim/steering.hpp"

namespace steersim {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 20240612;
    double dt_inflation = 1.0;  // test hook: scales every dt in the Kraus check
    bool corrupt_axis = false;  // test hook: breaks sigma^s unitarity on purpose
};

namespace verify_detail {

inline ModelSpec base_spec_n1() {
    ModelSpec s;
    s.n_qubits = 1;
    s.transmission = 0.98;
    s.phase = 0.97 * kPi;
    s.coupling = 0.98;
    s.steer_strength = 3.0;
    s.dt = 0.01;
    return s;
}

template <typename T>
std::string fmt(const char* label, T v) {
    std::ostringstream os;
    os << label << "=" << v;
    return os.str();
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace verify_detail

// (a) First-order Kraus pair completeness: residual R = A0^dag A0 + A1^dag A1 - 1
// scales as dt^2 with the coefficient fixed by the model; the bound uses the
// exact leading coefficient with 1% slack, so higher-order contamination
// (dt no longer small) trips it.
inline CheckResult check_kraus_completeness(const VerifyOptions& opt) {
    CheckResult res{"kraus_completeness", false, ""};
    ModelSpec spec = verify_detail::base_spec_n1();
    const SteeringChoice choice = SteeringChoice::from_index(1, 1);  // +J sigma_x
    const std::vector<double> dts{1e-2, 1e-3, 1e-4};
    std::vector<double> lx, ly;
    bool bound_ok = true;
    double worst_ratio = 0;
    for (double dt0 : dts) {
        spec.dt = dt0 * opt.dt_inflation;
        const auto [a0, a1] = kraus_ops(spec, choice);
        const Mat2 r = matmul(dagger(a0), a0) + matmul(dagger(a1), a1) - Mat2::identity();
        const double rn = frobenius_norm(r);
        const double ea = andreev_energy(spec);
        const double lead = std::sqrt(2.0) * (ea * ea + spec.steer_strength * spec.steer_strength);
        const double bound = 1.01 * lead * spec.dt * spec.dt;
        worst_ratio = std::max(worst_ratio, rn / bound);
        if (rn > bound) bound_ok = false;
        lx.push_back(std::log(spec.dt));
        ly.push_back(std::log(rn));
    }
    const double expo = verify_detail::ls_slope(lx, ly);
    res.pass = bound_ok && std::abs(expo - 2.0) <= 0.1;
    std::ostringstream os;
    os << "fitted exponent=" << expo << " (want 2 +- 0.1), worst residual/bound=" << worst_ratio;
    res.detail = os.str();
    return res;
}

// (b) (sigma^s)^2 = 1 over random (transmission, phase) pairs.
inline CheckResult check_axis_unitarity(const VerifyOptions& opt) {
    CheckResult res{"axis_unitarity", false, ""};
    const RngPolicy rng{opt.seed};
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        ModelSpec spec = verify_detail::base_spec_n1();
        spec.transmission = 0.05 + 0.95 * rng.uniform(9001, static_cast<std::uint64_t>(k), 0, 0);
        spec.phase = 2.0 * kPi * rng.uniform(9001, static_cast<std::uint64_t>(k), 0, 1);
        if (andreev_energy(spec) < 1e-6) continue;  // stay clear of the singular corner
        Mat2 ss = supercurrent_axis(spec);
        if (opt.corrupt_axis) ss(0, 0) += 1e-6;
        worst = std::max(worst, max_abs_diff(matmul(ss, ss), Mat2::identity()));
    }
    res.pass = worst <= 1e-12;
    res.detail = verify_detail::fmt("max |(s^s)^2 - 1|", worst) + " (want <= 1e-12)";
    return res;
}

// (c) Walker-ensemble average against direct master-equation integration for
// a fixed outcome/choice script; MC convergence slope in n_w.
inline CheckResult check_sse_sme_oracle(const VerifyOptions& opt) {
    CheckResult res{"sse_sme_oracle", false, ""};
    ModelSpec spec = verify_detail::base_spec_n1();
    spec.gamma_ad = 0.2;
    spec.gamma_pd = 0.2;
    // weak steering in the script keeps the O(dt^2) difference between the
    // normalized pure-state map and the linear density-matrix map far below
    // the bath MC error this oracle measures
    spec.steer_strength = 0.3;
    const int n_steps = 200;
    std::vector<int> choices(n_steps);
    std::vector<Outcome> outcomes(n_steps);
    for (int t = 0; t < n_steps; ++t) {
        choices[static_cast<std::size_t>(t)] = t % kSteerOptions;
        outcomes[static_cast<std::size_t>(t)] = {t % 29 == 7 ? 1 : 0, +1};
    }
    const StepOperators<1> ops(spec);
    Vec2 plus;
    plus.a = {Complex(1 / std::sqrt(2.0)), Complex(1 / std::sqrt(2.0))};
    const auto sme = sme_integrate<1>(ops, outer(plus, plus), choices, outcomes);

    const RngPolicy rng{opt.seed};
    const std::vector<int> nws{10, 100, 1000};
    std::vector<double> lx, ly;
    bool within_bound = true;
    double worst_margin = 0;
    for (int nw : nws) {
        double tail_dev = 0;
        int tail_count = 0;
        const int reps = 3;
        for (int rep = 0; rep < reps; ++rep) {
            WalkerEnsemble<1> ens(nw, plus);
            const auto traj_id = static_cast<std::uint64_t>(7000 + 10 * rep + nw);
            for (int t = 0; t < n_steps; ++t) {
                const auto& h = ops.h_choice[static_cast<std::size_t>(choices[static_cast<std::size_t>(t)])];
                std::vector<double> draws(ops.errors.size());
                for (std::size_t w = 0; w < ens.walkers.size(); ++w) {
                    for (std::size_t g = 0; g < draws.size(); ++g)
                        draws[g] = rng.normal(traj_id, static_cast<std::uint64_t>(t), w, g);
                    StepInputs<1> in{h, ops.c_meas[0], ops.cdagc_meas[0],
                                     std::span<const StepOperators<1>::ErrorChannel>(ops.errors),
                                     outcomes[static_cast<std::size_t>(t)].xi,
                                     std::span<const double>(draws)};
                    ens.walkers[w] = sse_step<1>(ens.walkers[w], in, spec.dt);
                }
                const double dev =
                    frobenius_norm(ens.average_rho() - sme[static_cast<std::size_t>(t)]);
                const double bound = 5.0 / std::sqrt(static_cast<double>(nw));
                worst_margin = std::max(worst_margin, dev / bound);
                if (dev > bound) within_bound = false;
                if (t >= n_steps / 2) {
                    tail_dev += dev;
                    ++tail_count;
                }
            }
        }
        lx.push_back(std::log(static_cast<double>(nw)));
        ly.push_back(std::log(tail_dev / tail_count));
    }
    const double slope = verify_detail::ls_slope(lx, ly);
    res.pass = within_bound && std::abs(slope + 0.5) <= 0.15;
    std::ostringstream os;
    os << "convergence slope=" << slope << " (want -0.5 +- 0.15), worst dev/bound=" << worst_margin;
    res.detail = os.str();
    return res;
}

// (d) Bloch iteration against the density-matrix step, jumps included.
inline CheckResult check_bloch_crosscheck(const VerifyOptions& opt) {
    CheckResult res{"bloch_crosscheck", false, ""};
    const RngPolicy rng{opt.seed};
    const int n_steps = 100;
    double worst = 0;
    for (int variant = 0; variant < 3; ++variant) {
        ModelSpec spec = verify_detail::base_spec_n1();
        if (variant == 1) {
            spec.gamma_ad = 0.3;
            spec.gamma_pd = 0.5;
        } else if (variant == 2) {
            spec.gamma_ad = rng.uniform(4000, 0, 0, 0);
            spec.gamma_pd = rng.uniform(4000, 0, 0, 1);
        }
        std::vector<int> choices(n_steps);
        std::vector<Outcome> outcomes(n_steps);
        for (int t = 0; t < n_steps; ++t) {
            choices[static_cast<std::size_t>(t)] = (t * 3) % kSteerOptions;
            const bool jump = variant != 0 && t % 17 == 5;
            outcomes[static_cast<std::size_t>(t)] = {jump ? 1 : 0, +1};
        }
        worst = std::max(worst, bloch_vs_sme_crosscheck(spec, n_steps, choices, outcomes));
    }
    res.pass = worst <= 1e-10;
    res.detail = verify_detail::fmt("max |r_bloch - r_sme|", worst) + " (want <= 1e-10)";
    return res;
}

// (e1) Outcome probability tables on random density matrices.
inline CheckResult check_probability_normalization(const VerifyOptions& opt) {
    CheckResult res{"probability_normalization", false, ""};
    const RngPolicy rng{opt.seed};
    double worst = 0;
    try {
        for (int k = 0; k < 200; ++k) {
            // random rank-full density matrix via G G^dag
            Mat2 g;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    g(r, c) = Complex(rng.uniform(5100, static_cast<std::uint64_t>(k), r, 2 * c) - 0.5,
                                      rng.uniform(5100, static_cast<std::uint64_t>(k), r, 2 * c + 1) - 0.5);
            Mat2 rho = matmul(g, dagger(g));
            rho = (1.0 / trace(rho).real()) * rho;
            ModelSpec s1 = verify_detail::base_spec_n1();
            double sum = 0;
            for (const auto& e : outcome_probabilities<1>(rho, s1)) sum += e.p;
            worst = std::max(worst, std::abs(sum - 1.0));

            Mat4 g4;
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c)
                    g4(r, c) = Complex(rng.uniform(5200, static_cast<std::uint64_t>(k), r, 2 * c) - 0.5,
                                       rng.uniform(5200, static_cast<std::uint64_t>(k), r, 2 * c + 1) - 0.5);
            Mat4 rho4 = matmul(g4, dagger(g4));
            rho4 = (1.0 / trace(rho4).real()) * rho4;
            ModelSpec s2 = verify_detail::base_spec_n1();
            s2.n_qubits = 2;
            s2.coupling = 0.49;
            double sum4 = 0;
            for (const auto& e : outcome_probabilities<2>(rho4, s2)) sum4 += e.p;
            worst = std::max(worst, std::abs(sum4 - 1.0));
        }
        res.pass = worst <= 1e-10;
    } catch (const std::exception& e) {
        res.pass = false;
        res.detail = e.what();
        return res;
    }
    res.detail = verify_detail::fmt("max |sum(P) - 1|", worst) + " (want <= 1e-10)";
    return res;
}

// (e2) Trace preservation of the direct integrator over 1e4 steps.
inline CheckResult check_trace_preservation(const VerifyOptions&) {
    CheckResult res{"trace_preservation", false, ""};
    ModelSpec spec = verify_detail::base_spec_n1();
    spec.gamma_ad = 0.1;
    spec.gamma_pd = 0.1;
    const int n_steps = 10000;
    std::vector<int> choices(n_steps);
    std::vector<Outcome> outcomes(n_steps);
    for (int t = 0; t < n_steps; ++t) {
        choices[static_cast<std::size_t>(t)] = (t / 11) % kSteerOptions;
        outcomes[static_cast<std::size_t>(t)] = {t % 101 == 13 ? 1 : 0, +1};
    }
    const StepOperators<1> ops(spec);
    Vec2 plus;
    plus.a = {Complex(1 / std::sqrt(2.0)), Complex(1 / std::sqrt(2.0))};
    const auto traj = sme_integrate<1>(ops, outer(plus, plus), choices, outcomes);
    double worst = 0;
    for (const auto& rho : traj) worst = std::max(worst, std::abs(trace(rho).real() - 1.0));
    res.pass = worst <= 1e-8;
    res.detail = verify_detail::fmt("max |tr(rho)-1|", worst) + " (want <= 1e-8 over 1e4 steps)";
    return res;
}

// (e3) Walker norms and walker-average positivity along a noisy trajectory.
inline CheckResult check_walker_norms_positivity(const VerifyOptions& opt) {
    CheckResult res{"walker_norms_positivity", false, ""};
    ModelSpec spec = verify_detail::base_spec_n1();
    spec.dt = 0.03;
    spec.gamma_ad = 0.5;
    spec.gamma_pd = 0.5;
    const StepOperators<1> ops(spec);
    const auto protocol = protocol_n1_target_zero();
    const RngPolicy rng{opt.seed};
    WalkerEnsemble<1> ens(50, protocol.initial_state);
    double worst_norm = 0, worst_eig = 0;
    std::vector<double> draws(ops.errors.size());
    for (int t = 0; t < 300; ++t) {
        const Mat2 rho = ens.average_rho();
        const auto choice = choose_steering<1>(rho, protocol, ops);
        const auto oc = sample_outcome<1>(rho, ops, rng, 8800, static_cast<std::uint64_t>(t));
        const auto& h = ops.h_choice[static_cast<std::size_t>(choice.index(1))];
        for (std::size_t w = 0; w < ens.walkers.size(); ++w) {
            for (std::size_t g = 0; g < draws.size(); ++g)
                draws[g] = rng.normal(8800, static_cast<std::uint64_t>(t), w, g);
            StepInputs<1> in{h, ops.c_meas[0], ops.cdagc_meas[0],
                             std::span<const StepOperators<1>::ErrorChannel>(ops.errors), oc.xi,
                             std::span<const double>(draws)};
            ens.walkers[w] = sse_step<1>(ens.walkers[w], in, spec.dt);
            worst_norm = std::max(worst_norm, std::abs(ens.walkers[w].norm() - 1.0));
        }
        worst_eig = std::min(worst_eig, min_eigval(ens.average_rho()));
    }
    res.pass = worst_norm <= 1e-10 && worst_eig >= -1e-9;
    std::ostringstream os;
    os << "max |norm-1|=" << worst_norm << " (<=1e-10), min eig=" << worst_eig << " (>= -1e-9)";
    res.detail = os.str();
    return res;
}

// (e4) Bit-identical sweep output for worker counts 1 and 4.
inline CheckResult check_determinism(const VerifyOptions& opt) {
    CheckResult res{"determinism_across_workers", false, ""};
    RunConfig cfg = preset_config("smoke", "n1-target-zero");
    cfg.master_seed = opt.seed;
    cfg.n_trajectories = 4;
    cfg.n_walkers = 5;
    cfg.n_steps = 60;
    cfg.grid = {1e-2, 1.0, 5};
    cfg.snapshot_stride = 5;
    auto render = [&](int workers) {
        RunConfig c = cfg;
        c.workers = workers;
        const auto sweep = run_sweep(c);
        std::ostringstream os;
        for (const auto& p : sweep.points)
            os << fmt17(p.gamma) << ',' << fmt17(p.mean_fidelity) << ','
               << fmt17(p.fidelity_variance) << ',' << fmt17(p.purity) << '\n';
        return os.str();
    };
    const std::string a = render(1);
    const std::string b = render(4);
    res.pass = a == b;
    res.detail = res.pass ? "sweep rows identical for workers=1 and workers=4"
                          : "sweep rows differ between worker counts";
    return res;
}

// (e5) Empirical independence of the outcome stream and the bath stream.
inline CheckResult check_rng_independence(const VerifyOptions& opt) {
    CheckResult res{"rng_independence", false, ""};
    const RngPolicy rng{opt.seed};
    const int n = 100000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int t = 0; t < n; ++t) {
        const double xi = rng.outcome_uniform(0, static_cast<std::uint64_t>(t)) < 0.5 ? 0.0 : 1.0;
        const double x = rng.normal(0, static_cast<std::uint64_t>(t), 0, 0);
        sx += xi;
        sy += x;
        sxx += xi * xi;
        syy += x * x;
        sxy += xi * x;
    }
    const double corr = (n * sxy - sx * sy) /
                        std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    const double bound = 3.0 / std::sqrt(static_cast<double>(n));
    res.pass = std::abs(corr) <= bound;
    std::ostringstream os;
    os << "|corr(xi, x)|=" << std::abs(corr) << " (want <= " << bound << ")";
    res.detail = os.str();
    return res;
}

// (f) Greedy policy beats a frozen random policy at zero error rate.
inline CheckResult check_greedy_beats_random(const VerifyOptions& opt) {
    CheckResult res{"greedy_beats_random", false, ""};
    ModelSpec spec = verify_detail::base_spec_n1();
    spec.dt = 0.03;
    const StepOperators<1> ops(spec);
    const auto protocol = protocol_n1_target_zero();
    const RngPolicy rng{opt.seed};
    const int n_traj = 120, n_steps = 600;
    auto run_policy = [&](PolicyKind kind, std::uint64_t base) {
        std::vector<double> means;
        means.reserve(n_traj);
        for (int k = 0; k < n_traj; ++k) {
            TrajectoryOptions<1> topt;
            topt.n_steps = n_steps;
            topt.n_walkers = 1;  // no bath channels at zero error rate
            topt.trajectory_id = base + static_cast<std::uint64_t>(k);
            topt.snapshot_stride = n_steps;
            topt.policy = kind;
            const auto rec = evolve_trajectory<1>(ops, protocol, topt, rng);
            double s = 0;
            const int win = n_steps / 5;
            for (int t = n_steps - win; t < n_steps; ++t)
                s += rec.f_target[static_cast<std::size_t>(t)];
            means.push_back(s / win);
        }
        return means;
    };
    const auto g = run_policy(PolicyKind::greedy, 100000);
    const auto r = run_policy(PolicyKind::frozen_random, 200000);
    auto stats = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s2 = 0;
        for (double x : v) s2 += (x - m) * (x - m);
        s2 /= static_cast<double>(v.size() - 1);
        return std::pair<double, double>(m, s2);
    };
    const auto [mg, vg] = stats(g);
    const auto [mr, vr] = stats(r);
    const double t = (mg - mr) / std::sqrt(vg / n_traj + vr / n_traj);
    const double p = 0.5 * std::erfc(t / std::sqrt(2.0));  // one-sided
    res.pass = mg > mr && p < 0.01;
    std::ostringstream os;
    os << "greedy mean F=" << mg << ", random mean F=" << mr << ", one-sided p=" << p
       << " (want < 0.01)";
    res.detail = os.str();
    return res;
}

inline std::vector<CheckResult> run_verification(const VerifyOptions& opt = {}) {
    return {
        check_kraus_completeness(opt),   check_axis_unitarity(opt),
        check_sse_sme_oracle(opt),       check_bloch_crosscheck(opt),
        check_probability_normalization(opt), check_trace_preservation(opt),
        check_walker_norms_positivity(opt),   check_determinism(opt),
        check_rng_independence(opt),     check_greedy_beats_random(opt),
    };
}

}  // namespace steersim

#pragma once

// One measurement trajectory: greedy (or overridden) steering decisions,
// shared sampled outcomes, per-walker SSE updates with independent bath
// draws, and per-step diagnostics. A trajectory is one unit of parallel work;
// all randomness is addressed through RngPolicy so results are independent
// of scheduling.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "steersim/dynamics.hpp"
#include "steersim/rng.hpp"
#include "steersim/steering.hpp"

namespace steersim {

enum class PolicyKind {
    greedy,         // argmax of the anticipated gain (the protocol)
    frozen_random,  // uniform choice from the set, independent of the state
};

template <int NQ>
struct TrajectoryOptions {
    int n_steps = 3000;
    int n_walkers = 100;
    std::uint64_t trajectory_id = 0;
    int snapshot_stride = 10;
    PolicyKind policy = PolicyKind::greedy;
    std::span<const int> scripted_choices{};      // overrides the policy when nonempty
    std::span<const Outcome> scripted_outcomes{}; // overrides sampling when nonempty
};

template <int NQ>
struct TrajectoryRecord {
    static constexpr int dim = SystemTraits<NQ>::dim;
    double dt = 0;
    int n_steps = 0;
    int n_refs = 0;  // reference fidelities per step (2 basis states or 4 Bell states)

    std::vector<int> choice_index;
    std::vector<std::int8_t> xi;
    std::vector<std::int8_t> eta;
    std::vector<double> f_target;
    std::vector<double> f_refs;               // row-major [step][ref]
    std::vector<std::array<double, 3>> bloch; // one qubit only
    std::vector<double> purity_inst;          // Tr(rho_bar^2) of the walker average

    int snapshot_stride = 0;
    std::vector<int> snapshot_steps;          // 1-based step index of each snapshot
    std::vector<Mat<dim>> snapshots;          // walker-averaged state after those steps
};

template <int NQ>
TrajectoryRecord<NQ> evolve_trajectory(const StepOperators<NQ>& ops, const Protocol<NQ>& protocol,
                                       const TrajectoryOptions<NQ>& opt, const RngPolicy& rng) {
    constexpr int D = SystemTraits<NQ>::dim;
    const double dt = ops.spec.dt;
    const std::uint64_t traj = opt.trajectory_id;

    std::vector<Vec<D>> refs;
    if constexpr (NQ == 1) {
        Vec2 k0, k1;
        k0.a = {1.0, 0.0};
        k1.a = {0.0, 1.0};
        refs = {k0, k1};
    } else {
        const auto bells = bell_states();
        refs.assign(bells.begin(), bells.end());
    }

    TrajectoryRecord<NQ> rec;
    rec.dt = dt;
    rec.n_steps = opt.n_steps;
    rec.n_refs = static_cast<int>(refs.size());
    rec.snapshot_stride = opt.snapshot_stride;
    rec.choice_index.reserve(static_cast<std::size_t>(opt.n_steps));
    rec.f_target.reserve(static_cast<std::size_t>(opt.n_steps));

    WalkerEnsemble<NQ> ensemble(opt.n_walkers, protocol.initial_state);
    const std::size_t n_err = ops.errors.size();
    std::vector<double> draws(n_err);

    for (int t = 0; t < opt.n_steps; ++t) {
        const Mat<D> rho_bar = ensemble.average_rho();

        SteeringChoice choice;
        if (!opt.scripted_choices.empty()) {
            choice = SteeringChoice::from_index(NQ, opt.scripted_choices[static_cast<std::size_t>(t)]);
        } else if (opt.policy == PolicyKind::greedy) {
            choice = choose_steering<NQ>(rho_bar, protocol, ops);
        } else {
            const double u = rng.policy_uniform(traj, static_cast<std::uint64_t>(t));
            const auto n = protocol.steering_set.size();
            auto k = static_cast<std::size_t>(u * static_cast<double>(n));
            if (k >= n) k = n - 1;
            choice = protocol.steering_set[k];
        }

        const Outcome oc = !opt.scripted_outcomes.empty()
                               ? opt.scripted_outcomes[static_cast<std::size_t>(t)]
                               : sample_outcome<NQ>(rho_bar, ops, rng, traj,
                                                    static_cast<std::uint64_t>(t));

        const int slot = NQ == 1 ? 0 : StepOperators<NQ>::eta_slot(oc.eta);
        const Mat<D>& h0 = ops.h_choice[static_cast<std::size_t>(choice.index(NQ))];
        for (std::size_t w = 0; w < ensemble.walkers.size(); ++w) {
            for (std::size_t g = 0; g < n_err; ++g)
                draws[g] = rng.normal(traj, static_cast<std::uint64_t>(t), w, g);
            StepInputs<NQ> in{h0, ops.c_meas[slot], ops.cdagc_meas[slot],
                              std::span<const typename StepOperators<NQ>::ErrorChannel>(ops.errors),
                              oc.xi, std::span<const double>(draws)};
            ensemble.walkers[w] = sse_step<NQ>(ensemble.walkers[w], in, dt);
        }

        const Mat<D> rho_post = ensemble.average_rho();
        rec.choice_index.push_back(choice.index(NQ));
        rec.xi.push_back(static_cast<std::int8_t>(oc.xi));
        rec.eta.push_back(static_cast<std::int8_t>(oc.eta));
        rec.f_target.push_back(herm_expect(rho_post, outer(protocol.target_state, protocol.target_state)));
        for (const auto& ref : refs)
            rec.f_refs.push_back(herm_expect(rho_post, outer(ref, ref)));
        if constexpr (NQ == 1) {
            const auto b = bloch_from_rho(rho_post);
            rec.bloch.push_back(b.r);
        }
        rec.purity_inst.push_back(purity_of(rho_post));
        if (opt.snapshot_stride > 0 && (t + 1) % opt.snapshot_stride == 0) {
            rec.snapshot_steps.push_back(t + 1);
            rec.snapshots.push_back(rho_post);
        }
    }
    return rec;
}

}  // namespace steersim

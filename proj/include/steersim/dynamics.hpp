#pragma once

// Stochastic dynamics engine: per-walker SSE updates sharing a measurement
// record, outcome sampling from the walker-averaged state, and a direct
// density-matrix integrator used as the convergence oracle.
//
// The dissipative drift applied per walker is
//   dt ( <c^dag> c - 1/2 c^dag c - 1/2 <c^dag><c> ) |psi>
// whose bath average reproduces the Lindblad dissipator exactly; together
// with real unit-variance noise sqrt(dt) x (c - <c>) |psi> the walker
// ensemble converges to the master-equation state at the MC rate n_w^{-1/2}.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "steersim/linalg.hpp"
#include "steersim/model.hpp"
#include "steersim/rng.hpp"

namespace steersim {

inline constexpr double kNullJumpTol = 1e-14;

// Precomputed operators for one ModelSpec; shared read-only by all workers.
template <int NQ>
struct StepOperators {
    static constexpr int dim = SystemTraits<NQ>::dim;
    using M = Mat<dim>;

    ModelSpec spec;
    int n_choices = 0;
    std::vector<M> h_choice;  // effective Hamiltonian per choice index
    std::array<M, 2> c_meas{};    // [0]: eta=+1, [1]: eta=-1 (one qubit uses [0])
    std::array<M, 2> cdagc_meas{};
    struct ErrorChannel {
        M c, cdag, cdagc;
    };
    std::vector<ErrorChannel> errors;

    static int eta_slot(int eta) { return eta == 1 ? 0 : 1; }

    explicit StepOperators(const ModelSpec& s) : spec(s) {
        spec.validate();
        if (spec.n_qubits != NQ) throw std::invalid_argument("spec/engine qubit count mismatch");
        n_choices = steering_set_size(NQ);
        h_choice.reserve(static_cast<std::size_t>(n_choices));
        for (int i = 0; i < n_choices; ++i)
            h_choice.push_back(effective_hamiltonian<NQ>(spec, SteeringChoice::from_index(NQ, i)));
        const int n_eta = NQ == 1 ? 1 : 2;
        for (int k = 0; k < n_eta; ++k) {
            const int eta = k == 0 ? +1 : -1;
            c_meas[k] = measurement_jump<NQ>(spec, eta);
            cdagc_meas[k] = matmul(dagger(c_meas[k]), c_meas[k]);
        }
        for (const auto& c : error_jumps<NQ>(spec)) {
            const M cd = dagger(c);
            errors.push_back({c, cd, matmul(cd, c)});
        }
    }

    std::vector<OutcomeProb> probabilities(const M& rho) const {
        return outcome_probabilities<NQ>(rho, spec);
    }
};

// ---- SSE walker update -----------------------------------------------------

template <int NQ>
struct StepInputs {
    static constexpr int dim = SystemTraits<NQ>::dim;
    const Mat<dim>& h0;
    const Mat<dim>& c_meas;
    const Mat<dim>& cdagc_meas;
    std::span<const typename StepOperators<NQ>::ErrorChannel> errors;
    int xi = 0;
    std::span<const double> bath_draws;  // one standard normal per error channel
};

template <int NQ>
Vec<SystemTraits<NQ>::dim> sse_step(const Vec<SystemTraits<NQ>::dim>& psi,
                                    const StepInputs<NQ>& in, double dt) {
    constexpr int D = SystemTraits<NQ>::dim;
    if (in.bath_draws.size() != in.errors.size())
        throw std::invalid_argument("sse_step: one bath draw per error channel required");

    Vec<D> d = (Complex(0, -dt)) * matvec(in.h0, psi);

    const Vec<D> ccpsi = matvec(in.cdagc_meas, psi);
    const double ecc = inner(psi, ccpsi).real();
    d += (-0.5 * dt) * (ccpsi - ecc * psi);
    if (in.xi) {
        if (ecc < kNullJumpTol)
            throw std::runtime_error("sse_step: jump drawn from a null channel (<c^dag c> ~ 0)");
        d += (1.0 / std::sqrt(ecc)) * matvec(in.c_meas, psi) - psi;
    }

    const double sdt = std::sqrt(dt);
    for (std::size_t g = 0; g < in.errors.size(); ++g) {
        const auto& ch = in.errors[g];
        const Vec<D> cpsi = matvec(ch.c, psi);
        const Vec<D> ccp = matvec(ch.cdagc, psi);
        const Complex ec = inner(psi, cpsi);        // <c>
        const Complex ecd = std::conj(ec);          // <c^dag>
        d += dt * (ecd * cpsi - Complex(0.5) * ccp - (0.5 * ecd * ec) * psi);
        d += (sdt * in.bath_draws[g]) * (cpsi - ec * psi);
    }

    Vec<D> out = psi + d;
    out.normalize();
    return out;
}

// ---- SME increment ---------------------------------------------------------

// d rho for one step conditioned on (xi, eta); all expectation values are
// evaluated on the supplied rho.
template <int NQ>
Mat<SystemTraits<NQ>::dim> sme_increment(const StepOperators<NQ>& ops,
                                         const Mat<SystemTraits<NQ>::dim>& rho,
                                         int choice_index, const Outcome& oc) {
    constexpr int D = SystemTraits<NQ>::dim;
    const double dt = ops.spec.dt;
    const int slot = NQ == 1 ? 0 : StepOperators<NQ>::eta_slot(oc.eta);
    const Mat<D>& c = ops.c_meas[slot];
    const Mat<D>& cc = ops.cdagc_meas[slot];

    Mat<D> d = Complex(0, -dt) * commutator(ops.h_choice[static_cast<std::size_t>(choice_index)], rho);

    const double ecc = herm_expect(rho, cc);
    if (oc.xi) {
        if (ecc < kNullJumpTol)
            throw std::runtime_error("sme_increment: jump drawn from a null channel");
        d += (1.0 / ecc) * matmul(c, matmul(rho, dagger(c))) - rho;
    }
    // -dt/2 {c^dag c - <c^dag c>, rho}
    d += (-0.5 * dt) * (anticommutator(cc, rho) - (2.0 * ecc) * rho);

    for (const auto& ch : ops.errors) {
        d += dt * (matmul(ch.c, matmul(rho, ch.cdag)) - 0.5 * anticommutator(ch.cdagc, rho));
    }
    return d;
}

// Spec-shaped convenience overload (builds operators on the fly).
template <int NQ>
Mat<SystemTraits<NQ>::dim> sme_step(const Mat<SystemTraits<NQ>::dim>& rho, const Outcome& oc,
                                    const ModelSpec& spec, const SteeringChoice& choice) {
    const StepOperators<NQ> ops(spec);
    return sme_increment<NQ>(ops, rho, choice.index(NQ), oc);
}

// ---- walker ensemble -------------------------------------------------------

template <int NQ>
struct WalkerEnsemble {
    static constexpr int dim = SystemTraits<NQ>::dim;
    std::vector<Vec<dim>> walkers;

    WalkerEnsemble(int n_w, const Vec<dim>& init) : walkers(static_cast<std::size_t>(n_w), init) {
        if (n_w < 1) throw std::invalid_argument("need at least one walker");
    }

    Mat<dim> average_rho() const {
        Mat<dim> rho;
        for (const auto& w : walkers) rho += outer(w, w);
        return (1.0 / static_cast<double>(walkers.size())) * rho;
    }

    void check_norms(double tol = 1e-10) const {
        for (const auto& w : walkers)
            if (std::abs(w.norm() - 1.0) > tol)
                throw std::runtime_error("walker norm drifted beyond tolerance");
    }
};

// Outcome sampled from the ensemble-average state; the same outcome is then
// applied to every walker of the step.
template <int NQ>
Outcome sample_outcome(const Mat<SystemTraits<NQ>::dim>& rho_bar, const StepOperators<NQ>& ops,
                       const RngPolicy& rng, std::uint64_t trajectory, std::uint64_t step) {
    const auto table = ops.probabilities(rho_bar);
    const double u = rng.outcome_uniform(trajectory, step);
    double acc = 0;
    for (const auto& e : table) {
        acc += e.p;
        if (u < acc) return e.outcome;
    }
    return table.back().outcome;
}

// ---- direct SME integration (oracle) ----------------------------------------

// Integrates the master equation for an externally supplied outcome and
// choice sequence. Returns the state after every step. Positivity is watched;
// a violation beyond -1e-6 aborts (signals dt too large for this path).
template <int NQ>
std::vector<Mat<SystemTraits<NQ>::dim>> sme_integrate(const StepOperators<NQ>& ops,
                                                      const Mat<SystemTraits<NQ>::dim>& rho0,
                                                      std::span<const int> choice_indices,
                                                      std::span<const Outcome> outcomes) {
    constexpr int D = SystemTraits<NQ>::dim;
    if (choice_indices.size() != outcomes.size())
        throw std::invalid_argument("sme_integrate: sequence length mismatch");
    std::vector<Mat<D>> traj;
    traj.reserve(outcomes.size());
    Mat<D> rho = rho0;
    for (std::size_t t = 0; t < outcomes.size(); ++t) {
        rho += sme_increment<NQ>(ops, rho, choice_indices[t], outcomes[t]);
        if (min_eigval(rho) < -1e-6)
            throw std::runtime_error("sme_integrate: positivity violated beyond 1e-6 (dt too large)");
        traj.push_back(rho);
    }
    return traj;
}

}  // namespace steersim

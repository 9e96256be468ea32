#pragma once

// Active decision engine: anticipated measurement-averaged gain of the
// protocol observable for every steering choice, argmax selection with a
// fixed deterministic tie-break, and the closed-form single-qubit Bloch
// iteration used to cross-check the master-equation step.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "steersim/dynamics.hpp"
#include "steersim/linalg.hpp"
#include "steersim/model.hpp"

namespace steersim {

template <int NQ>
struct Protocol {
    static constexpr int dim = SystemTraits<NQ>::dim;
    std::string name;
    Vec<dim> initial_state;
    Vec<dim> target_state;
    Mat<dim> observable;
    std::vector<SteeringChoice> steering_set;

    // target must be the unique top-eigenvalue eigenstate of the observable
    void validate() const {
        const auto ev = eigvals_hermitian(observable);
        const double top = ev[dim - 1];
        const double gap = top - ev[dim - 2];
        const double reached = expect(target_state, observable).real();
        if (gap <= kEigvalTol)
            throw std::invalid_argument("protocol observable has a degenerate top eigenvalue");
        if (std::abs(reached - top) > 1e-9)
            throw std::invalid_argument("protocol target is not the top eigenstate of the observable");
    }
};

inline std::vector<SteeringChoice> full_steering_set(int n_qubits) {
    std::vector<SteeringChoice> set;
    const int n = steering_set_size(n_qubits);
    set.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) set.push_back(SteeringChoice::from_index(n_qubits, i));
    return set;
}

// |+> -> |0>, observable sigma_z
inline Protocol<1> protocol_n1_target_zero() {
    Protocol<1> p;
    p.name = "n1-target-zero";
    const double r = 1.0 / std::sqrt(2.0);
    p.initial_state.a = {Complex(r), Complex(r)};
    p.target_state.a = {1.0, 0.0};
    p.observable = pauli_z();
    p.steering_set = full_steering_set(1);
    p.validate();
    return p;
}

// |++> -> Bell state (xi,eta), observable +-XX +-ZZ with the sign pattern
// whose top eigenstate is the requested Bell state.
inline Protocol<2> protocol_n2_bell(int xi, int eta) {
    Protocol<2> p;
    p.name = std::string("n2-bell-") + (xi == 0 ? "0" : "1") + (eta == 1 ? "+" : "-");
    const double r = 1.0 / std::sqrt(2.0);
    Vec2 plus;
    plus.a = {Complex(r), Complex(r)};
    p.initial_state = kron(plus, plus);
    p.target_state = bell_states()[static_cast<std::size_t>(bell_index(xi, eta))];
    const double sx_sign = eta == 1 ? 1.0 : -1.0;
    const double sz_sign = xi == 0 ? 1.0 : -1.0;
    p.observable = sx_sign * kron(pauli_x(), pauli_x()) + sz_sign * kron(pauli_z(), pauli_z());
    p.steering_set = full_steering_set(2);
    p.validate();
    return p;
}

// Choice-independent pieces of the conditional increment, reused across the
// candidate loop of one decision. All expectations come from the same rho.
template <int NQ>
struct SmeSharedTerms {
    static constexpr int dim = SystemTraits<NQ>::dim;
    std::array<Mat<dim>, 2> measurement_drift{};  // -dt/2 {cc - <cc>, rho}
    std::array<Mat<dim>, 2> jump_term{};          // c rho c^dag / <cc> - rho
    std::array<double, 2> ecc{};
    Mat<dim> error_sum{};  // dt sum_g D[c_g] rho
    int n_eta = 1;

    SmeSharedTerms(const StepOperators<NQ>& ops, const Mat<dim>& rho) {
        const double dt = ops.spec.dt;
        n_eta = NQ == 1 ? 1 : 2;
        for (int k = 0; k < n_eta; ++k) {
            const auto& cc = ops.cdagc_meas[k];
            ecc[k] = herm_expect(rho, cc);
            measurement_drift[k] = (-0.5 * dt) * (anticommutator(cc, rho) - (2.0 * ecc[k]) * rho);
            if (ecc[k] >= kNullJumpTol) {
                jump_term[k] =
                    (1.0 / ecc[k]) * matmul(ops.c_meas[k], matmul(rho, dagger(ops.c_meas[k]))) - rho;
            }
        }
        for (const auto& ch : ops.errors)
            error_sum += dt * (matmul(ch.c, matmul(rho, ch.cdag)) - 0.5 * anticommutator(ch.cdagc, rho));
    }

    Mat<dim> increment(const StepOperators<NQ>& ops, const Mat<dim>& rho, int choice_index,
                       const Outcome& oc) const {
        const int slot = NQ == 1 ? 0 : StepOperators<NQ>::eta_slot(oc.eta);
        Mat<dim> d = Complex(0, -ops.spec.dt) *
                     commutator(ops.h_choice[static_cast<std::size_t>(choice_index)], rho);
        d += measurement_drift[slot];
        if (oc.xi) {
            if (ecc[slot] < kNullJumpTol)
                throw std::runtime_error("decision increment: jump branch on a null channel");
            d += jump_term[slot];
        }
        d += error_sum;
        return d;
    }
};

// Measurement-averaged anticipated change of <O_s> for one candidate choice:
// sum over outcomes of P * Tr(d rho * O_s). The outcome enumeration is
// exhaustive (2 increments per candidate for one qubit, 4 for two).
template <int NQ>
double expected_gain(const Mat<SystemTraits<NQ>::dim>& rho, const SteeringChoice& choice,
                     const StepOperators<NQ>& ops, const Mat<SystemTraits<NQ>::dim>& observable,
                     std::uint64_t* increment_counter = nullptr) {
    const auto table = ops.probabilities(rho);
    const SmeSharedTerms<NQ> shared(ops, rho);
    const int ci = choice.index(NQ);
    double gain = 0;
    for (const auto& e : table) {
        const auto d = shared.increment(ops, rho, ci, e.outcome);
        if (increment_counter) ++*increment_counter;
        gain += e.p * trace_product(d, observable).real();
    }
    return gain;
}

// Argmax of the expected gain over the protocol's steering set. Ties resolve
// to the earliest entry in the fixed order (none, +x, -x, +y, -y, +z, -z),
// lexicographic over qubits.
template <int NQ>
SteeringChoice choose_steering(const Mat<SystemTraits<NQ>::dim>& rho, const Protocol<NQ>& protocol,
                               const StepOperators<NQ>& ops,
                               std::uint64_t* increment_counter = nullptr) {
    if (protocol.steering_set.empty()) throw std::invalid_argument("empty steering set");
    const auto table = ops.probabilities(rho);
    const SmeSharedTerms<NQ> shared(ops, rho);

    SteeringChoice best = protocol.steering_set.front();
    double best_gain = 0;
    bool first = true;
    for (const auto& choice : protocol.steering_set) {
        const int ci = choice.index(NQ);
        double gain = 0;
        for (const auto& e : table) {
            const auto d = shared.increment(ops, rho, ci, e.outcome);
            if (increment_counter) ++*increment_counter;
            gain += e.p * trace_product(d, protocol.observable).real();
        }
        if (first || gain > best_gain) {
            best = choice;
            best_gain = gain;
            first = false;
        }
    }
    return best;
}

// ---- single-qubit Bloch iteration -------------------------------------------

struct BlochVector {
    std::array<double, 3> r{0, 0, 0};
};

template <int D>
inline BlochVector bloch_from_rho(const Mat<D>& rho) {
    static_assert(D == 2);
    BlochVector b;
    b.r[0] = herm_expect(rho, pauli_x());
    b.r[1] = herm_expect(rho, pauli_y());
    b.r[2] = herm_expect(rho, pauli_z());
    return b;
}

// Exact rewriting of the one-qubit conditional step in Bloch form.
// The no-jump measurement drift vanishes identically here because
// c^dag c is proportional to the identity (unitary jump axis).
inline BlochVector bloch_iterate(const BlochVector& b, const SteeringChoice& choice,
                                 const Outcome& oc, const ModelSpec& spec) {
    const auto& r = b.r;
    const double rn2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if (rn2 > 1.0 + 2e-6 + 1e-12)
        throw std::runtime_error("bloch_iterate: |r| exceeded 1 beyond tolerance");

    // rotation axis weights: h = E_A e_z + steering
    std::array<double, 3> h{0, 0, andreev_energy(spec)};
    switch (static_cast<Steer>(choice.alpha[0])) {
        case Steer::none: break;
        case Steer::plus_x: h[0] += spec.steer_strength; break;
        case Steer::minus_x: h[0] -= spec.steer_strength; break;
        case Steer::plus_y: h[1] += spec.steer_strength; break;
        case Steer::minus_y: h[1] -= spec.steer_strength; break;
        case Steer::plus_z: h[2] += spec.steer_strength; break;
        case Steer::minus_z: h[2] -= spec.steer_strength; break;
    }

    BlochVector d;
    // unitary precession: 2 dt (h x r)
    d.r[0] = 2 * spec.dt * (h[1] * r[2] - h[2] * r[1]);
    d.r[1] = 2 * spec.dt * (h[2] * r[0] - h[0] * r[2]);
    d.r[2] = 2 * spec.dt * (h[0] * r[1] - h[1] * r[0]);

    if (oc.xi) {
        // jump reflects r about the sigma^s axis n = (0, wy, wz): r' = 2(r.n)n - r
        const Mat2 ss = supercurrent_axis(spec);
        const double wy = ss(0, 1).imag() * -1.0;  // sigma_y coefficient
        const double wz = ss(0, 0).real();         // sigma_z coefficient
        const double rn = r[1] * wy + r[2] * wz;
        d.r[0] += -2 * r[0];
        d.r[1] += 2 * rn * wy - 2 * r[1];
        d.r[2] += 2 * rn * wz - 2 * r[2];
    }

    if (spec.gamma_ad > 0) {
        d.r[0] += -0.5 * spec.dt * spec.gamma_ad * r[0];
        d.r[1] += -0.5 * spec.dt * spec.gamma_ad * r[1];
        d.r[2] += -spec.dt * spec.gamma_ad * (1.0 + r[2]);
    }
    if (spec.gamma_pd > 0) {
        d.r[0] += -spec.dt * spec.gamma_pd * r[0];
        d.r[1] += -spec.dt * spec.gamma_pd * r[1];
    }
    return d;
}

// Evolves one scripted record through both the Bloch iteration and the
// density-matrix step and reports the largest componentwise deviation.
inline double bloch_vs_sme_crosscheck(const ModelSpec& spec, int n_steps,
                                      std::span<const int> choice_indices,
                                      std::span<const Outcome> outcomes) {
    if (static_cast<int>(choice_indices.size()) < n_steps ||
        static_cast<int>(outcomes.size()) < n_steps)
        throw std::invalid_argument("crosscheck: scripted sequences shorter than n_steps");
    const StepOperators<1> ops(spec);

    // mixed start: the first-order unitary update inflates |r| slightly each
    // step, so a pure starting point would trip the |r| <= 1 guard at once
    Mat2 rho = 0.5 * (Mat2::identity() + 0.7 * pauli_x());
    BlochVector b = bloch_from_rho(rho);

    double max_dev = 0;
    for (int t = 0; t < n_steps; ++t) {
        const SteeringChoice choice = SteeringChoice::from_index(1, choice_indices[t]);
        const Outcome oc = outcomes[t];
        rho += sme_increment<1>(ops, rho, choice.index(1), oc);
        const BlochVector db = bloch_iterate(b, choice, oc, spec);
        for (int j = 0; j < 3; ++j) b.r[j] += db.r[j];
        const BlochVector bs = bloch_from_rho(rho);
        for (int j = 0; j < 3; ++j) max_dev = std::max(max_dev, std::abs(bs.r[j] - b.r[j]));
    }
    return max_dev;
}

}  // namespace steersim

#pragma once

// Physical model: Andreev-qubit Hamiltonians, steering operators,
// measurement and error jump operators, Bell structure.
//
// Conventions (fixed project-wide):
//   sigma_z|0> = +|0>, the excited Andreev level is |0> and the ground
//   level is |1>; sigma_minus = |1><0| decays toward |1>.
//   Two-qubit operators are built exclusively through kron() with the
//   qubit-1 slot first (basis index = 2*i1 + i2).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "steersim/linalg.hpp"

namespace steersim {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

inline Mat2 pauli_i() { return Mat2::identity(); }
inline Mat2 pauli_x() {
    Mat2 m;
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}
inline Mat2 pauli_y() {
    Mat2 m;
    m(0, 1) = Complex(0, -1);
    m(1, 0) = Complex(0, 1);
    return m;
}
inline Mat2 pauli_z() {
    Mat2 m;
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}
inline Mat2 sigma_minus() {
    Mat2 m;
    m(1, 0) = 1.0;  // |1><0|
    return m;
}

// Steering menu per qubit, fixed decision order.
enum class Steer : std::uint8_t {
    none = 0,
    plus_x = 1,
    minus_x = 2,
    plus_y = 3,
    minus_y = 4,
    plus_z = 5,
    minus_z = 6,
};
inline constexpr int kSteerOptions = 7;

inline Mat2 steer_direction(Steer s, double j) {
    switch (s) {
        case Steer::none: return Mat2::zero();
        case Steer::plus_x: return j * pauli_x();
        case Steer::minus_x: return (-j) * pauli_x();
        case Steer::plus_y: return j * pauli_y();
        case Steer::minus_y: return (-j) * pauli_y();
        case Steer::plus_z: return j * pauli_z();
        case Steer::minus_z: return (-j) * pauli_z();
    }
    throw std::logic_error("bad steering index");
}

// Per-qubit steering selection; alpha[1] is ignored for one qubit.
struct SteeringChoice {
    std::array<std::uint8_t, 2> alpha{0, 0};

    static SteeringChoice from_index(int n_qubits, int idx) {
        SteeringChoice c;
        if (n_qubits == 1) {
            c.alpha = {static_cast<std::uint8_t>(idx), 0};
        } else {
            c.alpha = {static_cast<std::uint8_t>(idx / kSteerOptions),
                       static_cast<std::uint8_t>(idx % kSteerOptions)};
        }
        return c;
    }
    int index(int n_qubits) const {
        return n_qubits == 1 ? alpha[0] : kSteerOptions * alpha[0] + alpha[1];
    }
};

inline int steering_set_size(int n_qubits) {
    return n_qubits == 1 ? kSteerOptions : kSteerOptions * kSteerOptions;
}

// Measurement result of one step. For one qubit eta is fixed to +1.
struct Outcome {
    int xi = 0;    // 0 | 1
    int eta = +1;  // -1 | +1
};

struct ModelSpec {
    int n_qubits = 1;
    double delta = 1.0;           // reference energy scale
    double transmission = 0.98;   // in (0,1]
    double phase = 0.97 * kPi;    // phi_0
    double coupling = 0.98;       // Lambda, system-detector energy scale
    double steer_strength = 3.0;  // J
    double dt = 0.01;
    double gamma_ad = 0.0;
    double gamma_pd = 0.0;
    double asymmetry = 1.0;  // multiplier on qubit-2 couplings (E_A, Lambda, J)

    void validate() const {
        if (n_qubits != 1 && n_qubits != 2) throw std::invalid_argument("n_qubits must be 1 or 2");
        if (!(transmission > 0.0) || transmission > 1.0)
            throw std::invalid_argument("transmission must be in (0,1]");
        if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (gamma_ad < 0.0 || gamma_pd < 0.0) throw std::invalid_argument("error rates must be >= 0");
        if (!(asymmetry > 0.0)) throw std::invalid_argument("asymmetry must be positive");
    }

    // Weak-measurement sanity: J*dt and Lambda*dt should stay well below 1.
    std::vector<std::string> weak_limit_warnings() const {
        std::vector<std::string> w;
        if (steer_strength * dt > 0.3)
            w.push_back("J*dt = " + std::to_string(steer_strength * dt) +
                        " is outside the weak-measurement regime (> 0.3)");
        if (coupling * dt > 0.3)
            w.push_back("Lambda*dt = " + std::to_string(coupling * dt) +
                        " is outside the weak-measurement regime (> 0.3)");
        return w;
    }
};

// E_A = Delta * sqrt(1 - T sin^2(phi/2))
inline double andreev_energy(const ModelSpec& spec) {
    const double s = std::sin(spec.phase / 2);
    return spec.delta * std::sqrt(1.0 - spec.transmission * s * s);
}

// Supercurrent scale I_0 = T * Delta * sin(phi/2); display quantity only.
inline double supercurrent_scale(const ModelSpec& spec) {
    return spec.transmission * spec.delta * std::sin(spec.phase / 2);
}

// sigma^s = (Delta/E_A) [-cos(phi/2) sigma_z + sqrt(1-T) sin(phi/2) sigma_y]
inline Mat2 supercurrent_axis(const ModelSpec& spec) {
    const double ea = andreev_energy(spec);
    if (ea <= 0.0)
        throw std::domain_error("supercurrent axis undefined at E_A = 0 (T=1, phi=pi)");
    const double wz = -spec.delta * std::cos(spec.phase / 2) / ea;
    const double wy = spec.delta * std::sqrt(1.0 - spec.transmission) * std::sin(spec.phase / 2) / ea;
    return wz * pauli_z() + wy * pauli_y();
}

template <int NQubits>
struct SystemTraits;
template <>
struct SystemTraits<1> {
    static constexpr int dim = 2;
};
template <>
struct SystemTraits<2> {
    static constexpr int dim = 4;
};

namespace model_detail {

inline Mat4 embed(const Mat2& op, int qubit) {
    return qubit == 0 ? kron(op, pauli_i()) : kron(pauli_i(), op);
}

// coupling multipliers per qubit; the asymmetry knob scales qubit 2
inline double qubit_factor(const ModelSpec& spec, int qubit) {
    return qubit == 0 ? 1.0 : spec.asymmetry;
}

}  // namespace model_detail

// H_s = sum_n [E_A sigma_n^z + H_{s,alpha_n}]
template <int NQ>
Mat<SystemTraits<NQ>::dim> system_hamiltonian(const ModelSpec& spec, const SteeringChoice& choice) {
    const double ea = andreev_energy(spec);
    if constexpr (NQ == 1) {
        return ea * pauli_z() +
               steer_direction(static_cast<Steer>(choice.alpha[0]), spec.steer_strength);
    } else {
        Mat4 h = Mat4::zero();
        for (int n = 0; n < 2; ++n) {
            const double f = model_detail::qubit_factor(spec, n);
            h += model_detail::embed(
                f * ea * pauli_z() +
                    steer_direction(static_cast<Steer>(choice.alpha[n]), f * spec.steer_strength),
                n);
        }
        return h;
    }
}

// Effective no-jump Hamiltonian H_0. The detector-elastic coupling element
// vanishes (tau^x is off-diagonal) and H_d is dropped (global phase only),
// so H_0 reduces to the system Hamiltonian.
template <int NQ>
Mat<SystemTraits<NQ>::dim> effective_hamiltonian(const ModelSpec& spec, const SteeringChoice& choice) {
    return system_hamiltonian<NQ>(spec, choice);
}

// Measurement jump operator.
//   N=1: c = -i sqrt(dt) Lambda sigma^s
//   N=2: c_eta = -i sqrt(dt) (eta Lambda_1 sigma_1^s + Lambda_2 sigma_2^s)
template <int NQ>
Mat<SystemTraits<NQ>::dim> measurement_jump(const ModelSpec& spec, int eta) {
    const Complex pref = Complex(0, -1) * std::sqrt(spec.dt);
    const Mat2 ss = supercurrent_axis(spec);
    if constexpr (NQ == 1) {
        return (pref * spec.coupling) * ss;
    } else {
        if (eta != 1 && eta != -1) throw std::invalid_argument("eta must be +1 or -1");
        const double l1 = spec.coupling;
        const double l2 = spec.asymmetry * spec.coupling;
        return pref * (static_cast<double>(eta) * l1 * model_detail::embed(ss, 0) +
                       l2 * model_detail::embed(ss, 1));
    }
}

// Error-channel jump operators: sqrt(G_AD) sigma_n^- and sqrt(G_PD/2) sigma_n^z
// per qubit; zero-rate channels are omitted.
template <int NQ>
std::vector<Mat<SystemTraits<NQ>::dim>> error_jumps(const ModelSpec& spec) {
    if (spec.gamma_ad < 0 || spec.gamma_pd < 0) throw std::invalid_argument("error rates must be >= 0");
    std::vector<Mat<SystemTraits<NQ>::dim>> out;
    for (int n = 0; n < NQ; ++n) {
        if (spec.gamma_ad > 0) {
            const Mat2 c = std::sqrt(spec.gamma_ad) * sigma_minus();
            if constexpr (NQ == 1)
                out.push_back(c);
            else
                out.push_back(model_detail::embed(c, n));
        }
        if (spec.gamma_pd > 0) {
            const Mat2 c = std::sqrt(spec.gamma_pd / 2) * pauli_z();
            if constexpr (NQ == 1)
                out.push_back(c);
            else
                out.push_back(model_detail::embed(c, n));
        }
    }
    return out;
}

// Bell basis of the 4-dimensional space, order (xi,eta) = (0,+),(0,-),(1,+),(1,-).
inline std::array<Vec4, 4> bell_states() {
    const double r = 1.0 / std::sqrt(2.0);
    std::array<Vec4, 4> b{};
    b[0].a = {Complex(r), 0, 0, Complex(r)};
    b[1].a = {Complex(r), 0, 0, Complex(-r)};
    b[2].a = {0, Complex(r), Complex(r), 0};
    b[3].a = {0, Complex(r), Complex(-r), 0};
    return b;
}

inline int bell_index(int xi, int eta) { return 2 * xi + (eta == 1 ? 0 : 1); }

// First-order Kraus pair for the one-qubit step (used by the completeness
// check): A_1 = sqrt(dt) c, A_0 = 1 - i dt H_0 - (dt/2) c^dag c.
inline std::pair<Mat2, Mat2> kraus_ops(const ModelSpec& spec, const SteeringChoice& choice) {
    const Mat2 c = measurement_jump<1>(spec, +1);
    const Mat2 h0 = effective_hamiltonian<1>(spec, choice);
    const Mat2 a0 = Mat2::identity() + (Complex(0, -1) * spec.dt) * h0 +
                    (-0.5 * spec.dt) * matmul(dagger(c), c);
    const Mat2 a1 = std::sqrt(spec.dt) * c;
    return {a0, a1};
}

// Outcome probability table.
//   N=1: P_1 = dt <c^dag c>, P_0 = 1 - P_1
//   N=2: P_{xi,eta} = 1/2 (delta_{xi,0} + (delta_{xi,1} - delta_{xi,0}) dt <c_eta^dag c_eta>)
struct OutcomeProb {
    Outcome outcome;
    double p = 0;
};

namespace model_detail {

inline void check_prob_table(const std::vector<OutcomeProb>& table) {
    double sum = 0;
    for (const auto& e : table) {
        if (e.p < -1e-10 || e.p > 1.0 + 1e-10)
            throw std::runtime_error("outcome probability out of range (dt too large?): p = " +
                                     std::to_string(e.p));
        sum += e.p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::runtime_error("outcome probabilities do not sum to 1");
}

}  // namespace model_detail

template <int NQ>
std::vector<OutcomeProb> outcome_probabilities(const Mat<SystemTraits<NQ>::dim>& rho,
                                               const ModelSpec& spec) {
    std::vector<OutcomeProb> table;
    if constexpr (NQ == 1) {
        const Mat2 c = measurement_jump<1>(spec, +1);
        const double e = herm_expect(rho, matmul(dagger(c), c));
        const double p1 = spec.dt * e;
        table.push_back({{0, +1}, 1.0 - p1});
        table.push_back({{1, +1}, p1});
    } else {
        double e[2];
        for (int k = 0; k < 2; ++k) {
            const int eta = k == 0 ? +1 : -1;
            const Mat4 c = measurement_jump<2>(spec, eta);
            e[k] = herm_expect(rho, matmul(dagger(c), c));
        }
        table.push_back({{0, +1}, 0.5 * (1.0 - spec.dt * e[0])});
        table.push_back({{0, -1}, 0.5 * (1.0 - spec.dt * e[1])});
        table.push_back({{1, +1}, 0.5 * spec.dt * e[0]});
        table.push_back({{1, -1}, 0.5 * spec.dt * e[1]});
    }
    model_detail::check_prob_table(table);
    return table;
}

}  // namespace steersim

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "steersim/dynamics.hpp"
#include "steersim/trajectory.hpp"

using namespace steersim;

namespace {

ModelSpec paper_n1(double gad = 0, double gpd = 0) {
    ModelSpec s;
    s.n_qubits = 1;
    s.transmission = 0.98;
    s.phase = 0.97 * kPi;
    s.coupling = 0.98;
    s.steer_strength = 3.0;
    s.dt = 0.01;
    s.gamma_ad = gad;
    s.gamma_pd = gpd;
    return s;
}

Vec2 ket_plus() {
    Vec2 v;
    const double r = 1.0 / std::sqrt(2.0);
    v.a = {r, r};
    return v;
}

}  // namespace

TEST_CASE("no-jump step with unitary axis is a pure phase rotation") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    const Vec2 psi = ket_plus();
    StepInputs<1> in{ops.h_choice[0], ops.c_meas[0], ops.cdagc_meas[0], {}, 0, {}};
    const Vec2 out = sse_step<1>(psi, in, s.dt);
    Vec2 k0;
    k0.a = {1.0, 0.0};
    CHECK(std::abs(std::abs(inner(k0, out)) - std::abs(inner(k0, psi))) < 1e-12);
}

TEST_CASE("jump applies the measurement axis up to a global phase") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    ModelSpec free = s;
    free.steer_strength = 0;  // isolate the jump: drop steering, keep E_A
    const StepOperators<1> ops_free(free);
    const Vec2 psi = ket_plus();
    StepInputs<1> in{Mat2::zero(), ops.c_meas[0], ops.cdagc_meas[0], {}, 1, {}};
    const Vec2 out = sse_step<1>(psi, in, 1e-30);  // dt -> 0 removes the drift
    const Vec2 want = matvec(supercurrent_axis(s), psi);
    CHECK(std::abs(std::abs(inner(want, out)) - 1.0) < 1e-10);
    (void)ops_free;
}

TEST_CASE("dephasing terms vanish on a sigma_z eigenstate") {
    const ModelSpec s = paper_n1(0.0, 0.8);
    const StepOperators<1> ops(s);
    Vec2 k0;
    k0.a = {1.0, 0.0};
    const std::vector<double> draws{1.7};  // any bath draw
    StepInputs<1> in{Mat2::zero(), ops.c_meas[0], ops.cdagc_meas[0],
                     std::span<const StepOperators<1>::ErrorChannel>(ops.errors), 0,
                     std::span<const double>(draws)};
    const Vec2 out = sse_step<1>(k0, in, s.dt);
    CHECK(std::abs(std::abs(inner(k0, out)) - 1.0) < 1e-12);
}

TEST_CASE("a jump drawn from a null channel is an error") {
    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    s2.coupling = 0.49;
    s2.phase = kPi;
    s2.transmission = 0.5;
    const StepOperators<2> ops(s2);
    Vec2 ym, yp;
    const double r = 1.0 / std::sqrt(2.0);
    ym.a = {Complex(r), Complex(0, -r)};
    yp.a = {Complex(r), Complex(0, r)};
    const Vec4 null_state = kron(ym, yp);
    StepInputs<2> in{ops.h_choice[0], ops.c_meas[0], ops.cdagc_meas[0], {}, 1, {}};
    CHECK_THROWS(sse_step<2>(null_state, in, s2.dt));
}

TEST_CASE("outcome sampling is state independent for one qubit") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    const RngPolicy rng{99};
    const double p1 = std::pow(s.coupling * s.dt, 2);
    // frequency over many steps approaches (Lambda dt)^2
    int hits = 0;
    const int n = 200000;
    WalkerEnsemble<1> single(1, ket_plus());
    const Mat2 rho = single.average_rho();
    for (int t = 0; t < n; ++t)
        hits += sample_outcome<1>(rho, ops, rng, 5, static_cast<std::uint64_t>(t)).xi;
    const double freq = static_cast<double>(hits) / n;
    CHECK(freq == Catch::Approx(p1).margin(5 * std::sqrt(p1 / n)));
}

TEST_CASE("null two-qubit outcome is never drawn") {
    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    s2.coupling = 0.49;
    s2.phase = kPi;
    s2.transmission = 0.5;
    const StepOperators<2> ops(s2);
    Vec2 ym, yp;
    const double r = 1.0 / std::sqrt(2.0);
    ym.a = {Complex(r), Complex(0, -r)};
    yp.a = {Complex(r), Complex(0, r)};
    const Vec4 ns = kron(ym, yp);
    const Mat4 rho = outer(ns, ns);
    const RngPolicy rng{2};
    for (int t = 0; t < 500; ++t) {
        const Outcome oc = sample_outcome<2>(rho, ops, rng, 1, static_cast<std::uint64_t>(t));
        CHECK_FALSE((oc.xi == 1 && oc.eta == 1));
    }
}

TEST_CASE("conditional increment: stationary state of the no-jump branch") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    Vec2 k0;
    k0.a = {1.0, 0.0};
    const Mat2 rho = outer(k0, k0);
    const Mat2 d = sme_increment<1>(ops, rho, 0, {0, +1});
    CHECK(frobenius_norm(d) < 1e-14);  // [sigma_z, |0><0|] = 0 and c^dag c prop. 1
}

TEST_CASE("conditional increment: jump branch replaces rho by the reflected state") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    const Vec2 psi = ket_plus();
    const Mat2 rho = outer(psi, psi);
    const Mat2 d = sme_increment<1>(ops, rho, 0, {1, +1});
    const Mat2 ss = supercurrent_axis(s);
    const Mat2 want = matmul(ss, matmul(rho, ss)) - rho +
                      Complex(0, -s.dt) * commutator(ops.h_choice[0], rho);
    CHECK(max_abs_diff(d, want) < 1e-13);
}

TEST_CASE("measurement-averaged increment equals the averaged Lindblad form") {
    // oracle: -i dt [H, rho] + dt G_ms D[s^s] + dt G_AD D[s^-] + dt G_PD/2 D[s^z]
    const ModelSpec s = paper_n1(0.3, 0.4);
    const StepOperators<1> ops(s);
    const int choice = 3;  // +J sigma_y
    const Vec2 psi = ket_plus();
    Mat2 rho = outer(psi, psi);
    rho = 0.7 * rho + 0.3 * 0.5 * Mat2::identity();

    Mat2 averaged;
    for (const auto& e : outcome_probabilities<1>(rho, s))
        averaged += e.p * sme_increment<1>(ops, rho, choice, e.outcome);

    const double g_ms = s.coupling * s.coupling * s.dt;
    const Mat2 ss = supercurrent_axis(s);
    const Mat2 sm = std::sqrt(s.gamma_ad) * sigma_minus();
    const Mat2 sz = std::sqrt(s.gamma_pd / 2) * pauli_z();
    auto dissipator = [&rho](const Mat2& c) {
        return matmul(c, matmul(rho, dagger(c))) -
               0.5 * anticommutator(matmul(dagger(c), c), rho);
    };
    Mat2 want = Complex(0, -s.dt) * commutator(ops.h_choice[choice], rho);
    want += (s.dt * g_ms) * dissipator(ss);
    want += s.dt * dissipator(sm);
    want += s.dt * dissipator(sz);
    CHECK(max_abs_diff(averaged, want) < 1e-12);
}

TEST_CASE("error-free steering reaches the target") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    const auto protocol = protocol_n1_target_zero();
    TrajectoryOptions<1> opt;
    opt.n_steps = 600;
    opt.n_walkers = 1;
    opt.snapshot_stride = 100;
    const RngPolicy rng{77};
    const auto rec = evolve_trajectory<1>(ops, protocol, opt, rng);
    double late = 0;
    for (int t = 480; t < 600; ++t) late += rec.f_target[static_cast<std::size_t>(t)];
    late /= 120;
    CHECK(late >= 0.99);

    // approach time is of order (J dt)^{-1} steps
    const int horizon = static_cast<int>(5.0 / (s.steer_strength * s.dt));
    bool reached = false;
    for (int t = 0; t < horizon; ++t) reached = reached || rec.f_target[static_cast<std::size_t>(t)] > 0.9;
    CHECK(reached);

    // purity of the walker average stays 1 without error channels
    for (double p : rec.purity_inst) CHECK(p >= 1.0 - 1e-9);
}

TEST_CASE("identical seeds give identical records") {
    const ModelSpec s = paper_n1(0.05, 0.05);
    const StepOperators<1> ops(s);
    const auto protocol = protocol_n1_target_zero();
    TrajectoryOptions<1> opt;
    opt.n_steps = 120;
    opt.n_walkers = 8;
    opt.trajectory_id = 3;
    const RngPolicy rng{123456};
    const auto a = evolve_trajectory<1>(ops, protocol, opt, rng);
    const auto b = evolve_trajectory<1>(ops, protocol, opt, rng);
    REQUIRE(a.f_target.size() == b.f_target.size());
    for (std::size_t i = 0; i < a.f_target.size(); ++i) CHECK(a.f_target[i] == b.f_target[i]);
    for (std::size_t i = 0; i < a.xi.size(); ++i) CHECK(a.xi[i] == b.xi[i]);
}

TEST_CASE("direct integration matches a single pure walker without noise") {
    const ModelSpec s = paper_n1();
    const StepOperators<1> ops(s);
    const int n = 150;
    std::vector<int> choices(n);
    std::vector<Outcome> outcomes(n);
    for (int t = 0; t < n; ++t) {
        choices[static_cast<std::size_t>(t)] = 0;  // free precession plus rare jumps
        outcomes[static_cast<std::size_t>(t)] = {t % 43 == 11 ? 1 : 0, +1};
    }
    const Vec2 psi0 = ket_plus();
    const auto sme = sme_integrate<1>(ops, outer(psi0, psi0), choices, outcomes);

    Vec2 psi = psi0;
    double worst = 0;
    for (int t = 0; t < n; ++t) {
        StepInputs<1> in{ops.h_choice[0], ops.c_meas[0], ops.cdagc_meas[0], {},
                         outcomes[static_cast<std::size_t>(t)].xi, {}};
        psi = sse_step<1>(psi, in, s.dt);
        worst = std::max(worst, frobenius_norm(outer(psi, psi) - sme[static_cast<std::size_t>(t)]));
    }
    // both maps agree to the first-order truncation; the residual is O(dt^2 E_A^2) per step
    CHECK(worst < 1e-3);
}

TEST_CASE("pure dephasing keeps the z axis as dark space") {
    ModelSpec s = paper_n1(0.0, 2.0);
    s.steer_strength = 0.0;
    ModelSpec sz_only = s;
    sz_only.phase = 0.0;  // sigma^s = -sigma_z commutes with everything relevant
    const StepOperators<1> ops(sz_only);
    const int n = 400;
    std::vector<int> choices(n, 0);
    std::vector<Outcome> outcomes(n, {0, +1});
    Vec2 psi0 = ket_plus();
    Mat2 rho0 = 0.5 * Mat2::identity() + 0.4 * pauli_x() + 0.2 * pauli_z();
    const auto traj = sme_integrate<1>(ops, rho0, choices, outcomes);
    const auto& last = traj.back();
    CHECK(std::abs(herm_expect(last, pauli_x())) < 0.8 * std::abs(herm_expect(rho0, pauli_x())));
    CHECK(herm_expect(last, pauli_z()) ==
          Catch::Approx(herm_expect(rho0, pauli_z())).margin(1e-9));
    (void)psi0;
}

TEST_CASE("trajectory options validation") {
    CHECK_THROWS(WalkerEnsemble<1>(0, ket_plus()));
}

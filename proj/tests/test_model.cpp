#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "steersim/model.hpp"

using namespace steersim;

namespace {

ModelSpec paper_n1() {
    ModelSpec s;
    s.n_qubits = 1;
    s.transmission = 0.98;
    s.phase = 0.97 * kPi;
    s.coupling = 0.98;
    s.steer_strength = 3.0;
    s.dt = 0.01;
    return s;
}

Vec2 y_eigenstate(int sign) {
    Vec2 v;
    const double r = 1.0 / std::sqrt(2.0);
    v.a = {Complex(r), Complex(0, sign * r)};
    return v;
}

}  // namespace

TEST_CASE("Andreev energy") {
    ModelSpec s = paper_n1();
    s.phase = 0.0;
    s.transmission = 0.37;
    CHECK(andreev_energy(s) == Catch::Approx(1.0));  // sin(0) = 0

    s.phase = kPi;
    s.transmission = 1.0;
    CHECK(andreev_energy(s) == Catch::Approx(0.0).margin(1e-12));

    // direct evaluation at the reference operating point
    s = paper_n1();
    CHECK(andreev_energy(s) == Catch::Approx(0.14891150843534778).margin(1e-9));
}

TEST_CASE("supercurrent axis") {
    ModelSpec s = paper_n1();
    s.phase = 0.0;
    CHECK(max_abs_diff(supercurrent_axis(s), (-1.0) * pauli_z()) < 1e-12);

    s.phase = kPi;
    s.transmission = 0.5;  // E_A = sqrt(1-T) Delta, prefactor cancels
    CHECK(max_abs_diff(supercurrent_axis(s), pauli_y()) < 1e-12);

    s = paper_n1();
    const Mat2 ss = supercurrent_axis(s);
    CHECK(ss(0, 0).real() == Catch::Approx(-0.31633855035519076).margin(1e-9));
    CHECK(-ss(0, 1).imag() == Catch::Approx(0.9486463627501998).margin(1e-9));
    CHECK(max_abs_diff(matmul(ss, ss), Mat2::identity()) < 1e-12);

    s.transmission = 1.0;
    s.phase = kPi;
    CHECK_THROWS(supercurrent_axis(s));
}

TEST_CASE("system Hamiltonian assembly") {
    ModelSpec s = paper_n1();
    const double ea = andreev_energy(s);
    CHECK(max_abs_diff(system_hamiltonian<1>(s, SteeringChoice::from_index(1, 0)), ea * pauli_z()) <
          1e-14);

    // E_A = 0 leaves only the steering term
    ModelSpec flat = s;
    flat.transmission = 1.0;
    flat.phase = kPi;
    CHECK(max_abs_diff(system_hamiltonian<1>(flat, SteeringChoice::from_index(1, 1)),
                       s.steer_strength * pauli_x()) < 1e-14);

    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    SteeringChoice ch;
    ch.alpha = {5, 0};  // +J sigma_z on qubit 1, none on qubit 2
    const Mat4 h = system_hamiltonian<2>(s2, ch);
    const Mat4 want = kron((ea + s2.steer_strength) * pauli_z(), pauli_i()) +
                      kron(pauli_i(), ea * pauli_z());
    CHECK(max_abs_diff(h, want) < 1e-12);
    CHECK(max_abs_diff(effective_hamiltonian<2>(s2, ch), h) == 0.0);
}

TEST_CASE("measurement jump operators") {
    ModelSpec s = paper_n1();
    const Mat2 c = measurement_jump<1>(s, +1);
    const Mat2 cc = matmul(dagger(c), c);
    const double want = s.dt * s.coupling * s.coupling;
    CHECK(max_abs_diff(cc, want * Mat2::identity()) < 1e-14);  // unitary axis

    // two-qubit eta=+1 jump annihilates opposite sigma^s eigenstates at phi0=pi
    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    s2.phase = kPi;
    s2.transmission = 0.5;  // sigma^s = sigma_y
    const Vec2 ym = y_eigenstate(-1), yp = y_eigenstate(+1);
    CHECK(std::abs(expect(ym, pauli_y()).real() + 1.0) < 1e-12);
    const Vec4 null_state = kron(ym, yp);
    const Vec4 hit = matvec(measurement_jump<2>(s2, +1), null_state);
    CHECK(hit.norm() < 1e-12);

    // eta=-1 equals -c_{+1} with the qubits exchanged
    const Mat4 cp = measurement_jump<2>(s2, +1);
    const Mat4 cm = measurement_jump<2>(s2, -1);
    Mat4 swap;
    swap(0, 0) = swap(3, 3) = 1.0;
    swap(1, 2) = swap(2, 1) = 1.0;
    CHECK(max_abs_diff(matmul(swap, matmul(cm, swap)), (-1.0) * cp) < 1e-12);
}

TEST_CASE("error jump operators") {
    ModelSpec s = paper_n1();
    CHECK(error_jumps<1>(s).empty());

    s.gamma_ad = 1.0;
    const auto ops = error_jumps<1>(s);
    REQUIRE(ops.size() == 1);
    Vec2 k0;
    k0.a = {1.0, 0.0};
    const Vec2 decayed = matvec(ops[0], k0);
    CHECK(std::abs(decayed.a[0]) < 1e-15);
    CHECK(std::abs(decayed.a[1] - Complex(1.0)) < 1e-15);  // |0> -> |1>

    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    s2.gamma_ad = 0.5;
    s2.gamma_pd = 0.25;
    CHECK(error_jumps<2>(s2).size() == 4);

    ModelSpec bad = paper_n1();
    bad.gamma_ad = -1.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("outcome probabilities") {
    ModelSpec s = paper_n1();
    Vec2 k0, plus;
    k0.a = {1.0, 0.0};
    const double r = 1.0 / std::sqrt(2.0);
    plus.a = {r, r};
    const double p1 = std::pow(s.coupling * s.dt, 2);
    for (const auto& rho : {outer(k0, k0), outer(plus, plus)}) {
        const auto table = outcome_probabilities<1>(rho, s);
        REQUIRE(table.size() == 2);
        CHECK(table[1].p == Catch::Approx(p1).margin(1e-15));  // state independent
        CHECK(table[0].p + table[1].p == Catch::Approx(1.0).margin(1e-12));
    }

    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    s2.coupling = 0.49;
    Vec2 pl;
    pl.a = {r, r};
    const Vec4 pp = kron(pl, pl);
    const auto table = outcome_probabilities<2>(outer(pp, pp), s2);
    REQUIRE(table.size() == 4);
    double sum = 0;
    for (const auto& e : table) sum += e.p;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));

    // the c_{+} null state never yields outcome (xi=1, eta=+1)
    s2.phase = kPi;
    s2.transmission = 0.5;
    const Vec4 null_state = kron(y_eigenstate(-1), y_eigenstate(+1));
    const auto t2 = outcome_probabilities<2>(outer(null_state, null_state), s2);
    CHECK(t2[2].outcome.xi == 1);
    CHECK(t2[2].outcome.eta == 1);
    CHECK(t2[2].p == Catch::Approx(0.0).margin(1e-15));

    ModelSpec big = paper_n1();
    big.dt = 3.0;  // (Lambda dt)^2 > 1
    CHECK_THROWS(outcome_probabilities<1>(outer(k0, k0), big));
}

TEST_CASE("Bell states") {
    const auto b = bell_states();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(inner(b[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]) -
                           (i == j ? 1.0 : 0.0)) < 1e-14);

    const Mat4 ox = kron(pauli_x(), pauli_x());
    const Mat4 oz = kron(pauli_z(), pauli_z());
    for (int xi = 0; xi <= 1; ++xi) {
        for (int eta : {+1, -1}) {
            const auto& v = b[static_cast<std::size_t>(bell_index(xi, eta))];
            const Vec4 vx = matvec(ox, v);
            const Vec4 vz = matvec(oz, v);
            for (int i = 0; i < 4; ++i) {
                CHECK(std::abs(vx.a[i] - static_cast<double>(eta) * v.a[i]) < 1e-14);
                CHECK(std::abs(vz.a[i] - static_cast<double>(1 - 2 * xi) * v.a[i]) < 1e-14);
            }
        }
    }
}

TEST_CASE("Kraus pair completeness scales quadratically") {
    ModelSpec s = paper_n1();
    const SteeringChoice ch = SteeringChoice::from_index(1, 1);
    double prev_res = 0, prev_dt = 0;
    for (double dt : {1e-2, 1e-3, 1e-4}) {
        s.dt = dt;
        const auto [a0, a1] = kraus_ops(s, ch);
        const Mat2 r = matmul(dagger(a0), a0) + matmul(dagger(a1), a1) - Mat2::identity();
        const double rn = frobenius_norm(r);
        if (prev_res > 0) {
            const double expo = std::log(prev_res / rn) / std::log(prev_dt / dt);
            CHECK(expo == Catch::Approx(2.0).margin(0.1));
        }
        prev_res = rn;
        prev_dt = dt;
    }
}

TEST_CASE("weak-measurement warnings") {
    ModelSpec s = paper_n1();
    CHECK(s.weak_limit_warnings().empty());
    s.dt = 0.2;  // J dt = 0.6
    CHECK_FALSE(s.weak_limit_warnings().empty());
}

TEST_CASE("asymmetry multiplier scales qubit 2") {
    ModelSpec s2 = paper_n1();
    s2.n_qubits = 2;
    s2.asymmetry = 1.03;
    const double ea = andreev_energy(s2);
    const Mat4 h = system_hamiltonian<2>(s2, SteeringChoice::from_index(2, 0));
    const Mat4 want =
        kron(ea * pauli_z(), pauli_i()) + kron(pauli_i(), 1.03 * ea * pauli_z());
    CHECK(max_abs_diff(h, want) < 1e-12);
}

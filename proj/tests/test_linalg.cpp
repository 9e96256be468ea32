#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "steersim/linalg.hpp"
#include "steersim/model.hpp"

using namespace steersim;

namespace {

std::mt19937 rng(12345);

Mat2 random_hermitian2() {
    std::uniform_real_distribution<double> u(-1, 1);
    Mat2 m;
    m(0, 0) = u(rng);
    m(1, 1) = u(rng);
    const Complex off(u(rng), u(rng));
    m(0, 1) = off;
    m(1, 0) = std::conj(off);
    return m;
}

Mat4 random_hermitian4() {
    std::uniform_real_distribution<double> u(-1, 1);
    Mat4 g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = Complex(u(rng), u(rng));
    return 0.5 * (g + dagger(g));
}

}  // namespace

TEST_CASE("kron identity and sigma_z embedding") {
    const Mat4 i4 = kron(pauli_i(), pauli_i());
    CHECK(max_abs_diff(i4, Mat4::identity()) == 0.0);

    const Mat4 zi = kron(pauli_z(), pauli_i());
    for (int i = 0; i < 4; ++i)
        CHECK(zi(i, i) == Complex(i < 2 ? 1.0 : -1.0));
}

TEST_CASE("kron(sigma_x, sigma_x) fixes the even Bell state") {
    // independent oracle: explicit 4x4 matrix-vector product with literal entries
    const double r = 1.0 / std::sqrt(2.0);
    const Complex bell[4] = {r, 0, 0, r};
    const double xx[4][4] = {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}};
    Complex expected[4] = {};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) expected[i] += xx[i][j] * bell[j];

    const Mat4 k = kron(pauli_x(), pauli_x());
    Vec4 v;
    v.a = {bell[0], bell[1], bell[2], bell[3]};
    const Vec4 got = matvec(k, v);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(got.a[i] - expected[i]) < 1e-15);
        CHECK(std::abs(got.a[i] - bell[i]) < 1e-15);  // eigenvalue +1
    }
}

TEST_CASE("herm_expect on basis states") {
    Vec2 k0, plus;
    k0.a = {1.0, 0.0};
    const double r = 1.0 / std::sqrt(2.0);
    plus.a = {r, r};

    CHECK(herm_expect(outer(k0, k0), pauli_z()) == Catch::Approx(1.0));
    CHECK(herm_expect(0.5 * Mat2::identity(), pauli_z()) == Catch::Approx(0.0).margin(1e-15));
    CHECK(herm_expect(outer(plus, plus), pauli_x()) == Catch::Approx(1.0));
}

TEST_CASE("herm_expect rejects non-Hermitian input") {
    Vec2 plus;
    const double r = 1.0 / std::sqrt(2.0);
    plus.a = {r, r};
    Mat2 bad = pauli_x();
    bad(0, 1) += Complex(0, 0.5);  // breaks Hermiticity
    CHECK_THROWS(herm_expect(outer(plus, plus), bad));
}

TEST_CASE("trace and dagger basics") {
    CHECK(trace(Mat4::identity()).real() == 4.0);
    const Mat4 a = random_hermitian4();
    CHECK(max_abs_diff(dagger(dagger(a)), a) == 0.0);
}

TEST_CASE("eigvals of sigma_z") {
    const auto ev = eigvals_hermitian(pauli_z());
    CHECK(ev[0] == Catch::Approx(-1.0));
    CHECK(ev[1] == Catch::Approx(1.0));
}

TEST_CASE("4x4 Hermitian eigenvalues match trace identities") {
    const Mat4 zi = kron(pauli_z(), pauli_i());
    const auto evz = eigvals_hermitian(zi);
    CHECK(evz[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(evz[1] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(evz[2] == Catch::Approx(1.0).margin(1e-12));
    CHECK(evz[3] == Catch::Approx(1.0).margin(1e-12));

    for (int k = 0; k < 25; ++k) {
        const Mat4 a = random_hermitian4();
        const auto ev = eigvals_hermitian(a);
        double s1 = 0, s2 = 0;
        for (double l : ev) {
            s1 += l;
            s2 += l * l;
        }
        CHECK(s1 == Catch::Approx(trace(a).real()).margin(1e-10));
        CHECK(s2 == Catch::Approx(trace_product(a, a).real()).margin(1e-10));
    }
}

TEST_CASE("kron is compatible with matmul") {
    for (int k = 0; k < 20; ++k) {
        const Mat2 a = random_hermitian2(), b = random_hermitian2();
        const Mat2 c = random_hermitian2(), d = random_hermitian2();
        const Mat4 lhs = matmul(kron(a, b), kron(c, d));
        const Mat4 rhs = kron(matmul(a, c), matmul(b, d));
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("trace is cyclic") {
    for (int k = 0; k < 20; ++k) {
        const Mat4 a = random_hermitian4(), b = random_hermitian4();
        CHECK(std::abs(trace_product(a, b) - trace_product(b, a)) < 1e-12);
    }
}

TEST_CASE("vector normalization and inner products") {
    Vec2 v;
    v.a = {Complex(3.0, 1.0), Complex(0.0, -2.0)};
    v.normalize();
    CHECK(v.norm() == Catch::Approx(1.0).margin(1e-14));

    Vec2 w;
    w.a = {0.0, 0.0};
    CHECK_THROWS(w.normalize());

    const Mat2 p = outer(v, v);
    CHECK(trace(p).real() == Catch::Approx(1.0).margin(1e-14));
    CHECK(herm_expect(p, Mat2::identity()) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("density-matrix contract checks") {
    Vec2 k0;
    k0.a = {1.0, 0.0};
    CHECK_NOTHROW(check_density_matrix(outer(k0, k0)));
    Mat2 bad = outer(k0, k0);
    bad(1, 1) = -1e-6;  // negative eigenvalue beyond slack
    CHECK_THROWS(check_density_matrix(bad));
    Mat2 bad_trace = 1.5 * outer(k0, k0);
    CHECK_THROWS(check_density_matrix(bad_trace));
}

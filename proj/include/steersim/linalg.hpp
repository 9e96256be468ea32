#pragma once

// Dense complex linear algebra for the 2- and 4-dimensional Hilbert spaces
// used by the steering engine. Fixed compile-time dimensions; all values are
// plain aggregates with value semantics, so they are trivially shareable
// across trajectory workers.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace steersim {

using Complex = std::complex<double>;

constexpr double kAlgebraTol = 1e-12;   // generic algebraic identities
constexpr double kTraceTol   = 1e-10;   // density-matrix trace
constexpr double kEigvalTol  = 1e-9;    // density-matrix positivity slack

template <int Dim>
struct Vec {
    static_assert(Dim == 2 || Dim == 4, "engine supports one or two qubits");
    std::array<Complex, Dim> a{};

    Complex& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
    const Complex& operator[](int i) const { return a[static_cast<std::size_t>(i)]; }

    double norm2() const {
        double s = 0;
        for (const auto& x : a) s += std::norm(x);
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }

    void normalize() {
        const double n = norm();
        if (n < 1e-300) throw std::runtime_error("cannot normalize null state vector");
        for (auto& x : a) x /= n;
    }
};

template <int Dim>
struct Mat {
    static_assert(Dim == 2 || Dim == 4, "engine supports one or two qubits");
    // row-major
    std::array<Complex, static_cast<std::size_t>(Dim) * Dim> m{};

    Complex& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * Dim + c]; }
    const Complex& operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * Dim + c]; }

    static Mat identity() {
        Mat out;
        for (int i = 0; i < Dim; ++i) out(i, i) = 1.0;
        return out;
    }
    static Mat zero() { return Mat{}; }
};

using Vec2 = Vec<2>;
using Vec4 = Vec<4>;
using Mat2 = Mat<2>;
using Mat4 = Mat<4>;

// ---- elementwise -----------------------------------------------------------

template <int D>
inline Mat<D> operator+(const Mat<D>& x, const Mat<D>& y) {
    Mat<D> out;
    for (std::size_t i = 0; i < x.m.size(); ++i) out.m[i] = x.m[i] + y.m[i];
    return out;
}

template <int D>
inline Mat<D> operator-(const Mat<D>& x, const Mat<D>& y) {
    Mat<D> out;
    for (std::size_t i = 0; i < x.m.size(); ++i) out.m[i] = x.m[i] - y.m[i];
    return out;
}

template <int D>
inline Mat<D>& operator+=(Mat<D>& x, const Mat<D>& y) {
    for (std::size_t i = 0; i < x.m.size(); ++i) x.m[i] += y.m[i];
    return x;
}

template <int D>
inline Mat<D> operator*(Complex s, const Mat<D>& x) {
    Mat<D> out;
    for (std::size_t i = 0; i < x.m.size(); ++i) out.m[i] = s * x.m[i];
    return out;
}

template <int D>
inline Mat<D> operator*(double s, const Mat<D>& x) { return Complex(s, 0.0) * x; }

template <int D>
inline Vec<D> operator+(const Vec<D>& x, const Vec<D>& y) {
    Vec<D> out;
    for (int i = 0; i < D; ++i) out.a[i] = x.a[i] + y.a[i];
    return out;
}

template <int D>
inline Vec<D> operator-(const Vec<D>& x, const Vec<D>& y) {
    Vec<D> out;
    for (int i = 0; i < D; ++i) out.a[i] = x.a[i] - y.a[i];
    return out;
}

template <int D>
inline Vec<D>& operator+=(Vec<D>& x, const Vec<D>& y) {
    for (int i = 0; i < D; ++i) x.a[i] += y.a[i];
    return x;
}

template <int D>
inline Vec<D> operator*(Complex s, const Vec<D>& x) {
    Vec<D> out;
    for (int i = 0; i < D; ++i) out.a[i] = s * x.a[i];
    return out;
}

template <int D>
inline Vec<D> operator*(double s, const Vec<D>& x) { return Complex(s, 0.0) * x; }

// ---- products --------------------------------------------------------------

template <int D>
inline Mat<D> matmul(const Mat<D>& x, const Mat<D>& y) {
    Mat<D> out;
    for (int r = 0; r < D; ++r) {
        for (int k = 0; k < D; ++k) {
            const Complex xv = x(r, k);
            if (xv == Complex{}) continue;
            for (int c = 0; c < D; ++c) out(r, c) += xv * y(k, c);
        }
    }
    return out;
}

template <int D>
inline Mat<D> operator*(const Mat<D>& x, const Mat<D>& y) { return matmul(x, y); }

template <int D>
inline Vec<D> matvec(const Mat<D>& x, const Vec<D>& v) {
    Vec<D> out;
    for (int r = 0; r < D; ++r) {
        Complex s{};
        for (int c = 0; c < D; ++c) s += x(r, c) * v.a[c];
        out.a[r] = s;
    }
    return out;
}

template <int D>
inline Vec<D> operator*(const Mat<D>& x, const Vec<D>& v) { return matvec(x, v); }

template <int D>
inline Complex inner(const Vec<D>& x, const Vec<D>& y) {
    Complex s{};
    for (int i = 0; i < D; ++i) s += std::conj(x.a[i]) * y.a[i];
    return s;
}

template <int D>
inline Mat<D> outer(const Vec<D>& x, const Vec<D>& y) {
    Mat<D> out;
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c) out(r, c) = x.a[r] * std::conj(y.a[c]);
    return out;
}

template <int D>
inline Mat<D> dagger(const Mat<D>& x) {
    Mat<D> out;
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c) out(r, c) = std::conj(x(c, r));
    return out;
}

template <int D>
inline Complex trace(const Mat<D>& x) {
    Complex s{};
    for (int i = 0; i < D; ++i) s += x(i, i);
    return s;
}

// Tr(x*y) without forming the product.
template <int D>
inline Complex trace_product(const Mat<D>& x, const Mat<D>& y) {
    Complex s{};
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c) s += x(r, c) * y(c, r);
    return s;
}

template <int D>
inline Mat<D> commutator(const Mat<D>& x, const Mat<D>& y) {
    return matmul(x, y) - matmul(y, x);
}

template <int D>
inline Mat<D> anticommutator(const Mat<D>& x, const Mat<D>& y) {
    return matmul(x, y) + matmul(y, x);
}

template <int D>
inline double frobenius_norm(const Mat<D>& x) {
    double s = 0;
    for (const auto& v : x.m) s += std::norm(v);
    return std::sqrt(s);
}

template <int D>
inline double max_abs_diff(const Mat<D>& x, const Mat<D>& y) {
    double s = 0;
    for (std::size_t i = 0; i < x.m.size(); ++i) s = std::max(s, std::abs(x.m[i] - y.m[i]));
    return s;
}

// Tensor product, qubit-1 slot first: index = 2*i1 + i2.
inline Mat4 kron(const Mat2& x, const Mat2& y) {
    Mat4 out;
    for (int r1 = 0; r1 < 2; ++r1)
        for (int c1 = 0; c1 < 2; ++c1)
            for (int r2 = 0; r2 < 2; ++r2)
                for (int c2 = 0; c2 < 2; ++c2)
                    out(2 * r1 + r2, 2 * c1 + c2) = x(r1, c1) * y(r2, c2);
    return out;
}

inline Vec4 kron(const Vec2& x, const Vec2& y) {
    Vec4 out;
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2) out.a[2 * i1 + i2] = x.a[i1] * y.a[i2];
    return out;
}

// ---- expectations ----------------------------------------------------------

// Tr(rho*a) for Hermitian a against a density matrix; rejects inputs whose
// trace product carries an imaginary residue (non-Hermitian operator slipped in).
template <int D>
inline double herm_expect(const Mat<D>& rho, const Mat<D>& a) {
    const Complex t = trace_product(rho, a);
    if (std::abs(t.imag()) > kTraceTol)
        throw std::runtime_error("herm_expect: imaginary residue " + std::to_string(t.imag()) +
                                 " exceeds tolerance (non-Hermitian input?)");
    return t.real();
}

template <int D>
inline Complex expect(const Vec<D>& psi, const Mat<D>& a) {
    return inner(psi, matvec(a, psi));
}

template <int D>
inline bool is_hermitian(const Mat<D>& x, double tol = kAlgebraTol) {
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c)
            if (std::abs(x(r, c) - std::conj(x(c, r))) > tol) return false;
    return true;
}

// ---- Hermitian eigenvalues --------------------------------------------------

// Closed form for 2x2, cyclic Jacobi sweeps for 4x4. Ascending order.
inline std::array<double, 2> eigvals_hermitian(const Mat2& x) {
    const double a = x(0, 0).real();
    const double d = x(1, 1).real();
    const double h = (a + d) / 2;
    const double r = std::sqrt((a - d) * (a - d) / 4 + std::norm(x(0, 1)));
    return {h - r, h + r};
}

inline std::array<double, 4> eigvals_hermitian(const Mat4& x) {
    Mat4 a = x;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) off += std::norm(a(p, q));
        if (off < 1e-30) break;
        for (int p = 0; p < 4; ++p) {
            for (int q = p + 1; q < 4; ++q) {
                const Complex apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                // complex Jacobi rotation zeroing a(p,q)
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double absv = std::abs(apq);
                const Complex phase = apq / absv;
                const double theta = 0.5 * std::atan2(2 * absv, app - aqq);
                const double c = std::cos(theta);
                const Complex s = std::sin(theta) * phase;
                // rows/cols update: A <- J^dag A J with J acting on (p,q)
                for (int k = 0; k < 4; ++k) {
                    const Complex akp = a(k, p);
                    const Complex akq = a(k, q);
                    a(k, p) = c * akp + std::conj(s) * akq;
                    a(k, q) = -s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    const Complex apk = a(p, k);
                    const Complex aqk = a(q, k);
                    a(p, k) = c * apk + s * aqk;
                    a(q, k) = -std::conj(s) * apk + c * aqk;
                }
            }
        }
    }
    std::array<double, 4> ev{a(0, 0).real(), a(1, 1).real(), a(2, 2).real(), a(3, 3).real()};
    std::sort(ev.begin(), ev.end());
    return ev;
}

template <int D>
inline double min_eigval(const Mat<D>& x) {
    return eigvals_hermitian(x)[0];
}

template <int D>
inline double purity_of(const Mat<D>& rho) {
    return trace_product(rho, rho).real();
}

// Checks the density-matrix contract: unit trace and spectrum above -kEigvalTol.
template <int D>
inline void check_density_matrix(const Mat<D>& rho, double eig_tol = kEigvalTol) {
    const Complex t = trace(rho);
    if (std::abs(t.real() - 1.0) > kTraceTol || std::abs(t.imag()) > kTraceTol)
        throw std::runtime_error("density matrix trace deviates from 1");
    if (min_eigval(rho) < -eig_tol)
        throw std::runtime_error("density matrix has negative eigenvalue beyond tolerance");
}

}  // namespace steersim

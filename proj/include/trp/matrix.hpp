#pragma once

// Dense complex linear algebra for the fixed dimensions that occur here (2 and 4):
// products, adjoints, Kronecker products, Hermitian eigendecomposition (cyclic
// complex Jacobi), and the matrix exponential of -i*dt*H via that decomposition.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace trp {

using cplx = std::complex<double>;

// Thrown on contract violations that indicate a numerical failure (exit code 2).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed configuration/arguments (exit code 1).
struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

template <int N>
struct Matrix {
    static_assert(N == 2 || N == 4, "only the 2- and 4-dimensional cases occur");
    std::array<cplx, N * N> a{};

    cplx& operator()(int r, int c) { return a[r * N + c]; }
    const cplx& operator()(int r, int c) const { return a[r * N + c]; }

    static Matrix zero() { return Matrix{}; }
    static Matrix identity() {
        Matrix m;
        for (int i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    Matrix adjoint() const {
        Matrix m;
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) m(r, c) = std::conj((*this)(c, r));
        return m;
    }
    Matrix conjugate() const {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.a[i] = std::conj(a[i]);
        return m;
    }
    cplx trace() const {
        cplx t = 0.0;
        for (int i = 0; i < N; ++i) t += (*this)(i, i);
        return t;
    }

    friend Matrix operator+(const Matrix& x, const Matrix& y) {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.a[i] = x.a[i] + y.a[i];
        return m;
    }
    friend Matrix operator-(const Matrix& x, const Matrix& y) {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.a[i] = x.a[i] - y.a[i];
        return m;
    }
    friend Matrix operator*(cplx s, const Matrix& x) {
        Matrix m;
        for (int i = 0; i < N * N; ++i) m.a[i] = s * x.a[i];
        return m;
    }
    friend Matrix operator*(const Matrix& x, cplx s) { return s * x; }
    friend Matrix operator*(const Matrix& x, const Matrix& y) {
        Matrix m;
        for (int r = 0; r < N; ++r)
            for (int k = 0; k < N; ++k) {
                const cplx xr = x(r, k);
                if (xr == 0.0) continue;
                for (int c = 0; c < N; ++c) m(r, c) += xr * y(k, c);
            }
        return m;
    }
};

template <int N>
double max_abs(const Matrix<N>& m) {
    double v = 0.0;
    for (const auto& e : m.a) v = std::max(v, std::abs(e));
    return v;
}

template <int N>
double max_abs_diff(const Matrix<N>& x, const Matrix<N>& y) {
    return max_abs<N>(x - y);
}

template <int N>
bool all_finite(const Matrix<N>& m) {
    for (const auto& e : m.a)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}

inline Matrix<4> tensor(const Matrix<2>& x, const Matrix<2>& y) {
    // Basis order |up,up>, |up,down>, |down,up>, |down,down>: row index 2*r1+r2.
    Matrix<4> m;
    for (int r1 = 0; r1 < 2; ++r1)
        for (int c1 = 0; c1 < 2; ++c1)
            for (int r2 = 0; r2 < 2; ++r2)
                for (int c2 = 0; c2 < 2; ++c2)
                    m(2 * r1 + r2, 2 * c1 + c2) = x(r1, c1) * y(r2, c2);
    return m;
}

inline Matrix<2> pauli_x() { return Matrix<2>{{cplx(0), cplx(1), cplx(1), cplx(0)}}; }
inline Matrix<2> pauli_y() { return Matrix<2>{{cplx(0), cplx(0, -1), cplx(0, 1), cplx(0)}}; }
inline Matrix<2> pauli_z() { return Matrix<2>{{cplx(1), cplx(0), cplx(0), cplx(-1)}}; }

constexpr double hermitian_tol = 1e-12;
constexpr double unitary_tol = 1e-10;

// Validating wrappers. Construction checks the structural invariant once; the
// payload stays an ordinary value afterwards.
template <int N>
struct Hermitian {
    Matrix<N> m;
    explicit Hermitian(const Matrix<N>& in) : m(in) {
        if (!all_finite(in)) throw numeric_error("hermitian: non-finite entries");
        if (max_abs_diff(in, in.adjoint()) > hermitian_tol)
            throw numeric_error("hermitian: ||M - M^dag|| exceeds 1e-12");
    }
};

template <int N>
struct Unitary {
    Matrix<N> m;
    explicit Unitary(const Matrix<N>& in) : m(in) {
        if (!all_finite(in)) throw numeric_error("unitary: non-finite entries");
        if (max_abs_diff(in.adjoint() * in, Matrix<N>::identity()) > unitary_tol)
            throw numeric_error("unitary: ||U^dag U - I|| exceeds 1e-10");
    }
};

template <int N>
struct EigenDecomposition {
    std::array<double, N> values;  // ascending
    Matrix<N> vectors;             // orthonormal columns, vectors(:,k) <-> values[k]
};

// Cyclic complex Jacobi. Each rotation exactly zeroes one off-diagonal pair; for
// these dims a handful of sweeps reaches machine precision.
template <int N>
EigenDecomposition<N> eigh(const Matrix<N>& h) {
    Matrix<N> A = h;
    Matrix<N> V = Matrix<N>::identity();

    double scale = max_abs(A);
    if (scale == 0.0) scale = 1.0;

    bool converged = false;
    for (int sweep = 0; sweep < 64 && !converged; ++sweep) {
        converged = true;
        for (int p = 0; p < N - 1; ++p) {
            for (int q = p + 1; q < N; ++q) {
                const cplx apq = A(p, q);
                if (std::abs(apq) <= 1e-15 * scale) continue;
                converged = false;

                // Phase u makes the off-diagonal real positive, then a real
                // rotation annihilates it (Golub & Van Loan sym.schur2).
                const double ab = std::abs(apq);
                const cplx u = apq / ab;
                const double app = A(p, p).real();
                const double aqq = A(q, q).real();
                const double tau = (aqq - app) / (2.0 * ab);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // Plane rotation G: G(p,p)=c, G(p,q)=s*u, G(q,p)=-s*conj(u), G(q,q)=c.
                // With t from t^2 + 2*tau*t - 1 = 0 this zeroes A(p,q) exactly.
                const cplx gpq = s * u;
                const cplx gqp = -s * std::conj(u);

                for (int k = 0; k < N; ++k) {  // A <- G^dag A (rows p,q)
                    const cplx akp = A(p, k), akq = A(q, k);
                    A(p, k) = c * akp + std::conj(gqp) * akq;
                    A(q, k) = std::conj(gpq) * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {  // A <- A G (cols p,q)
                    const cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp + gqp * akq;
                    A(k, q) = gpq * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {  // V <- V G
                    const cplx vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp + gqp * vkq;
                    V(k, q) = gpq * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) throw numeric_error("eigh: Jacobi failed to converge, residual " +
                                        std::to_string(max_abs(A)));

    EigenDecomposition<N> d;
    std::array<int, N> order;
    for (int i = 0; i < N; ++i) order[i] = i;
    for (int i = 0; i < N; ++i)  // insertion sort by eigenvalue, ascending
        for (int j = i; j > 0 && A(order[j], order[j]).real() < A(order[j - 1], order[j - 1]).real(); --j)
            std::swap(order[j], order[j - 1]);
    for (int k = 0; k < N; ++k) {
        d.values[k] = A(order[k], order[k]).real();
        for (int r = 0; r < N; ++r) d.vectors(r, k) = V(r, order[k]);
    }
    return d;
}

// exp(-i*dt*h) for Hermitian h, exact through the eigendecomposition.
template <int N>
Matrix<N> expm_skew(const Matrix<N>& h, double dt) {
    if (max_abs_diff(h, h.adjoint()) > hermitian_tol)
        throw numeric_error("expm_skew: input not Hermitian within 1e-12");
    const auto d = eigh(h);
    Matrix<N> m;
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            cplx sum = 0.0;
            for (int k = 0; k < N; ++k)
                sum += d.vectors(r, k) * std::polar(1.0, -dt * d.values[k]) *
                       std::conj(d.vectors(c, k));
            m(r, c) = sum;
        }
    return m;
}

}  // namespace trp

#pragma once

// Gate-quality metrics: the positive error operator P = (Ua - Ut)^dag (Ua - Ut),
// its trace (upper bound on the worst-case error probability), and gate fidelity.
// P is phase-sensitive by design; a phase-minimized variant is exposed separately
// as a diagnostic only.

#include <array>
#include <cmath>

#include "trp/matrix.hpp"

namespace trp {

template <int N>
Matrix<N> error_operator(const Matrix<N>& ua, const Matrix<N>& ut) {
    const Matrix<N> d = ua - ut;
    return d.adjoint() * d;
}

template <int N>
double trace_p(const Matrix<N>& ua, const Matrix<N>& ut) {
    // Tr P = 2*N - 2 Re Tr(Ua^dag Ut); clamp the roundoff window [-1e-12, 0).
    const double t = 2.0 * N - 2.0 * (ua.adjoint() * ut).trace().real();
    if (t < -1e-12) throw numeric_error("trace_p: negative beyond roundoff");
    return t < 0.0 ? 0.0 : t;
}

template <int N>
double fidelity(const Matrix<N>& ua, const Matrix<N>& ut) {
    return (ua.adjoint() * ut).trace().real() / static_cast<double>(N);
}

// <psi| P |psi> = ||(Ua - Ut)|psi>||^2 for a normalized state.
template <int N>
double pe_of_state(const Matrix<N>& ua, const Matrix<N>& ut,
                   const std::array<cplx, N>& psi) {
    double norm2 = 0.0;
    for (const auto& c : psi) norm2 += std::norm(c);
    if (std::abs(norm2 - 1.0) > 1e-10) throw usage_error("pe_of_state: psi not normalized");
    const Matrix<N> d = ua - ut;
    double out = 0.0;
    for (int r = 0; r < N; ++r) {
        cplx amp = 0.0;
        for (int c = 0; c < N; ++c) amp += d(r, c) * psi[c];
        out += std::norm(amp);
    }
    return out;
}

// Largest eigenvalue of P: the exact worst-case error probability over states.
template <int N>
double pe_eigen_bound(const Matrix<N>& ua, const Matrix<N>& ut) {
    return eigh(error_operator(ua, ut)).values[N - 1];
}

// Diagnostic only: min over a global phase of Ua. Not the primary metric.
template <int N>
double trace_p_phase_optimized(const Matrix<N>& ua, const Matrix<N>& ut) {
    return 2.0 * N - 2.0 * std::abs((ua.adjoint() * ut).trace());
}

struct GateMetrics {
    double trace_p = 0.0;
    double fidelity = 0.0;
    double pe_upper_bound = 0.0;   // = trace_p
    double pe_eigen_bound = 0.0;   // largest eigenvalue of P, <= trace_p
    int n_qubits = 1;
};

template <int N>
GateMetrics gate_metrics(const Matrix<N>& ua, const Matrix<N>& ut) {
    static_assert(N == 2 || N == 4);
    GateMetrics m;
    m.n_qubits = (N == 2) ? 1 : 2;
    m.trace_p = trace_p(ua, ut);
    m.fidelity = fidelity(ua, ut);
    m.pe_upper_bound = m.trace_p;
    m.pe_eigen_bound = pe_eigen_bound(ua, ut);
    return m;
}

}  // namespace trp

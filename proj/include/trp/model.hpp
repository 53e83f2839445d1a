#pragma once

// Sweep/phase definitions, lab<->dimensionless conversions, the one- and two-qubit
// Hamiltonians, resonance analysis, and the five target gates.

#include <cmath>
#include <string>
#include <vector>

#include "trp/matrix.hpp"

namespace trp {

constexpr double pi = 3.14159265358979323846;

struct SweepParameters {
    double lambda = 1.0;  // dimensionless inversion-rate parameter
    double eta4 = 1.0;    // dimensionless quartic twist strength
    double tau0 = 1.0;    // dimensionless inversion time

    void validate() const {
        if (!(lambda > 0.0 && eta4 > 0.0 && tau0 > 0.0))
            throw usage_error("sweep parameters must be positive");
    }
};

struct OneQubitLabParameters {
    double a;     // inversion rate, energy/time
    double b;     // transverse field strength, energy
    double B;     // quartic twist strength, rad/time^4
    double T0;    // inversion time
    double hbar = 1.0;
};

struct TwoQubitLabParameters {
    double gamma1, gamma2;  // gyromagnetic ratios
    double Brf;             // rf field amplitude
    double B0;              // static field
    double Delta;           // detuning
    double J;               // Ising coupling
    double a;               // inversion rate
    double B;               // twist strength
    double T0;              // inversion time
    double hbar = 1.0;
};

struct TwoQubitSystemParameters {
    double c4 = 0.0;  // degeneracy-breaking strength
    double d1 = 0.0;  // frequency difference
    double d2 = 0.0;  // detuning
    double d3 = 1.0;  // transverse field ratio
    double d4 = 0.0;  // Ising coupling
};

// phi_4(tau) = (eta4/2 lambda) tau^4 and its time derivative.
inline double phase_quartic(double tau, const SweepParameters& p) {
    return (p.eta4 / (2.0 * p.lambda)) * tau * tau * tau * tau;
}
inline double phase_quartic_rate(double tau, const SweepParameters& p) {
    return (2.0 * p.eta4 / p.lambda) * tau * tau * tau;
}

struct ResonanceTimes {
    std::vector<double> roots;        // dimensionless times where sweep balances twist rate
    std::vector<bool> inside_window;  // whether each root lies in [-tau0/2, tau0/2]
};

// The sweep passes through resonance where tau - eta4*tau^3 = 0: at 0 and at
// +-eta4^{-1/2}. The window flag uses the half-open sweep convention of the
// symmetrized (two-qubit) runs; one-qubit synthesis uses the doubled window
// (see gates.hpp) where all three roots are interior for Table-scale eta4.
inline ResonanceTimes resonance_times(const SweepParameters& p) {
    ResonanceTimes r;
    const double root = 1.0 / std::sqrt(p.eta4);
    r.roots = {0.0, +root, -root};
    for (double t : r.roots) r.inside_window.push_back(std::abs(t) <= p.tau0 / 2.0);
    return r;
}

inline SweepParameters lab_to_dimensionless_1q(const OneQubitLabParameters& q) {
    SweepParameters p;
    p.lambda = q.hbar * q.a / (q.b * q.b);
    p.eta4 = q.hbar * q.B * q.b * q.b / (q.a * q.a * q.a);
    p.tau0 = (q.a / q.b) * q.T0;
    return p;
}

struct TwoQubitDimensionless {
    SweepParameters sweep;
    TwoQubitSystemParameters system;  // c4 not derivable from lab values; left 0
};

inline TwoQubitDimensionless lab_to_dimensionless_2q(const TwoQubitLabParameters& q) {
    const double b1 = q.hbar * q.gamma1 * q.Brf / 2.0;
    const double b2 = q.hbar * q.gamma2 * q.Brf / 2.0;
    const double w1 = q.gamma1 * q.B0;
    const double w2 = q.gamma2 * q.B0;
    TwoQubitDimensionless out;
    out.sweep.lambda = q.hbar * q.a / (b2 * b2);
    out.sweep.eta4 = q.hbar * q.B * b2 * b2 / (q.a * q.a * q.a);
    out.sweep.tau0 = (q.a / b2) * q.T0;
    out.system.d1 = (w1 - w2) * b2 / q.a;
    out.system.d2 = (q.Delta / q.a) * b2;
    out.system.d3 = b1 / b2;
    out.system.d4 = (q.J / q.a) * b2;
    return out;
}

// One-qubit sweep Hamiltonian in the lab frame:
//   H1(tau) = (1/lambda) { -tau sz - cos(phi4) sx - sin(phi4) sy }.
inline Matrix<2> build_h1(double tau, const SweepParameters& p) {
    const double phi = phase_quartic(tau, p);
    const double inv = 1.0 / p.lambda;
    Matrix<2> h;
    h(0, 0) = -inv * tau;
    h(1, 1) = inv * tau;
    h(0, 1) = -inv * cplx(std::cos(phi), -std::sin(phi));
    h(1, 0) = -inv * cplx(std::cos(phi), std::sin(phi));
    return h;
}

// The same sweep in the frame co-twisting with the transverse field, oriented so
// the transverse component lies along +x. The z coefficient (tau - eta4 tau^3)/lambda
// vanishes exactly at the resonance times, which makes the interference structure
// manifest; gate synthesis propagates this form.
inline Matrix<2> h1_frame(double tau, const SweepParameters& p) {
    const double inv = 1.0 / p.lambda;
    const double z = inv * (tau - p.eta4 * tau * tau * tau);
    Matrix<2> h;
    h(0, 0) = z;
    h(1, 1) = -z;
    h(0, 1) = inv;
    h(1, 0) = inv;
    return h;
}

// Rank-1 projector onto the highest eigenstate of a Hermitian matrix. Phase-free
// by construction (outer product of the eigenvector with itself).
template <int N>
Matrix<N> project_top(const Matrix<N>& h, double min_gap = 1e-9) {
    const auto d = eigh(h);
    if (d.values[N - 1] - d.values[N - 2] < min_gap)
        throw numeric_error("project_top: top eigenvalue degenerate (gap < 1e-9)");
    Matrix<N> proj;
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c)
            proj(r, c) = d.vectors(r, N - 1) * std::conj(d.vectors(c, N - 1));
    return proj;
}

// Static diagonal backbone of the two-qubit system: the tau-independent part
//   -(d1+d2)/2 sz1 - (d2/2) sz2 - (pi d4/2) sz1 sz2,
// i.e. the energy-level structure the sweep and the c4 term act on.
inline Matrix<4> static_backbone(const TwoQubitSystemParameters& s) {
    const Matrix<4> sz1 = tensor(pauli_z(), Matrix<2>::identity());
    const Matrix<4> sz2 = tensor(Matrix<2>::identity(), pauli_z());
    const Matrix<4> szsz = tensor(pauli_z(), pauli_z());
    return cplx(-(s.d1 + s.d2) / 2.0) * sz1 + cplx(-s.d2 / 2.0) * sz2 +
           cplx(-pi * s.d4 / 2.0) * szsz;
}

// tau-independent part of the two-qubit Hamiltonian: the backbone plus the
// degeneracy-breaking term, c4 times the projector onto the backbone's highest
// eigenstate (|down,up> for the shipped working point). Callers on a hot path
// should resolve this once and add h2_sweep_part per slice.
inline Matrix<4> h2_static_part(const TwoQubitSystemParameters& s) {
    Matrix<4> h = static_backbone(s);
    if (s.c4 != 0.0) h = h + cplx(s.c4) * project_top(static_backbone(s));
    return h;
}

// tau-dependent sweep terms: longitudinal inversion on both qubits plus the
// twisting transverse fields (ratio d3 on qubit 1).
inline Matrix<4> h2_sweep_part(double tau, const SweepParameters& p,
                               const TwoQubitSystemParameters& s) {
    const Matrix<2> i2 = Matrix<2>::identity();
    const Matrix<4> sz1 = tensor(pauli_z(), i2);
    const Matrix<4> sz2 = tensor(i2, pauli_z());
    const Matrix<4> sx1 = tensor(pauli_x(), i2);
    const Matrix<4> sy1 = tensor(pauli_y(), i2);
    const Matrix<4> sx2 = tensor(i2, pauli_x());
    const Matrix<4> sy2 = tensor(i2, pauli_y());

    const double phi = phase_quartic(tau, p);
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double inv = 1.0 / p.lambda;

    return cplx(tau * inv) * (sz1 + sz2) +
           cplx(-s.d3 * inv) * (cplx(cphi) * sx1 + cplx(sphi) * sy1) +
           cplx(-inv) * (cplx(cphi) * sx2 + cplx(sphi) * sy2);
}

// Full two-qubit sweep Hamiltonian.
inline Matrix<4> build_h2(double tau, const SweepParameters& p,
                          const TwoQubitSystemParameters& s) {
    Matrix<4> stat;
    try {
        stat = h2_static_part(s);
    } catch (const numeric_error& e) {
        throw numeric_error(std::string(e.what()) + " at tau=" + std::to_string(tau));
    }
    return stat + h2_sweep_part(tau, p, s);
}

enum class Gate { hadamard, not_gate, modified_pi8, modified_phase, modified_controlled_phase };

inline Gate gate_from_name(const std::string& name) {
    if (name == "hadamard") return Gate::hadamard;
    if (name == "not") return Gate::not_gate;
    if (name == "modified_pi8") return Gate::modified_pi8;
    if (name == "modified_phase") return Gate::modified_phase;
    if (name == "modified_controlled_phase") return Gate::modified_controlled_phase;
    throw usage_error("unknown gate: " + name);
}

inline std::string gate_name(Gate g) {
    switch (g) {
        case Gate::hadamard: return "hadamard";
        case Gate::not_gate: return "not";
        case Gate::modified_pi8: return "modified_pi8";
        case Gate::modified_phase: return "modified_phase";
        case Gate::modified_controlled_phase: return "modified_controlled_phase";
    }
    throw usage_error("unknown gate enum");
}

inline int gate_qubits(Gate g) { return g == Gate::modified_controlled_phase ? 2 : 1; }

inline Matrix<2> target_gate_1q(Gate g) {
    const double r2 = 1.0 / std::sqrt(2.0);
    switch (g) {
        case Gate::hadamard:
            return cplx(r2) * (pauli_z() + pauli_x());
        case Gate::not_gate:
            return pauli_x();
        case Gate::modified_pi8:
            return cplx(std::cos(pi / 8.0)) * pauli_x() - cplx(std::sin(pi / 8.0)) * pauli_y();
        case Gate::modified_phase:
            return cplx(r2) * (pauli_x() - pauli_y());
        default:
            throw usage_error("target_gate_1q: two-qubit gate requested");
    }
}

inline Matrix<4> target_gate_2q(Gate g) {
    if (g != Gate::modified_controlled_phase)
        throw usage_error("target_gate_2q: one-qubit gate requested");
    Matrix<4> v = Matrix<4>::identity();
    v(2, 2) = -1.0;  // computational basis |uu>,|ud>,|du>,|dd>
    return v;
}

}  // namespace trp

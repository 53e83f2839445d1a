#pragma once

// Group-symmetrized propagation: the sweep window is cut into N subintervals of
// |G| sub-subintervals each; instantaneous (bang-bang) pulses conjugate successive
// evolution segments by the group elements, so each subinterval realizes
// prod_i rho_i^dag dU rho_i and the effective generator tends to the group average.

#include <cmath>
#include <vector>

#include "trp/matrix.hpp"
#include "trp/model.hpp"
#include "trp/propagate.hpp"

namespace trp {

template <int N>
struct SymmetryGroup {
    std::vector<Matrix<N>> elements;  // rho_1 = I first

    void validate() const {
        if (elements.empty()) throw usage_error("symmetry group: empty");
        if (max_abs_diff(elements[0], Matrix<N>::identity()) != 0.0)
            throw usage_error("symmetry group: rho_1 must be the identity exactly");
        for (const auto& g : elements)
            if (max_abs_diff(g.adjoint() * g, Matrix<N>::identity()) > 1e-12)
                throw numeric_error("symmetry group: element not unitary to 1e-12");
        // Closure up to a global phase.
        for (const auto& gi : elements)
            for (const auto& gj : elements) {
                const Matrix<N> prod = gi * gj;
                bool found = false;
                for (const auto& gk : elements) {
                    // phase-insensitive comparison: |tr(gk^dag prod)| = N iff equal up to phase
                    if (std::abs(std::abs((gk.adjoint() * prod).trace()) - N) < 1e-10 * N) {
                        found = true;
                        break;
                    }
                }
                if (!found) throw numeric_error("symmetry group: not closed under product");
            }
    }
};

// The group used for the controlled-phase construction: {I x I, sz x I, I x sz, sz x sz}.
inline SymmetryGroup<4> pauli_z_group_2q() {
    const Matrix<2> i2 = Matrix<2>::identity();
    return SymmetryGroup<4>{{tensor(i2, i2), tensor(pauli_z(), i2), tensor(i2, pauli_z()),
                             tensor(pauli_z(), pauli_z())}};
}

inline SymmetryGroup<2> pauli_z_group_1q() {
    return SymmetryGroup<2>{{Matrix<2>::identity(), pauli_z()}};
}

template <int N>
struct SymmetrizationSchedule {
    SymmetryGroup<N> group;
    long n_subintervals = 1;
    long slices_per_subsub = 4;  // integrator slices inside each sub-subinterval

    void validate() const {
        group.validate();
        if (n_subintervals < 1) throw usage_error("schedule: n_subintervals must be >= 1");
        if (slices_per_subsub < 1) throw usage_error("schedule: slices_per_subsub must be >= 1");
    }
    long total_slices() const {
        return n_subintervals * static_cast<long>(group.elements.size()) * slices_per_subsub;
    }
};

struct SubintervalEstimate {
    long n_min;       // smallest subinterval count meeting the twist-resolution ratio
    double dt_bound;  // the corresponding bound on the subinterval length
};

// Resolution requirement: the per-subinterval twist increment must stay below
// ratio * phi_f, and for the quartic profile phi_f / phidot(tau0/2) = tau0/8
// analytically. Hence dt < ratio*tau0/8 and n > 8/ratio, independent of tau0.
inline SubintervalEstimate min_subintervals(const SweepParameters& p, double ratio) {
    if (!(ratio > 0.0)) throw usage_error("min_subintervals: ratio must be positive");
    SubintervalEstimate e;
    e.dt_bound = ratio * p.tau0 / 8.0;
    long n = static_cast<long>(std::floor(8.0 / ratio));
    if (n < 1) n = 1;
    while (!(p.tau0 / static_cast<double>(n) < e.dt_bound)) {
        ++n;
        if (n > (1L << 40)) throw numeric_error("min_subintervals: no finite n satisfies bound");
    }
    e.n_min = n;
    return e;
}

// Group average (1/|G|) sum rho_i^dag H rho_i: the projection of H onto the
// commutant of the group.
template <int N>
Matrix<N> effective_hamiltonian(const Matrix<N>& h, const SymmetryGroup<N>& g) {
    Matrix<N> sum;
    for (const auto& rho : g.elements) sum = sum + rho.adjoint() * h * rho;
    return cplx(1.0 / static_cast<double>(g.elements.size())) * sum;
}

// Pulse after sub-subinterval j (0-based): rho_{j+2} rho_{j+1}^dag interleaved,
// and the closing rho_{|G|}^dag after the last, so the subinterval product equals
// prod_i rho_i^dag dU rho_i exactly.
template <int N>
std::vector<Matrix<N>> pulse_sequence(const SymmetryGroup<N>& g) {
    const int m = static_cast<int>(g.elements.size());
    std::vector<Matrix<N>> pulses;
    for (int j = 0; j + 1 < m; ++j)
        pulses.push_back(g.elements[j + 1] * g.elements[j].adjoint());
    pulses.push_back(g.elements[m - 1].adjoint());
    return pulses;
}

template <int N>
Matrix<N> symmetrized_propagate_window(const HamiltonianFn<N>& hsource, double lo, double hi,
                                       const SymmetrizationSchedule<N>& sched,
                                       SliceRule rule = SliceRule::midpoint_exponential) {
    sched.validate();
    const long total = sched.total_slices();
    const double dt = (hi - lo) / static_cast<double>(total);
    const auto pulses = pulse_sequence(sched.group);
    const long m = static_cast<long>(sched.group.elements.size());

    Matrix<N> u = Matrix<N>::identity();
    long slice = 0;
    for (long i = 0; i < sched.n_subintervals; ++i) {
        for (long j = 0; j < m; ++j) {
            for (long k = 0; k < sched.slices_per_subsub; ++k, ++slice) {
                const double ts = (rule == SliceRule::midpoint_exponential)
                                      ? lo + (static_cast<double>(slice) + 0.5) * dt
                                      : lo + static_cast<double>(slice) * dt;
                u = slice_exponential<N>(hsource(ts), dt) * u;
            }
            u = pulses[j] * u;
        }
    }
    return u;
}

// Sweep-window form: integrates over [-tau0/2, +tau0/2].
template <int N>
Matrix<N> symmetrized_propagate(const HamiltonianFn<N>& hsource, const SweepParameters& p,
                                const SymmetrizationSchedule<N>& sched,
                                SliceRule rule = SliceRule::midpoint_exponential) {
    return symmetrized_propagate_window<N>(hsource, -p.tau0 / 2.0, p.tau0 / 2.0, sched, rule);
}

// Overload with an explicit plan; the plan must tile the schedule exactly.
template <int N>
Matrix<N> symmetrized_propagate(const HamiltonianFn<N>& hsource, const SweepParameters& p,
                                const SymmetrizationSchedule<N>& sched,
                                const PropagationPlan& plan) {
    sched.validate();
    if (plan.steps != sched.total_slices())
        throw usage_error("symmetrized_propagate: plan steps do not align with schedule "
                          "sub-subinterval boundaries");
    return symmetrized_propagate<N>(hsource, p, sched, plan.rule);
}

}  // namespace trp

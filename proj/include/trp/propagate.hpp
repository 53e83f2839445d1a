#pragma once

// Time-ordered integration of the Schrodinger equation i dU/dtau = H(tau) U over a
// window, one exact matrix exponential per uniform slice. Unconditionally unitary.

#include <functional>
#include <vector>

#include "trp/matrix.hpp"
#include "trp/model.hpp"

namespace trp {

enum class SliceRule { midpoint_exponential, endpoint_exponential };

struct PropagationPlan {
    long steps = 40000;
    SliceRule rule = SliceRule::midpoint_exponential;

    void validate() const {
        if (steps < 1) throw usage_error("propagation plan: steps must be >= 1");
    }
};

inline SliceRule slice_rule_from_name(const std::string& name) {
    if (name == "midpoint_exponential") return SliceRule::midpoint_exponential;
    if (name == "endpoint_exponential") return SliceRule::endpoint_exponential;
    throw usage_error("unknown slice rule: " + name);
}

inline std::string slice_rule_name(SliceRule r) {
    return r == SliceRule::midpoint_exponential ? "midpoint_exponential"
                                                : "endpoint_exponential";
}

template <int N>
using HamiltonianFn = std::function<Matrix<N>(double)>;

// Closed-form slice exponential for dim 2: H = e*I + z*sz + (x + i y pattern) off-
// diagonals. Avoids the Jacobi round-trip in the innermost one-qubit loop.
inline Matrix<2> expm_skew_2(const Matrix<2>& h, double dt) {
    const double e = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double z = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double x = h(0, 1).real();
    const double y = -h(0, 1).imag();  // h = e I + x sx + y sy + z sz
    const double r = std::sqrt(x * x + y * y + z * z);
    const double w = dt * r;
    const double co = std::cos(w);
    const double sn = (r > 0.0) ? std::sin(w) / r : dt;  // sin(dt*r)/r -> dt as r->0
    const cplx ph = std::polar(1.0, -dt * e);
    Matrix<2> m;
    m(0, 0) = ph * cplx(co, -sn * z);
    m(1, 1) = ph * cplx(co, +sn * z);
    m(0, 1) = ph * cplx(-sn * y, -sn * x);
    m(1, 0) = ph * cplx(+sn * y, -sn * x);
    return m;
}

template <int N>
Matrix<N> slice_exponential(const Matrix<N>& h, double dt) {
    if constexpr (N == 2)
        return expm_skew_2(h, dt);
    else
        return expm_skew<N>(h, dt);
}

// Propagate over [lo, hi] with the given plan; U(lo) = I.
template <int N>
Matrix<N> propagate_window(const HamiltonianFn<N>& hsource, double lo, double hi,
                           const PropagationPlan& plan) {
    plan.validate();
    const double dt = (hi - lo) / static_cast<double>(plan.steps);
    Matrix<N> u = Matrix<N>::identity();
    for (long k = 0; k < plan.steps; ++k) {
        const double ts = (plan.rule == SliceRule::midpoint_exponential)
                              ? lo + (static_cast<double>(k) + 0.5) * dt
                              : lo + static_cast<double>(k) * dt;
        u = slice_exponential<N>(hsource(ts), dt) * u;
    }
    return u;
}

// Default sweep-window overload: integrates over [-tau0/2, +tau0/2].
template <int N>
Matrix<N> propagate(const HamiltonianFn<N>& hsource, const SweepParameters& p,
                    const PropagationPlan& plan) {
    return propagate_window<N>(hsource, -p.tau0 / 2.0, p.tau0 / 2.0, plan);
}

struct ConvergenceRow {
    long steps;
    double delta;  // ||U(steps) - U(2*steps)||_max
};

// Step-doubling study. For the midpoint rule successive deltas shrink ~4x per
// level until the roundoff floor.
template <int N>
std::vector<ConvergenceRow> convergence_study(const HamiltonianFn<N>& hsource, double lo,
                                              double hi, long base_steps, int doublings,
                                              SliceRule rule = SliceRule::midpoint_exponential) {
    if (doublings < 1) throw usage_error("convergence_study: doublings must be >= 1");
    std::vector<ConvergenceRow> rows;
    long steps = base_steps;
    PropagationPlan plan{steps, rule};
    Matrix<N> prev = propagate_window<N>(hsource, lo, hi, plan);
    for (int d = 0; d < doublings; ++d) {
        steps *= 2;
        plan.steps = steps;
        Matrix<N> next = propagate_window<N>(hsource, lo, hi, plan);
        rows.push_back({steps / 2, max_abs_diff(prev, next)});
        prev = next;
    }
    return rows;
}

// Observed order p of the integrator, from the least-squares fit delta ~ steps^(-p);
// p = 2 for the midpoint rule away from the roundoff floor.
inline double convergence_slope(const std::vector<ConvergenceRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.delta <= 0.0) continue;  // roundoff floor rows carry no information
        const double x = std::log(static_cast<double>(r.steps));
        const double y = std::log(r.delta);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    if (n < 2) throw numeric_error("convergence_slope: fewer than two usable rows");
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace trp

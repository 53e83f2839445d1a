#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "trp/symmetrize.hpp"

using namespace trp;
using Catch::Matchers::WithinAbs;

namespace {

template <int N>
Matrix<N> random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix<N> a;
    for (auto& e : a.a) e = cplx(u(rng), u(rng));
    return cplx(0.5) * (a + a.adjoint());
}

double commutator_norm(const Matrix<4>& a, const Matrix<4>& b) {
    return max_abs(a * b - b * a);
}

}  // namespace

TEST_CASE("group validation") {
    CHECK_NOTHROW(pauli_z_group_1q().validate());
    CHECK_NOTHROW(pauli_z_group_2q().validate());
    CHECK(pauli_z_group_2q().elements.size() == 4);

    SECTION("identity must come first, exactly") {
        SymmetryGroup<2> g{{pauli_z(), Matrix<2>::identity()}};
        CHECK_THROWS_AS(g.validate(), usage_error);
        CHECK_THROWS_AS(SymmetryGroup<2>{}.validate(), usage_error);
    }

    SECTION("elements must be unitary") {
        SymmetryGroup<2> g{{Matrix<2>::identity(), cplx(0.5) * pauli_z()}};
        CHECK_THROWS_AS(g.validate(), numeric_error);
    }

    SECTION("products must close, up to a phase") {
        // {I, exp(-i 0.3 sz)} is unitary but not closed: the square is new.
        SymmetryGroup<2> g{{Matrix<2>::identity(), expm_skew<2>(pauli_z(), 0.3)}};
        CHECK_THROWS_AS(g.validate(), numeric_error);
        // Phase freedom is allowed: {I, i*sz} closes because (i sz)^2 = -I ~ I.
        SymmetryGroup<2> phased{{Matrix<2>::identity(), cplx(0, 1) * pauli_z()}};
        CHECK_NOTHROW(phased.validate());
    }
}

TEST_CASE("pulse sequence telescopes through the group") {
    const auto g = pauli_z_group_2q();
    const auto pulses = pulse_sequence(g);
    REQUIRE(pulses.size() == 4);
    const auto i2 = Matrix<2>::identity();
    CHECK(max_abs_diff(pulses[0], tensor(pauli_z(), i2)) == 0.0);
    CHECK(max_abs_diff(pulses[1], tensor(pauli_z(), pauli_z())) == 0.0);
    CHECK(max_abs_diff(pulses[2], tensor(pauli_z(), i2)) == 0.0);
    CHECK(max_abs_diff(pulses[3], tensor(pauli_z(), pauli_z())) == 0.0);

    // Interleaving pulses with identity evolutions reproduces prod rho_i^dag rho_i = I.
    Matrix<4> u = Matrix<4>::identity();
    for (const auto& pulse : pulses) u = pulse * u;
    // pulse product = rho_m^dag rho_m rho_1^dag = I for this group ordering
    CHECK(max_abs_diff(u, Matrix<4>::identity()) < 1e-15);

    const auto p1 = pulse_sequence(pauli_z_group_1q());
    REQUIRE(p1.size() == 2);
    CHECK(max_abs_diff(p1[0], pauli_z()) == 0.0);
    CHECK(max_abs_diff(p1[1], pauli_z()) == 0.0);
}

TEST_CASE("effective hamiltonian is the commutant projection") {
    std::mt19937_64 rng(123);

    SECTION("one qubit: {I, sz} strips the transverse part") {
        const Matrix<2> h = cplx(0.8) * pauli_z() + cplx(0.6) * pauli_x() +
                            cplx(-0.3) * pauli_y() + cplx(0.1) * Matrix<2>::identity();
        const auto eff = effective_hamiltonian(h, pauli_z_group_1q());
        const Matrix<2> want = cplx(0.8) * pauli_z() + cplx(0.1) * Matrix<2>::identity();
        CHECK(max_abs_diff(eff, want) < 1e-15);
    }

    SECTION("two qubits: commutes with every element, idempotent") {
        const auto g = pauli_z_group_2q();
        for (int trial = 0; trial < 100; ++trial) {
            const auto h = random_hermitian<4>(rng, 2.0);
            const auto eff = effective_hamiltonian(h, g);
            for (const auto& rho : g.elements)
                CHECK(commutator_norm(eff, rho) <= 1e-12);
            CHECK(max_abs_diff(effective_hamiltonian(eff, g), eff) <= 1e-12);
            // Averaging preserves hermiticity and the trace.
            CHECK(max_abs_diff(eff, eff.adjoint()) < 1e-14);
            CHECK_THAT((eff.trace() - h.trace()).real(), WithinAbs(0.0, 1e-13));
        }
    }
}

TEST_CASE("subinterval resolution bound") {
    SECTION("shipped working point") {
        const SweepParameters p{5.04, 3.0e-4, 120.0};
        const auto e = min_subintervals(p, 0.005);
        CHECK(e.n_min == 1601);
        CHECK_THAT(e.dt_bound, WithinAbs(7.5e-2, 1e-15));
        // n_min is the smallest count satisfying the strict bound.
        CHECK(p.tau0 / static_cast<double>(e.n_min) < e.dt_bound);
        CHECK_FALSE(p.tau0 / static_cast<double>(e.n_min - 1) < e.dt_bound);
    }

    SECTION("count depends on the ratio only; the length bound scales with tau0") {
        const SweepParameters a{1.0, 1.0, 77.0};
        const SweepParameters b{9.0, 2.0e-3, 360.0};
        CHECK(min_subintervals(a, 0.005).n_min == 1601);
        CHECK(min_subintervals(b, 0.005).n_min == 1601);
        CHECK_THAT(min_subintervals(b, 0.005).dt_bound, WithinAbs(0.005 * 360.0 / 8.0, 1e-15));
        CHECK(min_subintervals(a, 0.01).n_min == 801);
    }

    CHECK_THROWS_AS(min_subintervals(SweepParameters{1, 1, 1}, 0.0), usage_error);
}

TEST_CASE("schedule bookkeeping") {
    SymmetrizationSchedule<4> s;
    s.group = pauli_z_group_2q();
    s.n_subintervals = 2500;
    s.slices_per_subsub = 4;
    CHECK(s.total_slices() == 40000);
    CHECK_NOTHROW(s.validate());
    s.n_subintervals = 0;
    CHECK_THROWS_AS(s.validate(), usage_error);
}

TEST_CASE("trivial group reduces to plain propagation bit for bit") {
    const SweepParameters p{5.0, 3.0e-4, 40.0};
    const HamiltonianFn<2> h = [&p](double tau) { return h1_frame(tau, p); };

    SymmetrizationSchedule<2> sched;
    sched.group = SymmetryGroup<2>{{Matrix<2>::identity()}};
    sched.n_subintervals = 5;
    sched.slices_per_subsub = 3;

    const auto sym = symmetrized_propagate<2>(h, p, sched);
    const auto plain = propagate<2>(h, p, {15, SliceRule::midpoint_exponential});
    CHECK(max_abs_diff(sym, plain) == 0.0);
}

TEST_CASE("symmetrized propagator converges to the effective flow as 1/N") {
    // Constant H = sx + 0.7 sz under {I, sz}: the group average is 0.7 sz, and the
    // bang-bang error vanishes linearly in the subinterval count.
    const Matrix<2> h = pauli_x() + cplx(0.7) * pauli_z();
    const HamiltonianFn<2> hf = [&h](double) { return h; };
    const SweepParameters p{1.0, 1.0, 2.0};  // window [-1, 1]
    const Matrix<2> exact = expm_skew<2>(cplx(0.7) * pauli_z(), 2.0);

    std::vector<double> logn, logerr;
    for (long n : {10L, 100L, 1000L, 10000L}) {
        SymmetrizationSchedule<2> sched;
        sched.group = pauli_z_group_1q();
        sched.n_subintervals = n;
        sched.slices_per_subsub = 1;
        const auto u = symmetrized_propagate<2>(hf, p, sched);
        CHECK(max_abs_diff(u.adjoint() * u, Matrix<2>::identity()) < 1e-10);
        const double err = max_abs_diff(u, exact);
        REQUIRE(err > 0.0);
        logn.push_back(std::log(static_cast<double>(n)));
        logerr.push_back(std::log(err));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(logn.size());
    for (std::size_t i = 0; i < logn.size(); ++i) {
        sx += logn[i];
        sy += logerr[i];
        sxx += logn[i] * logn[i];
        sxy += logn[i] * logerr[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope > -1.2);
    CHECK(slope < -0.8);
}

TEST_CASE("plan overload must tile the schedule") {
    const SweepParameters p{5.0, 3.0e-4, 40.0};
    const HamiltonianFn<2> h = [&p](double tau) { return h1_frame(tau, p); };
    SymmetrizationSchedule<2> sched;
    sched.group = pauli_z_group_1q();
    sched.n_subintervals = 10;
    sched.slices_per_subsub = 2;  // 40 total slices

    CHECK_NOTHROW(symmetrized_propagate<2>(h, p, sched,
                                           PropagationPlan{40, SliceRule::midpoint_exponential}));
    CHECK_THROWS_AS(symmetrized_propagate<2>(h, p, sched,
                                             PropagationPlan{41, SliceRule::midpoint_exponential}),
                    usage_error);
}

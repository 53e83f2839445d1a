#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "trp/optimize.hpp"

using namespace trp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ParameterSpace box2d(double lo, double hi) {
    ParameterSpace s;
    s.names = {"lambda", "eta4"};  // any two known names serve as x, y
    s.lower = {lo, lo};
    s.upper = {hi, hi};
    return s;
}

}  // namespace

TEST_CASE("parameter space validation and assembly") {
    auto s = box2d(-5.0, 5.0);
    CHECK_NOTHROW(s.validate());
    CHECK(s.dim() == 2);

    s.fixed = {{"tau0", 80.0}};
    const auto point = s.assemble({1.5, -2.5});
    CHECK(point.at("lambda") == 1.5);
    CHECK(point.at("eta4") == -2.5);
    CHECK(point.at("tau0") == 80.0);
    CHECK_THROWS_AS(s.assemble({1.0}), usage_error);

    SECTION("unknown names are rejected") {
        auto bad = s;
        bad.names[0] = "alpha";
        CHECK_THROWS_AS(bad.validate(), usage_error);
    }
    SECTION("free/fixed overlap is rejected") {
        auto bad = s;
        bad.fixed["lambda"] = 1.0;
        CHECK_THROWS_AS(bad.validate(), usage_error);
    }
    SECTION("inverted bounds are rejected") {
        auto bad = s;
        bad.lower[1] = bad.upper[1] + 1.0;
        CHECK_THROWS_AS(bad.validate(), usage_error);
    }
    SECTION("empty space is rejected") {
        ParameterSpace empty;
        CHECK_THROWS_AS(empty.validate(), usage_error);
    }
}

TEST_CASE("nelder-mead on a convex quadratic") {
    const ObjectiveFn f = [](const std::vector<double>& x) {
        return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0);
    };
    OptimizerConfig cfg;
    cfg.max_evals = 2000;
    cfg.start = std::vector<double>{0.0, 0.0};
    const auto res = nelder_mead(f, box2d(-5.0, 5.0), cfg);

    CHECK_THAT(res.best_params.at("lambda"), WithinAbs(1.0, 1e-6));
    CHECK_THAT(res.best_params.at("eta4"), WithinAbs(-2.0, 1e-6));
    CHECK(res.best_trace_p < 1e-12);
    CHECK(res.eval_count <= cfg.max_evals);

    // Improvement trace is strictly decreasing in f and increasing in eval index.
    REQUIRE(!res.trace.empty());
    for (std::size_t i = 0; i + 1 < res.trace.size(); ++i) {
        CHECK(res.trace[i + 1].first > res.trace[i].first);
        CHECK(res.trace[i + 1].second < res.trace[i].second);
    }
    CHECK(res.trace.back().second == res.best_trace_p);
}

TEST_CASE("nelder-mead on the rosenbrock valley") {
    const ObjectiveFn f = [](const std::vector<double>& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    OptimizerConfig cfg;
    cfg.max_evals = 5000;
    cfg.start = std::vector<double>{-1.2, 1.0};
    const auto res = nelder_mead(f, box2d(-5.0, 5.0), cfg);

    CHECK(res.eval_count <= 5000);
    CHECK_THAT(res.best_params.at("lambda"), WithinAbs(1.0, 1e-3));
    CHECK_THAT(res.best_params.at("eta4"), WithinAbs(1.0, 1e-3));
}

TEST_CASE("optimizers respect the box") {
    // Minimum of (x+10)^2 lies outside [ -5, 5 ]: every proposal must stay inside.
    std::vector<double> visited_max;
    const ObjectiveFn f = [&](const std::vector<double>& x) {
        for (double c : x) {
            CHECK(c >= -5.0);
            CHECK(c <= 5.0);
        }
        return (x[0] + 10.0) * (x[0] + 10.0) + x[1] * x[1];
    };
    OptimizerConfig cfg;
    cfg.max_evals = 600;
    const auto nm = nelder_mead(f, box2d(-5.0, 5.0), cfg);
    CHECK_THAT(nm.best_params.at("lambda"), WithinAbs(-5.0, 1e-5));

    cfg.algorithm = Algorithm::simulated_annealing;
    cfg.seed = 3;
    const auto sa = simulated_annealing(f, box2d(-5.0, 5.0), cfg);
    CHECK(sa.best_params.at("lambda") >= -5.0);
    CHECK(sa.best_params.at("lambda") < -3.0);
}

TEST_CASE("budget controls") {
    int calls = 0;
    const ObjectiveFn f = [&](const std::vector<double>& x) {
        ++calls;
        return x[0] * x[0] + x[1] * x[1];
    };

    SECTION("max_evals=1 returns the start point evaluation") {
        OptimizerConfig cfg;
        cfg.max_evals = 1;
        cfg.start = std::vector<double>{2.0, 3.0};
        const auto res = nelder_mead(f, box2d(-5.0, 5.0), cfg);
        CHECK(calls == 1);
        CHECK(res.eval_count == 1);
        CHECK(res.best_params.at("lambda") == 2.0);
        CHECK(res.best_params.at("eta4") == 3.0);
        CHECK(res.best_trace_p == 13.0);
    }

    SECTION("annealing consumes its whole budget") {
        OptimizerConfig cfg;
        cfg.algorithm = Algorithm::simulated_annealing;
        cfg.max_evals = 500;
        cfg.sa.restarts = 5;
        const auto res = simulated_annealing(f, box2d(-5.0, 5.0), cfg);
        CHECK(res.eval_count == 500);  // 5 restarts x 100
        CHECK(calls == 500);
    }

    CHECK_THROWS_AS(
        [&] {
            OptimizerConfig bad;
            bad.max_evals = 0;
            return nelder_mead(f, box2d(-1.0, 1.0), bad);
        }(),
        usage_error);
}

TEST_CASE("annealing escapes a false minimum") {
    // Double well (x^2-1)^2 + 0.2 x: local minimum near +1, global near -1.
    // Started in the false well at temperature 1, at least 95 of 100 seeds cross.
    ParameterSpace space;
    space.names = {"lambda"};
    space.lower = {-2.0};
    space.upper = {2.0};
    const ObjectiveFn f = [](const std::vector<double>& x) {
        const double w = x[0] * x[0] - 1.0;
        return w * w + 0.2 * x[0];
    };

    int escaped = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        OptimizerConfig cfg;
        cfg.algorithm = Algorithm::simulated_annealing;
        cfg.seed = seed;
        cfg.max_evals = 4000;
        cfg.sa.restarts = 1;  // no restart luck: the single chain must tunnel
        cfg.start = std::vector<double>{1.0};
        const auto res = simulated_annealing(f, space, cfg);
        if (res.best_params.at("lambda") < -0.5) ++escaped;
    }
    CHECK(escaped >= 95);

    SECTION("zero-temperature limit degenerates to greedy descent") {
        OptimizerConfig cfg;
        cfg.algorithm = Algorithm::simulated_annealing;
        cfg.seed = 11;
        cfg.max_evals = 4000;
        cfg.sa.restarts = 1;
        cfg.sa.initial_temperature = 1e-12;
        cfg.sa.proposal_scale = 0.04;  // raw sigma 0.16, far below the barrier width
        cfg.start = std::vector<double>{1.0};
        const auto res = simulated_annealing(f, space, cfg);
        CHECK(res.best_params.at("lambda") > 0.5);  // stuck in the false well
    }
}

TEST_CASE("seeded runs are bitwise reproducible") {
    const ObjectiveFn f = [](const std::vector<double>& x) {
        return std::sin(3.0 * x[0]) + x[1] * x[1];
    };
    OptimizerConfig cfg;
    cfg.algorithm = Algorithm::simulated_annealing;
    cfg.seed = 42;
    cfg.max_evals = 1000;

    const auto a = simulated_annealing(f, box2d(-3.0, 3.0), cfg);
    const auto b = simulated_annealing(f, box2d(-3.0, 3.0), cfg);
    CHECK(a.best_trace_p == b.best_trace_p);
    CHECK(a.best_params == b.best_params);
    CHECK(a.eval_count == b.eval_count);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].first == b.trace[i].first);
        CHECK(a.trace[i].second == b.trace[i].second);
    }

    // Parallel restarts merge to the same result as serial execution.
    OptimizerConfig par = cfg;
    par.workers = 4;
    const auto c = simulated_annealing(f, box2d(-3.0, 3.0), par);
    CHECK(c.best_trace_p == a.best_trace_p);
    CHECK(c.best_params == a.best_params);

    // A different seed explores differently.
    OptimizerConfig other = cfg;
    other.seed = 43;
    const auto d = simulated_annealing(f, box2d(-3.0, 3.0), other);
    CHECK(d.best_params != a.best_params);
}

TEST_CASE("gate objective") {
    ParameterSpace space;
    space.names = {"lambda", "eta4"};
    space.lower = {5.792589, 2.89872e-4};
    space.upper = {5.909611, 2.95728e-4};
    space.fixed = {{"tau0", 80.0}};

    GateObjective obj;
    obj.target = Gate::hadamard;
    obj.plan.steps = 64000;

    SECTION("named evaluation matches direct synthesis") {
        const double tp = obj.evaluate_named(
            {{"lambda", 5.8511}, {"eta4", 2.9280e-4}, {"tau0", 80.0}});
        CHECK_THAT(tp, WithinRel(1.614870e-07, 1e-5));
        CHECK_THAT(objective(obj, space, {5.8511, 2.9280e-4}), WithinRel(tp, 1e-15));
    }

    SECTION("missing parameters are a usage error") {
        CHECK_THROWS_AS(obj.evaluate_named({{"lambda", 5.8511}}), usage_error);
    }

    SECTION("numerical failures become a finite penalty") {
        GateObjective vobj;
        vobj.target = Gate::modified_controlled_phase;
        vobj.schedule = default_schedule_2q(4, 1);
        // Degenerate backbone with c4 != 0: synthesis throws, objective absorbs.
        const double v = vobj.evaluate_named({{"lambda", 5.0},
                                              {"eta4", 3.0e-4},
                                              {"tau0", 120.0},
                                              {"c4", 1.0},
                                              {"d1", 0.0},
                                              {"d2", 0.0},
                                              {"d3", 1.0},
                                              {"d4", 0.0}});
        CHECK(v == 1e6);
    }

    SECTION("a short refinement run stays at or below the start value") {
        OptimizerConfig cfg;
        cfg.max_evals = 60;
        cfg.start = std::vector<double>{5.8511, 2.9280e-4};
        const auto res = nelder_mead(obj.bind(space), space, cfg);
        CHECK(res.best_trace_p <= 1.62e-7);
        CHECK(res.best_trace_p < 2e-5);
        CHECK(res.best_params.at("tau0") == 80.0);
    }
}

TEST_CASE("sensitivity scan") {
    GateObjective obj;
    obj.target = Gate::modified_controlled_phase;
    obj.schedule = default_schedule_2q(625, 4);
    const std::map<std::string, double> base{{"lambda", 5.04}, {"eta4", 3.0e-4},
                                             {"tau0", 120.0},  {"c4", 2.173},
                                             {"d1", 99.3},     {"d2", 0.0},
                                             {"d3", -0.41},    {"d4", 0.8347}};

    const auto rows = sensitivity_scan(obj, base, "c4", {-0.001, 0.0, 0.001});
    REQUIRE(rows.size() == 3);
    CHECK_THAT(rows[0].value, WithinRel(2.172, 1e-12));
    CHECK_THAT(rows[1].value, WithinRel(2.173, 1e-12));
    CHECK_THAT(rows[2].value, WithinRel(2.174, 1e-12));

    // The zero-offset row reproduces the pinned-frame objective bitwise.
    GateObjective pinned = obj;
    pinned.frame = TwoQubitSystemParameters{2.173, 99.3, 0.0, -0.41, 0.8347};
    CHECK(rows[1].trace_p == pinned.evaluate_named(base));

    CHECK_THROWS_AS(sensitivity_scan(obj, base, "zeta", {0.0}), usage_error);
}

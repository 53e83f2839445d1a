#pragma once

// Derivative-free minimization over sweep/system parameters: Nelder-Mead simplex
// and restarted simulated annealing. Free parameters are normalized to [0,1]
// over their bounds internally so eta4 ~ 1e-4 and d1 ~ 1e2 coexist.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "trp/gates.hpp"
#include "trp/metrics.hpp"
#include "trp/model.hpp"

namespace trp {

inline const std::vector<std::string>& known_parameter_names() {
    static const std::vector<std::string> names = {"lambda", "eta4", "tau0", "c4",
                                                   "d1",     "d2",   "d3",  "d4"};
    return names;
}

struct ParameterSpace {
    std::vector<std::string> names;  // free parameters, ordered
    std::vector<double> lower, upper;
    std::map<std::string, double> fixed;

    void validate() const {
        if (names.size() != lower.size() || names.size() != upper.size())
            throw usage_error("parameter space: names/bounds size mismatch");
        if (names.empty()) throw usage_error("parameter space: no free parameters");
        const auto& known = known_parameter_names();
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (std::find(known.begin(), known.end(), names[i]) == known.end())
                throw usage_error("parameter space: unknown parameter '" + names[i] + "'");
            if (fixed.count(names[i]))
                throw usage_error("parameter space: '" + names[i] + "' both free and fixed");
            if (!(lower[i] < upper[i]))
                throw usage_error("parameter space: lower must be < upper for '" + names[i] + "'");
        }
    }
    std::size_t dim() const { return names.size(); }

    std::map<std::string, double> assemble(const std::vector<double>& point) const {
        if (point.size() != names.size())
            throw usage_error("parameter space: point dimension mismatch");
        std::map<std::string, double> out = fixed;
        for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = point[i];
        return out;
    }
};

enum class Algorithm { nelder_mead, simulated_annealing };

inline Algorithm algorithm_from_name(const std::string& s) {
    if (s == "nelder_mead") return Algorithm::nelder_mead;
    if (s == "simulated_annealing") return Algorithm::simulated_annealing;
    throw usage_error("unknown algorithm: " + s);
}
inline std::string algorithm_name(Algorithm a) {
    return a == Algorithm::nelder_mead ? "nelder_mead" : "simulated_annealing";
}

struct NelderMeadConfig {
    double initial_scale = 0.25;  // simplex edge, in normalized units
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double tol_f = 1e-12;
    double tol_x = 1e-10;  // normalized simplex diameter
};

struct AnnealConfig {
    double initial_temperature = 1.0;
    double cooling_factor = 0.95;  // per epoch
    int steps_per_epoch = 200;
    double proposal_scale = 0.1;  // Gaussian step, normalized units
    int restarts = 5;

    void validate() const {
        if (!(cooling_factor > 0.0 && cooling_factor < 1.0))
            throw usage_error("annealing: cooling_factor must lie in (0,1)");
        if (!(initial_temperature > 0.0))
            throw usage_error("annealing: initial_temperature must be positive");
        if (steps_per_epoch < 1 || restarts < 1)
            throw usage_error("annealing: steps_per_epoch and restarts must be >= 1");
    }
};

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::nelder_mead;
    std::uint64_t seed = 0;
    long max_evals = 20000;
    int workers = 1;  // annealing restarts fan out across this many threads
    std::optional<std::vector<double>> start;  // raw units; default: box center
    NelderMeadConfig nm;
    AnnealConfig sa;

    void validate() const {
        if (max_evals < 1) throw usage_error("optimizer: max_evals must be >= 1");
        if (workers < 1) throw usage_error("optimizer: workers must be >= 1");
        sa.validate();
    }
};

struct OptimizationResult {
    std::map<std::string, double> best_params;
    double best_trace_p = 0.0;
    long eval_count = 0;
    std::vector<std::pair<long, double>> trace;  // (eval index, objective) at improvements
    std::uint64_t seed = 0;
};

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

namespace detail {

// Reflect a normalized coordinate back into [0,1] (triangle-wave fold).
inline double fold01(double u) {
    u = std::fmod(u, 2.0);
    if (u < 0.0) u += 2.0;
    return (u <= 1.0) ? u : 2.0 - u;
}

inline double clip01(double u) { return std::min(1.0, std::max(0.0, u)); }

struct Normalizer {
    const ParameterSpace& space;
    std::vector<double> to_raw(const std::vector<double>& u) const {
        std::vector<double> x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            x[i] = space.lower[i] + u[i] * (space.upper[i] - space.lower[i]);
        return x;
    }
    std::vector<double> to_unit(const std::vector<double>& x) const {
        std::vector<double> u(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            u[i] = (x[i] - space.lower[i]) / (space.upper[i] - space.lower[i]);
        return u;
    }
};

inline std::vector<double> start_or_center(const ParameterSpace& space,
                                           const OptimizerConfig& cfg) {
    if (cfg.start) {
        if (cfg.start->size() != space.dim())
            throw usage_error("optimizer: start point dimension mismatch");
        return *cfg.start;
    }
    std::vector<double> c(space.dim());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (space.lower[i] + space.upper[i]);
    return c;
}

}  // namespace detail

inline OptimizationResult nelder_mead(const ObjectiveFn& f, const ParameterSpace& space,
                                      const OptimizerConfig& cfg) {
    space.validate();
    cfg.validate();
    const std::size_t d = space.dim();
    const detail::Normalizer norm{space};

    OptimizationResult res;
    res.seed = cfg.seed;
    long evals = 0;
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<double> best_u;
    const auto eval = [&](std::vector<double> u) {
        for (auto& c : u) c = detail::fold01(c);
        const double v = f(norm.to_raw(u));
        ++evals;
        if (v < best_f) {
            best_f = v;
            best_u = u;
            res.trace.emplace_back(evals, v);
        }
        return v;
    };

    // Initial simplex: start point plus one offset vertex per coordinate. The
    // start vertex is always evaluated; the rest only while budget remains, so
    // max_evals=1 degenerates to scoring the start point.
    std::vector<std::vector<double>> x(d + 1, norm.to_unit(detail::start_or_center(space, cfg)));
    std::vector<double> fx(d + 1, std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i <= d; ++i) x[i][i - 1] += cfg.nm.initial_scale;
    for (std::size_t i = 0; i <= d; ++i) {
        for (auto& c : x[i]) c = detail::fold01(c);
        if (i == 0 || evals < cfg.max_evals) fx[i] = eval(x[i]);
    }

    std::vector<std::size_t> order(d + 1);
    while (evals < cfg.max_evals) {
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t lo = order[0], hi = order[d], second_hi = order[d - 1];

        double diam = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double mn = x[0][k], mx = x[0][k];
            for (std::size_t i = 1; i <= d; ++i) {
                mn = std::min(mn, x[i][k]);
                mx = std::max(mx, x[i][k]);
            }
            diam = std::max(diam, mx - mn);
        }
        if (fx[hi] - fx[lo] < cfg.nm.tol_f || diam < cfg.nm.tol_x) break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == hi) continue;
            for (std::size_t k = 0; k < d; ++k) centroid[k] += x[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(d);

        const auto blend = [&](double w) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + w * (centroid[k] - x[hi][k]);
            for (auto& c : p) c = detail::fold01(c);
            return p;
        };

        const auto xr = blend(cfg.nm.reflection);
        const double fr = eval(xr);
        if (fr < fx[lo]) {
            const auto xe = blend(cfg.nm.reflection * cfg.nm.expansion);
            const double fe = eval(xe);
            if (fe < fr) {
                x[hi] = xe;
                fx[hi] = fe;
            } else {
                x[hi] = xr;
                fx[hi] = fr;
            }
        } else if (fr < fx[second_hi]) {
            x[hi] = xr;
            fx[hi] = fr;
        } else {
            const bool outside = fr < fx[hi];
            const auto xc = blend(outside ? cfg.nm.reflection * cfg.nm.contraction
                                          : -cfg.nm.contraction);
            const double fc = eval(xc);
            if (fc < std::min(fr, fx[hi])) {
                x[hi] = xc;
                fx[hi] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == lo) continue;
                    for (std::size_t k = 0; k < d; ++k)
                        x[i][k] = x[lo][k] + cfg.nm.shrink * (x[i][k] - x[lo][k]);
                    fx[i] = eval(x[i]);
                }
            }
        }
    }

    res.eval_count = evals;
    res.best_trace_p = best_f;
    res.best_params = space.assemble(norm.to_raw(best_u));
    return res;
}

namespace detail {

struct RestartOutcome {
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<double> best_u;
    long evals = 0;
    std::vector<std::pair<long, double>> trace;
};

inline RestartOutcome anneal_restart(const ObjectiveFn& f, const ParameterSpace& space,
                                     const OptimizerConfig& cfg, int restart, long budget) {
    const Normalizer norm{space};
    // seed_seq holds 32-bit words; split the seed so no entropy is dropped.
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    RestartOutcome out;
    const std::size_t d = space.dim();
    // First restart begins at the configured start; later ones sample the box.
    std::vector<double> u;
    if (restart == 0) {
        u = norm.to_unit(start_or_center(space, cfg));
        for (auto& c : u) c = clip01(c);
    } else {
        u.resize(d);
        for (auto& c : u) c = unif(rng);
    }

    const auto eval = [&](const std::vector<double>& v) {
        const double val = f(norm.to_raw(v));
        ++out.evals;
        if (val < out.best_f) {
            out.best_f = val;
            out.best_u = v;
            out.trace.emplace_back(out.evals, val);
        }
        return val;
    };

    double fu = eval(u);
    double temp = cfg.sa.initial_temperature;
    while (out.evals < budget) {
        for (int s = 0; s < cfg.sa.steps_per_epoch && out.evals < budget; ++s) {
            std::vector<double> v(d);
            for (std::size_t k = 0; k < d; ++k)
                v[k] = clip01(u[k] + cfg.sa.proposal_scale * gauss(rng));
            const double fv = eval(v);
            const double delta = fv - fu;
            if (delta <= 0.0 || unif(rng) < std::exp(-delta / temp)) {
                u = std::move(v);
                fu = fv;
            }
        }
        temp *= cfg.sa.cooling_factor;
    }
    return out;
}

}  // namespace detail

inline OptimizationResult simulated_annealing(const ObjectiveFn& f, const ParameterSpace& space,
                                              const OptimizerConfig& cfg) {
    space.validate();
    cfg.validate();
    const int restarts = cfg.sa.restarts;
    const long budget = std::max(1L, cfg.max_evals / restarts);

    // Each restart owns an independent stream keyed by (seed, restart index), so
    // the merged result is identical whether restarts run serially or in parallel.
    std::vector<detail::RestartOutcome> outcomes(restarts);
    if (cfg.workers > 1 && restarts > 1) {
        std::vector<std::future<detail::RestartOutcome>> futs;
        futs.reserve(restarts);
        for (int r = 0; r < restarts; ++r)
            futs.push_back(std::async(std::launch::async, [&, r] {
                return detail::anneal_restart(f, space, cfg, r, budget);
            }));
        for (int r = 0; r < restarts; ++r) outcomes[r] = futs[r].get();
    } else {
        for (int r = 0; r < restarts; ++r)
            outcomes[r] = detail::anneal_restart(f, space, cfg, r, budget);
    }

    int winner = 0;
    for (int r = 1; r < restarts; ++r)
        if (outcomes[r].best_f < outcomes[winner].best_f) winner = r;

    OptimizationResult res;
    res.seed = cfg.seed;
    for (const auto& o : outcomes) res.eval_count += o.evals;
    res.best_trace_p = outcomes[winner].best_f;
    res.trace = outcomes[winner].trace;
    const detail::Normalizer norm{space};
    res.best_params = space.assemble(norm.to_raw(outcomes[winner].best_u));
    return res;
}

// Gate-error objective: assembles named parameters into the model, synthesizes
// the gate, and returns Tr P against the target. Propagation failures become a
// large penalty so simplex/annealing keep moving.
struct GateObjective {
    Gate target = Gate::hadamard;
    PropagationPlan plan{};                                      // one-qubit path
    SymmetrizationSchedule<4> schedule = default_schedule_2q();  // two-qubit path
    std::optional<TwoQubitSystemParameters> frame;  // pinned frame; defaults to the point itself
    double penalty = 1e6;

    double evaluate_named(const std::map<std::string, double>& params) const {
        const auto need = [&](const char* k) {
            const auto it = params.find(k);
            if (it == params.end())
                throw usage_error(std::string("objective: missing parameter '") + k + "'");
            return it->second;
        };
        try {
            SweepParameters p{need("lambda"), need("eta4"), need("tau0")};
            if (gate_qubits(target) == 1) {
                const auto g = one_qubit_gate(p, plan);
                return trace_p<2>(g.applied, target_gate_1q(target));
            }
            TwoQubitSystemParameters s{need("c4"), need("d1"), need("d2"), need("d3"),
                                       need("d4")};
            const auto g = two_qubit_gate(p, s, frame.value_or(s), schedule);
            return trace_p<4>(g.applied, target_gate_2q(target));
        } catch (const numeric_error&) {
            return penalty;
        }
    }

    ObjectiveFn bind(const ParameterSpace& space) const {
        space.validate();
        return [*this, space](const std::vector<double>& point) {
            return evaluate_named(space.assemble(point));
        };
    }
};

inline double objective(const GateObjective& obj, const ParameterSpace& space,
                        const std::vector<double>& point) {
    return obj.evaluate_named(space.assemble(point));
}

struct ScanRow {
    double value;
    double trace_p;
};

// Evaluates the objective at base + each offset of one named parameter, all
// others held fixed. The two-qubit frame stays pinned at the base system values
// so the scan perturbs the dynamics only.
inline std::vector<ScanRow> sensitivity_scan(const GateObjective& obj,
                                             const std::map<std::string, double>& base,
                                             const std::string& param_name,
                                             const std::vector<double>& offsets) {
    if (!base.count(param_name))
        throw usage_error("sensitivity_scan: unknown parameter '" + param_name + "'");
    GateObjective pinned = obj;
    if (gate_qubits(obj.target) == 2 && !pinned.frame) {
        const auto need = [&](const char* k) { return base.at(k); };
        pinned.frame = TwoQubitSystemParameters{need("c4"), need("d1"), need("d2"), need("d3"),
                                                need("d4")};
    }
    std::vector<ScanRow> rows;
    rows.reserve(offsets.size());
    for (const double off : offsets) {
        auto params = base;
        params[param_name] += off;
        rows.push_back({params[param_name], pinned.evaluate_named(params)});
    }
    return rows;
}

}  // namespace trp

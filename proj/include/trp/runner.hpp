#pragma once

// Config-driven command layer shared by the CLI and the tests: config (de)serialization,
// the simulate/optimize/scan/converge/report workflows, record assembly, and replay.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "trp/gates.hpp"
#include "trp/matrix.hpp"
#include "trp/metrics.hpp"
#include "trp/model.hpp"
#include "trp/optimize.hpp"
#include "trp/propagate.hpp"
#include "trp/record.hpp"
#include "trp/symmetrize.hpp"

namespace trp {

constexpr const char* output_dir_env = "TRP_OUTPUT_DIR";

struct ScheduleSpec {
    long n_subintervals = 2500;
    long slices_per_subsub = 4;
};

struct ScanSpec {
    std::string parameter;
    std::vector<double> offsets;
};

struct ConvergeSpec {
    long base_steps = 2500;
    int doublings = 4;
    std::vector<long> subinterval_grid;  // optional subinterval-doubling study
};

struct RunConfig {
    std::string command = "simulate";
    Gate target = Gate::hadamard;
    SweepParameters sweep{};
    std::optional<TwoQubitSystemParameters> system;
    std::optional<TwoQubitSystemParameters> frame_system;  // pinned readout frame
    PropagationPlan plan{};
    std::optional<ScheduleSpec> schedule;
    bool allow_schedule_1q = false;
    std::uint64_t seed = 0;
    std::optional<ParameterSpace> space;
    std::optional<OptimizerConfig> optimizer;
    std::optional<ScanSpec> scan;
    std::optional<ConvergeSpec> converge;
    json stub_applied_gate;  // test hook: {"re":[..],"im":[..]} bypasses synthesis
    std::string output_path = "runs.jsonl";

    void validate() const {
        static const char* commands[] = {"simulate", "optimize", "scan", "converge", "report"};
        if (std::find_if(std::begin(commands), std::end(commands),
                         [&](const char* c) { return command == c; }) == std::end(commands))
            throw usage_error("config: unknown command '" + command + "'");
        sweep.validate();
        plan.validate();
        if (gate_qubits(target) == 2) {
            if (!system)
                throw usage_error("config: two-qubit target requires a system section");
        } else {
            if (system)
                throw usage_error("config: one-qubit target rejects a system section");
            if (schedule && !allow_schedule_1q)
                throw usage_error("config: schedule on a one-qubit target needs "
                                  "allow_schedule_1q");
        }
        if (schedule && (schedule->n_subintervals < 1 || schedule->slices_per_subsub < 1))
            throw usage_error("config: schedule counts must be >= 1");
        if (command == "optimize" && (!optimizer || !space))
            throw usage_error("config: optimize requires optimizer and space sections");
        if (command == "scan" && !scan)
            throw usage_error("config: scan requires a scan section");
    }
};

// ---- JSON (de)serialization -------------------------------------------------

inline json sweep_to_json(const SweepParameters& p) {
    return json{{"lambda", p.lambda}, {"eta4", p.eta4}, {"tau0", p.tau0}};
}
inline SweepParameters sweep_from_json(const json& j) {
    SweepParameters p;
    p.lambda = j.at("lambda").get<double>();
    p.eta4 = j.at("eta4").get<double>();
    p.tau0 = j.at("tau0").get<double>();
    return p;
}

inline json system_to_json(const TwoQubitSystemParameters& s) {
    return json{{"c4", s.c4}, {"d1", s.d1}, {"d2", s.d2}, {"d3", s.d3}, {"d4", s.d4}};
}
inline TwoQubitSystemParameters system_from_json(const json& j) {
    TwoQubitSystemParameters s;
    s.c4 = j.at("c4").get<double>();
    s.d1 = j.at("d1").get<double>();
    s.d2 = j.at("d2").get<double>();
    s.d3 = j.at("d3").get<double>();
    s.d4 = j.at("d4").get<double>();
    return s;
}

inline json plan_to_json(const PropagationPlan& p) {
    return json{{"steps", p.steps}, {"rule", slice_rule_name(p.rule)}};
}
inline PropagationPlan plan_from_json(const json& j) {
    PropagationPlan p;
    if (j.contains("steps")) p.steps = j.at("steps").get<long>();
    if (j.contains("rule")) p.rule = slice_rule_from_name(j.at("rule").get<std::string>());
    return p;
}

inline json space_to_json(const ParameterSpace& s) {
    return json{{"names", s.names}, {"lower", s.lower}, {"upper", s.upper}, {"fixed", s.fixed}};
}
inline ParameterSpace space_from_json(const json& j) {
    ParameterSpace s;
    s.names = j.at("names").get<std::vector<std::string>>();
    s.lower = j.at("lower").get<std::vector<double>>();
    s.upper = j.at("upper").get<std::vector<double>>();
    if (j.contains("fixed")) s.fixed = j.at("fixed").get<std::map<std::string, double>>();
    return s;
}

inline json optimizer_to_json(const OptimizerConfig& c) {
    json j{{"algorithm", algorithm_name(c.algorithm)},
           {"seed", c.seed},
           {"max_evals", c.max_evals},
           {"workers", c.workers},
           {"nm",
            {{"initial_scale", c.nm.initial_scale},
             {"reflection", c.nm.reflection},
             {"expansion", c.nm.expansion},
             {"contraction", c.nm.contraction},
             {"shrink", c.nm.shrink},
             {"tol_f", c.nm.tol_f},
             {"tol_x", c.nm.tol_x}}},
           {"sa",
            {{"initial_temperature", c.sa.initial_temperature},
             {"cooling_factor", c.sa.cooling_factor},
             {"steps_per_epoch", c.sa.steps_per_epoch},
             {"proposal_scale", c.sa.proposal_scale},
             {"restarts", c.sa.restarts}}}};
    if (c.start) j["start"] = *c.start;
    return j;
}
inline OptimizerConfig optimizer_from_json(const json& j) {
    OptimizerConfig c;
    c.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("max_evals")) c.max_evals = j.at("max_evals").get<long>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("start")) c.start = j.at("start").get<std::vector<double>>();
    if (j.contains("nm")) {
        const auto& n = j.at("nm");
        if (n.contains("initial_scale")) c.nm.initial_scale = n.at("initial_scale").get<double>();
        if (n.contains("reflection")) c.nm.reflection = n.at("reflection").get<double>();
        if (n.contains("expansion")) c.nm.expansion = n.at("expansion").get<double>();
        if (n.contains("contraction")) c.nm.contraction = n.at("contraction").get<double>();
        if (n.contains("shrink")) c.nm.shrink = n.at("shrink").get<double>();
        if (n.contains("tol_f")) c.nm.tol_f = n.at("tol_f").get<double>();
        if (n.contains("tol_x")) c.nm.tol_x = n.at("tol_x").get<double>();
    }
    if (j.contains("sa")) {
        const auto& s = j.at("sa");
        if (s.contains("initial_temperature"))
            c.sa.initial_temperature = s.at("initial_temperature").get<double>();
        if (s.contains("cooling_factor"))
            c.sa.cooling_factor = s.at("cooling_factor").get<double>();
        if (s.contains("steps_per_epoch"))
            c.sa.steps_per_epoch = s.at("steps_per_epoch").get<int>();
        if (s.contains("proposal_scale"))
            c.sa.proposal_scale = s.at("proposal_scale").get<double>();
        if (s.contains("restarts")) c.sa.restarts = s.at("restarts").get<int>();
    }
    return c;
}

inline json run_config_to_json(const RunConfig& c) {
    json j{{"command", c.command},
           {"target", gate_name(c.target)},
           {"sweep", sweep_to_json(c.sweep)},
           {"plan", plan_to_json(c.plan)},
           {"seed", c.seed},
           {"output_path", c.output_path}};
    if (c.system) j["system"] = system_to_json(*c.system);
    if (c.frame_system) j["frame_system"] = system_to_json(*c.frame_system);
    if (c.schedule)
        j["schedule"] = json{{"n_subintervals", c.schedule->n_subintervals},
                             {"slices_per_subsub", c.schedule->slices_per_subsub}};
    if (c.allow_schedule_1q) j["allow_schedule_1q"] = true;
    if (c.space) j["space"] = space_to_json(*c.space);
    if (c.optimizer) j["optimizer"] = optimizer_to_json(*c.optimizer);
    if (c.scan) j["scan"] = json{{"parameter", c.scan->parameter}, {"offsets", c.scan->offsets}};
    if (c.converge) {
        json cv{{"base_steps", c.converge->base_steps}, {"doublings", c.converge->doublings}};
        if (!c.converge->subinterval_grid.empty())
            cv["subinterval_grid"] = c.converge->subinterval_grid;
        j["converge"] = cv;
    }
    if (!c.stub_applied_gate.is_null()) j["stub_applied_gate"] = c.stub_applied_gate;
    return j;
}

inline RunConfig run_config_from_json(const json& j) {
    try {
        RunConfig c;
        if (j.contains("command")) c.command = j.at("command").get<std::string>();
        c.target = gate_from_name(j.at("target").get<std::string>());
        c.sweep = sweep_from_json(j.at("sweep"));
        if (j.contains("plan")) c.plan = plan_from_json(j.at("plan"));
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
        if (j.contains("system")) c.system = system_from_json(j.at("system"));
        if (j.contains("frame_system"))
            c.frame_system = system_from_json(j.at("frame_system"));
        if (j.contains("schedule")) {
            ScheduleSpec s;
            const auto& js = j.at("schedule");
            if (js.contains("n_subintervals"))
                s.n_subintervals = js.at("n_subintervals").get<long>();
            if (js.contains("slices_per_subsub"))
                s.slices_per_subsub = js.at("slices_per_subsub").get<long>();
            c.schedule = s;
        }
        if (j.contains("allow_schedule_1q"))
            c.allow_schedule_1q = j.at("allow_schedule_1q").get<bool>();
        if (j.contains("space")) c.space = space_from_json(j.at("space"));
        if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j.at("optimizer"));
        if (j.contains("scan")) {
            ScanSpec s;
            s.parameter = j.at("scan").at("parameter").get<std::string>();
            s.offsets = j.at("scan").at("offsets").get<std::vector<double>>();
            c.scan = s;
        }
        if (j.contains("converge")) {
            ConvergeSpec cv;
            const auto& jc = j.at("converge");
            if (jc.contains("base_steps")) cv.base_steps = jc.at("base_steps").get<long>();
            if (jc.contains("doublings")) cv.doublings = jc.at("doublings").get<int>();
            if (jc.contains("subinterval_grid"))
                cv.subinterval_grid = jc.at("subinterval_grid").get<std::vector<long>>();
            c.converge = cv;
        }
        if (j.contains("stub_applied_gate")) c.stub_applied_gate = j.at("stub_applied_gate");
        return c;
    } catch (const json::exception& e) {
        throw usage_error(std::string("config: ") + e.what());
    }
}

// Dotted-path override, e.g. --set sweep.lambda=5.9 or --set plan.steps=80000.
// The value parses as JSON when possible (numbers, arrays, booleans), else string.
inline void apply_set_override(json& config, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw usage_error("--set expects key=value, got '" + key_value + "'");
    const std::string key = key_value.substr(0, eq);
    const std::string raw = key_value.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* cur = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) throw usage_error("--set: empty path segment in '" + key + "'");
        if (dot == std::string::npos) {
            (*cur)[part] = value;
            break;
        }
        cur = &((*cur)[part]);
        start = dot + 1;
    }
}

// ---- Execution helpers -------------------------------------------------------

inline int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned h = std::thread::hardware_concurrency();
    return h > 0 ? static_cast<int>(h) : 1;
}

template <typename F>
void parallel_for_index(std::size_t n, int workers, F&& f) {
    const int w = std::min<std::size_t>(effective_workers(workers), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

class WallTimer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

inline SymmetrizationSchedule<4> schedule_from_spec(const ScheduleSpec& s) {
    return default_schedule_2q(s.n_subintervals, s.slices_per_subsub);
}

struct Synthesis {
    GateMetrics metrics;
    json applied_gate;
};

inline Synthesis synthesize(const RunConfig& cfg) {
    Synthesis out;
    if (!cfg.stub_applied_gate.is_null()) {
        if (gate_qubits(cfg.target) == 1) {
            const auto ua = matrix_from_json<2>(cfg.stub_applied_gate);
            out.metrics = gate_metrics<2>(ua, target_gate_1q(cfg.target));
            out.applied_gate = matrix_to_json<2>(ua);
        } else {
            const auto ua = matrix_from_json<4>(cfg.stub_applied_gate);
            out.metrics = gate_metrics<4>(ua, target_gate_2q(cfg.target));
            out.applied_gate = matrix_to_json<4>(ua);
        }
        return out;
    }
    if (gate_qubits(cfg.target) == 1) {
        Matrix<2> ua;
        if (cfg.schedule) {
            // Expert override: symmetrized window propagator, same endpoint dressing.
            SymmetrizationSchedule<2> sched;
            sched.group = pauli_z_group_1q();
            sched.n_subintervals = cfg.schedule->n_subintervals;
            sched.slices_per_subsub = cfg.schedule->slices_per_subsub;
            const SweepParameters p = cfg.sweep;
            const HamiltonianFn<2> h = [&p](double tau) { return h1_frame(tau, p); };
            const Matrix<2> u =
                symmetrized_propagate_window<2>(h, -p.tau0, p.tau0, sched, cfg.plan.rule);
            const Matrix<2> wi = identity_adjacent_basis(h1_frame(-p.tau0, p));
            const Matrix<2> wf = identity_adjacent_basis(h1_frame(p.tau0, p));
            ua = pauli_z() * (wf * u * wi.adjoint()).conjugate();
        } else {
            ua = one_qubit_gate(cfg.sweep, cfg.plan).applied;
        }
        out.metrics = gate_metrics<2>(ua, target_gate_1q(cfg.target));
        out.applied_gate = matrix_to_json<2>(ua);
    } else {
        const TwoQubitSystemParameters& sys = *cfg.system;
        const TwoQubitSystemParameters frame = cfg.frame_system.value_or(sys);
        Matrix<4> ua;
        if (cfg.schedule) {
            ua = two_qubit_gate(cfg.sweep, sys, frame, schedule_from_spec(*cfg.schedule),
                                cfg.plan.rule)
                     .applied;
        } else {
            // Plain (unsymmetrized) propagation with the same frame readout.
            const Matrix<4> stat = h2_static_part(sys);
            const SweepParameters p = cfg.sweep;
            const HamiltonianFn<4> h = [&stat, &p, &sys](double tau) {
                return stat + h2_sweep_part(tau, p, sys);
            };
            const Matrix<4> u = propagate<4>(h, p, cfg.plan);
            ua = expm_skew<4>(static_backbone(frame), -p.tau0) * u;
        }
        out.metrics = gate_metrics<4>(ua, target_gate_2q(cfg.target));
        out.applied_gate = matrix_to_json<4>(ua);
    }
    return out;
}

inline RunRecord make_record(const RunConfig& cfg, const Synthesis& s, double wall_s) {
    RunRecord r;
    r.timestamp = utc_timestamp_now();
    r.config = run_config_to_json(cfg);
    r.metrics = s.metrics;
    r.applied_gate = s.applied_gate;
    r.seed = cfg.seed;
    r.wall_time_s = wall_s;
    return r;
}

// Named access into a config's parameters (for scans and best-point injection).
inline double& config_parameter(RunConfig& cfg, const std::string& name) {
    if (name == "lambda") return cfg.sweep.lambda;
    if (name == "eta4") return cfg.sweep.eta4;
    if (name == "tau0") return cfg.sweep.tau0;
    if (name == "c4" || name == "d1" || name == "d2" || name == "d3" || name == "d4") {
        if (!cfg.system)
            throw usage_error("config: parameter '" + name + "' needs a system section");
        if (name == "c4") return cfg.system->c4;
        if (name == "d1") return cfg.system->d1;
        if (name == "d2") return cfg.system->d2;
        if (name == "d3") return cfg.system->d3;
        return cfg.system->d4;
    }
    throw usage_error("config: unknown parameter '" + name + "'");
}

// ---- Commands ------------------------------------------------------------------

inline RunRecord cmd_simulate(const RunConfig& cfg) {
    cfg.validate();
    WallTimer t;
    const Synthesis s = synthesize(cfg);
    return make_record(cfg, s, t.seconds());
}

inline RunRecord cmd_optimize(const RunConfig& cfg, int workers = 1) {
    cfg.validate();
    WallTimer t;
    GateObjective obj;
    obj.target = cfg.target;
    obj.plan = cfg.plan;
    if (cfg.schedule) obj.schedule = schedule_from_spec(*cfg.schedule);
    OptimizerConfig oc = *cfg.optimizer;
    if (workers > 0) oc.workers = workers;

    const ObjectiveFn fn = obj.bind(*cfg.space);
    const OptimizationResult res = (oc.algorithm == Algorithm::nelder_mead)
                                       ? nelder_mead(fn, *cfg.space, oc)
                                       : simulated_annealing(fn, *cfg.space, oc);

    // Full synthesis at the best point for the persisted metrics and gate.
    RunConfig best = cfg;
    best.command = "simulate";
    for (const auto& [name, value] : res.best_params) config_parameter(best, name) = value;
    const Synthesis s = synthesize(best);

    RunRecord r = make_record(cfg, s, t.seconds());
    r.seed = oc.seed;
    json trace = json::array();
    for (const auto& [idx, val] : res.trace) trace.push_back(json::array({idx, val}));
    r.extra = json{{"optimization",
                    {{"algorithm", algorithm_name(oc.algorithm)},
                     {"best_params", res.best_params},
                     {"best_trace_p", res.best_trace_p},
                     {"eval_count", res.eval_count},
                     {"trace", trace}}}};
    return r;
}

inline std::vector<RunRecord> cmd_scan(const RunConfig& cfg, int workers = 0) {
    cfg.validate();
    const ScanSpec& sc = *cfg.scan;
    std::vector<RunConfig> rows;
    rows.reserve(sc.offsets.size());
    for (const double off : sc.offsets) {
        RunConfig rc = cfg;
        rc.command = "simulate";
        rc.scan.reset();
        // Scans perturb the dynamics only; the readout frame stays at the base point.
        if (gate_qubits(cfg.target) == 2 && !rc.frame_system) rc.frame_system = cfg.system;
        config_parameter(rc, sc.parameter) += off;
        rows.push_back(std::move(rc));
    }
    std::vector<Synthesis> syn(rows.size());
    std::vector<double> wall(rows.size(), 0.0);
    parallel_for_index(rows.size(), workers, [&](std::size_t i) {
        WallTimer t;
        syn[i] = synthesize(rows[i]);
        wall[i] = t.seconds();
    });
    std::vector<RunRecord> records;
    records.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        RunRecord r = make_record(rows[i], syn[i], wall[i]);
        r.extra = json{{"scan",
                        {{"parameter", sc.parameter},
                         {"offset", sc.offsets[i]},
                         {"value", config_parameter(rows[i], sc.parameter)}}}};
        records.push_back(std::move(r));
    }
    return records;
}

inline RunRecord cmd_converge(const RunConfig& cfg) {
    cfg.validate();
    const ConvergeSpec cv = cfg.converge.value_or(ConvergeSpec{});
    if (cv.doublings < 1) throw usage_error("config: converge.doublings must be >= 1");
    WallTimer t;

    std::vector<ConvergenceRow> rows;
    if (gate_qubits(cfg.target) == 1) {
        const SweepParameters p = cfg.sweep;
        const HamiltonianFn<2> h = [&p](double tau) { return h1_frame(tau, p); };
        rows = convergence_study<2>(h, -p.tau0, p.tau0, cv.base_steps, cv.doublings,
                                    cfg.plan.rule);
    } else {
        const Matrix<4> stat = h2_static_part(*cfg.system);
        const SweepParameters p = cfg.sweep;
        const TwoQubitSystemParameters sys = *cfg.system;
        const HamiltonianFn<4> h = [&stat, &p, &sys](double tau) {
            return stat + h2_sweep_part(tau, p, sys);
        };
        rows = convergence_study<4>(h, -p.tau0 / 2.0, p.tau0 / 2.0, cv.base_steps,
                                    cv.doublings, cfg.plan.rule);
    }

    double dmax = 0.0;
    json jrows = json::array();
    for (const auto& r : rows) {
        dmax = std::max(dmax, r.delta);
        jrows.push_back(json{{"steps", r.steps}, {"delta", r.delta}});
    }
    // At the roundoff floor the deltas stop scaling; report saturation, not a slope.
    bool saturated = dmax < 1e-12;
    json conv{{"rows", jrows}, {"saturated", saturated}};
    if (!saturated) {
        try {
            conv["slope"] = convergence_slope(rows);
        } catch (const numeric_error&) {
            conv["saturated"] = true;
        }
    }

    if (gate_qubits(cfg.target) == 2 && cfg.schedule && cv.subinterval_grid.size() >= 2) {
        const TwoQubitSystemParameters& sys = *cfg.system;
        const TwoQubitSystemParameters frame = cfg.frame_system.value_or(sys);
        std::vector<Matrix<4>> us;
        for (const long n : cv.subinterval_grid) {
            SymmetrizationSchedule<4> sched = schedule_from_spec(*cfg.schedule);
            sched.n_subintervals = n;
            us.push_back(two_qubit_gate(cfg.sweep, sys, frame, sched, cfg.plan.rule).raw);
        }
        json srows = json::array();
        bool monotone = true;
        double prev_delta = -1.0;
        for (std::size_t i = 0; i + 1 < us.size(); ++i) {
            const double delta = max_abs_diff(us[i], us[i + 1]);
            srows.push_back(json{{"n_subintervals", cv.subinterval_grid[i]}, {"delta", delta}});
            if (prev_delta >= 0.0 && delta >= prev_delta) monotone = false;
            prev_delta = delta;
        }
        conv["subinterval_rows"] = srows;
        conv["monotone_decreasing"] = monotone;
    }

    const Synthesis s = synthesize(cfg);
    RunRecord r = make_record(cfg, s, t.seconds());
    r.extra = json{{"convergence", conv}};
    return r;
}

// ---- Human-readable output -----------------------------------------------------

inline std::string summary_line(const RunRecord& r) {
    char buf[160];
    const std::string target = r.config.value("target", std::string("?"));
    std::snprintf(buf, sizeof buf, "%-26s Tr P = %.6e   fidelity = %.8f   (%.3f s)",
                  target.c_str(), r.metrics.trace_p, r.metrics.fidelity, r.wall_time_s);
    return buf;
}

// Re/Im blocks, 6 decimals, one matrix row per line.
inline std::string matrix_blocks(const json& applied, int n_qubits) {
    const int n = n_qubits == 1 ? 2 : 4;
    std::ostringstream os;
    for (const char* part : {"re", "im"}) {
        os << (part[0] == 'r' ? "Re(U_a):\n" : "Im(U_a):\n");
        const auto& arr = applied.at(part);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                char buf[24];
                std::snprintf(buf, sizeof buf, " % .6f", arr[r * n + c].get<double>());
                os << buf;
            }
            os << '\n';
        }
    }
    return os.str();
}

inline std::string scan_table(const std::vector<RunRecord>& records) {
    std::ostringstream os;
    os << "parameter        value            Tr P\n";
    for (const auto& r : records) {
        const auto& sc = r.extra.at("scan");
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-16s %-16.10g %.6e\n",
                      sc.at("parameter").get<std::string>().c_str(),
                      sc.at("value").get<double>(), r.metrics.trace_p);
        os << buf;
    }
    return os.str();
}

inline std::string converge_summary(const RunRecord& r) {
    std::ostringstream os;
    const auto& conv = r.extra.at("convergence");
    os << "steps         ||U(n) - U(2n)||\n";
    for (const auto& row : conv.at("rows")) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-13ld %.6e\n", row.at("steps").get<long>(),
                      row.at("delta").get<double>());
        os << buf;
    }
    if (conv.value("saturated", false))
        os << "slope: saturated (deltas at the roundoff floor)\n";
    else if (conv.contains("slope")) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "slope: %.3f\n", conv.at("slope").get<double>());
        os << buf;
    }
    if (conv.contains("subinterval_rows")) {
        os << "subintervals  ||U(N) - U(next)||\n";
        for (const auto& row : conv.at("subinterval_rows")) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%-13ld %.6e\n",
                          row.at("n_subintervals").get<long>(), row.at("delta").get<double>());
            os << buf;
        }
        os << "monotone decreasing: "
           << (conv.at("monotone_decreasing").get<bool>() ? "yes" : "no") << '\n';
    }
    return os.str();
}

inline std::string optimize_summary(const RunRecord& r) {
    std::ostringstream os;
    const auto& opt = r.extra.at("optimization");
    os << "best point:";
    for (const auto& [name, value] : opt.at("best_params").items()) {
        char buf[48];
        std::snprintf(buf, sizeof buf, " %s=%.10g", name.c_str(), value.get<double>());
        os << buf;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "\nbest Tr P = %.6e after %ld evaluations\n",
                  opt.at("best_trace_p").get<double>(), opt.at("eval_count").get<long>());
    os << buf;
    return os.str();
}

struct CommandOutput {
    std::vector<RunRecord> records;
    std::string human;
};

inline CommandOutput run_command(const RunConfig& cfg, int workers = 0) {
    CommandOutput out;
    if (cfg.command == "simulate") {
        RunRecord r = cmd_simulate(cfg);
        out.human = summary_line(r) + "\n" + matrix_blocks(r.applied_gate, r.metrics.n_qubits);
        out.records.push_back(std::move(r));
    } else if (cfg.command == "optimize") {
        RunRecord r = cmd_optimize(cfg, workers);
        out.human = summary_line(r) + "\n" + optimize_summary(r);
        out.records.push_back(std::move(r));
    } else if (cfg.command == "scan") {
        out.records = cmd_scan(cfg, workers);
        out.human = scan_table(out.records);
    } else if (cfg.command == "converge") {
        RunRecord r = cmd_converge(cfg);
        out.human = summary_line(r) + "\n" + converge_summary(r);
        out.records.push_back(std::move(r));
    } else {
        throw usage_error("run_command: unsupported command '" + cfg.command + "'");
    }
    return out;
}

inline std::string resolve_output_path(const std::string& p) {
    const char* dir = std::getenv(output_dir_env);
    if (!dir || !*dir) return p;
    const std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (std::filesystem::path(dir) / fp).string();
}

inline std::string persist_records(const std::string& output_path,
                                   const std::vector<RunRecord>& records) {
    const std::string path = resolve_output_path(output_path);
    append_records(path, records);
    return path;
}

// ---- Report / replay -------------------------------------------------------------

inline double replay_trace_p(const json& config_echo, int workers = 1) {
    const RunConfig cfg = run_config_from_json(config_echo);
    if (cfg.command == "simulate") return cmd_simulate(cfg).metrics.trace_p;
    if (cfg.command == "optimize") return cmd_optimize(cfg, workers).metrics.trace_p;
    if (cfg.command == "converge") return cmd_converge(cfg).metrics.trace_p;
    throw usage_error("replay: unsupported command '" + cfg.command + "'");
}

struct ReportResult {
    std::string table;
    int replayed = 0;
    double max_replay_delta = 0.0;
};

inline ReportResult cmd_report(const std::string& records_path, bool replay = false,
                               int workers = 1) {
    const auto records = read_records(records_path);
    std::ostringstream os;
    os << "timestamp             command    target                     Tr P           "
          "fidelity      wall_s\n";
    for (const auto& r : records) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%-21s %-10s %-26s %.6e   %.8f  %8.3f\n",
                      r.timestamp.c_str(), r.config.value("command", std::string("?")).c_str(),
                      r.config.value("target", std::string("?")).c_str(), r.metrics.trace_p,
                      r.metrics.fidelity, r.wall_time_s);
        os << buf;
    }
    ReportResult out;
    out.table = os.str();
    if (replay) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            const double tp = replay_trace_p(records[i].config, workers);
            const double delta = std::abs(tp - records[i].metrics.trace_p);
            out.max_replay_delta = std::max(out.max_replay_delta, delta);
            ++out.replayed;
            if (delta > 1e-12)
                throw numeric_error("replay mismatch at record " + std::to_string(i) +
                                    ": |dTr P| = " + std::to_string(delta));
        }
    }
    return out;
}

}  // namespace trp

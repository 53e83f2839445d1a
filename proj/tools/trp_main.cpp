// trp: command-line driver for the TRP gate-synthesis toolkit.
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trp/trp.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> sets;
    int workers = 0;  // 0 = hardware concurrency
    std::int64_t seed = -1;
    std::string out;
};

void add_common_options(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "JSON config file");
    cmd->add_option("--preset", a.preset, "built-in preset name");
    cmd->add_option("--set", a.sets, "dotted-path override, key=value (repeatable)");
    cmd->add_option("--workers", a.workers, "worker pool size (default: processors)");
    cmd->add_option("--seed", a.seed, "RNG seed override");
    cmd->add_option("--out", a.out, "records output path (overrides config)");
}

trp::json load_config_json(const CommonArgs& a) {
    trp::json j;
    if (!a.preset.empty()) j = trp::preset_config(a.preset);
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw trp::usage_error("cannot open config file: " + a.config_path);
        trp::json file;
        try {
            file = trp::json::parse(in);
        } catch (const trp::json::parse_error& e) {
            throw trp::usage_error(std::string("config parse: ") + e.what());
        }
        if (j.is_null())
            j = std::move(file);
        else
            j.merge_patch(file);  // explicit config keys override the preset
    }
    if (j.is_null()) throw trp::usage_error("provide --config or --preset");
    for (const auto& kv : a.sets) trp::apply_set_override(j, kv);
    return j;
}

int run_workflow(const std::string& command, const CommonArgs& a) {
    trp::json cj = load_config_json(a);
    cj["command"] = command;
    if (a.seed >= 0) {
        cj["seed"] = static_cast<std::uint64_t>(a.seed);
        if (cj.contains("optimizer"))
            cj["optimizer"]["seed"] = static_cast<std::uint64_t>(a.seed);
    }
    if (!a.out.empty()) cj["output_path"] = a.out;
    const trp::RunConfig cfg = trp::run_config_from_json(cj);
    cfg.validate();
    const trp::CommandOutput out = trp::run_command(cfg, a.workers);
    const std::string path = trp::persist_records(cfg.output_path, out.records);
    std::cout << out.human;
    std::cout << "wrote " << out.records.size() << " record(s) to " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twisted rapid-passage quantum gate synthesis"};
    app.require_subcommand(1);

    CommonArgs sim_a, opt_a, scan_a, conv_a;
    CLI::App* sim = app.add_subcommand("simulate", "synthesize a gate, report Tr P and fidelity");
    add_common_options(sim, sim_a);
    CLI::App* opt = app.add_subcommand("optimize", "minimize Tr P over free parameters");
    add_common_options(opt, opt_a);
    CLI::App* scan = app.add_subcommand("scan", "sensitivity table over one parameter");
    add_common_options(scan, scan_a);
    CLI::App* conv = app.add_subcommand("converge", "step-doubling convergence study");
    add_common_options(conv, conv_a);

    CommonArgs rep_a;
    std::string rep_records;
    bool rep_replay = false;
    CLI::App* rep = app.add_subcommand("report", "tabulate persisted run records");
    add_common_options(rep, rep_a);
    rep->add_option("--records", rep_records, "records file (default: config output_path)");
    rep->add_flag("--replay", rep_replay, "re-run each record's config and verify Tr P");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_workflow("simulate", sim_a);
        if (opt->parsed()) return run_workflow("optimize", opt_a);
        if (scan->parsed()) return run_workflow("scan", scan_a);
        if (conv->parsed()) return run_workflow("converge", conv_a);
        if (rep->parsed()) {
            std::string path = rep_records;
            if (path.empty() && !rep_a.out.empty()) path = rep_a.out;
            if (path.empty() && (!rep_a.config_path.empty() || !rep_a.preset.empty()))
                path = load_config_json(rep_a).value("output_path", std::string("runs.jsonl"));
            if (path.empty()) path = "runs.jsonl";
            const auto result =
                trp::cmd_report(trp::resolve_output_path(path), rep_replay, rep_a.workers);
            std::cout << result.table;
            if (rep_replay) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "replayed %d record(s), max |dTr P| = %.3e\n",
                              result.replayed, result.max_replay_delta);
                std::cout << buf;
            }
            return 0;
        }
    } catch (const trp::usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const trp::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#pragma once

// Run persistence: line-delimited JSON records, one per line, append-only.
// Doubles serialize shortest-round-trip so records replay losslessly.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trp/matrix.hpp"
#include "trp/metrics.hpp"

namespace trp {

using nlohmann::json;

constexpr int record_schema_version = 1;

inline std::string utc_timestamp_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf, n);
}

template <int N>
json matrix_to_json(const Matrix<N>& m) {
    json re = json::array(), im = json::array();
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
    return json{{"re", re}, {"im", im}};
}

template <int N>
Matrix<N> matrix_from_json(const json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != N * N || im.size() != N * N)
        throw usage_error("matrix: wrong element count in record");
    Matrix<N> m;
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c)
            m(r, c) = cplx(re[r * N + c].get<double>(), im[r * N + c].get<double>());
    return m;
}

inline json metrics_to_json(const GateMetrics& g) {
    return json{{"trace_p", g.trace_p},
                {"fidelity", g.fidelity},
                {"pe_upper_bound", g.pe_upper_bound},
                {"pe_eigen_bound", g.pe_eigen_bound},
                {"n_qubits", g.n_qubits}};
}

inline GateMetrics metrics_from_json(const json& j) {
    GateMetrics g;
    g.trace_p = j.at("trace_p").get<double>();
    g.fidelity = j.at("fidelity").get<double>();
    g.pe_upper_bound = j.at("pe_upper_bound").get<double>();
    g.pe_eigen_bound = j.at("pe_eigen_bound").get<double>();
    g.n_qubits = j.at("n_qubits").get<int>();
    return g;
}

struct RunRecord {
    int schema_version = record_schema_version;
    std::string timestamp;
    json config;        // full run-config echo, shape owned by the runner
    GateMetrics metrics{};
    json applied_gate;  // {"re": row-major, "im": row-major}
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    json extra;         // command-specific block (optimization, scan, convergence)
};

inline json record_to_json(const RunRecord& r) {
    json j{{"schema_version", r.schema_version}, {"timestamp", r.timestamp},
           {"config", r.config},                 {"metrics", metrics_to_json(r.metrics)},
           {"applied_gate", r.applied_gate},     {"seed", r.seed},
           {"wall_time_s", r.wall_time_s}};
    if (!r.extra.is_null()) j["extra"] = r.extra;
    return j;
}

inline RunRecord record_from_json(const json& j) {
    const int v = j.at("schema_version").get<int>();
    if (v != record_schema_version)
        throw usage_error("record: unsupported schema_version " + std::to_string(v));
    RunRecord r;
    r.schema_version = v;
    r.timestamp = j.at("timestamp").get<std::string>();
    r.config = j.at("config");
    r.metrics = metrics_from_json(j.at("metrics"));
    r.applied_gate = j.at("applied_gate");
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    if (j.contains("extra")) r.extra = j.at("extra");
    return r;
}

// Single-writer append; all records of a command are persisted in one call.
inline void append_records(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw usage_error("cannot open records file for append: " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    if (!out) throw usage_error("write failure on records file: " + path);
}

inline std::vector<RunRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open records file: " + path);
    std::vector<RunRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw usage_error("records file " + path + " line " + std::to_string(lineno) +
                              ": " + e.what());
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

}  // namespace trp

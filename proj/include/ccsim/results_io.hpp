#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ccsim/simulator.hpp"

namespace ccsim {

// Rates are written with 9 significant digits.
inline std::string format_rate(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

inline constexpr const char* kResultsHeader =
    "t,policy,rate,oracle_rate,cum_regret,n2,num_partitions,round_kind";

// Per-run results: one row per (t, policy) under kResultsHeader.
inline void write_run_csv(const RunResult& run, bool count_attack_rounds,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write results file: " + path);
    out << kResultsHeader << '\n';
    std::vector<std::vector<double>> regret(run.policy_names.size());
    for (std::size_t p = 0; p < run.policy_names.size(); ++p)
        regret[p] = cumulative_regret(run, p, count_attack_rounds);
    for (const auto& rec : run.rounds) {
        for (std::size_t p = 0; p < run.policy_names.size(); ++p) {
            out << rec.t << ',' << run.policy_names[p] << ','
                << format_rate(rec.policies[p].rate) << ',' << format_rate(rec.oracle_rate)
                << ',' << format_rate(regret[p][rec.t - 1]) << ',' << rec.policies[p].n2 << ','
                << rec.policies[p].partition_count << ',' << to_string(rec.kind) << '\n';
        }
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

struct ResultRow {
    int t = 0;
    std::string policy;
    double rate = 0.0;
    double oracle_rate = 0.0;
    double cum_regret = 0.0;
    int n2 = 0;
    int num_partitions = 0;
    std::string round_kind;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        fields.push_back(f);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

inline std::vector<ResultRow> read_run_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kResultsHeader)
        throw std::runtime_error(path + ": unexpected header '" + line + "'");
    std::vector<ResultRow> rows;
    long long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 8 fields, got " + std::to_string(fields.size()));
        ResultRow row;
        row.t = std::stoi(fields[0]);
        row.policy = fields[1];
        row.rate = std::stod(fields[2]);
        row.oracle_rate = std::stod(fields[3]);
        row.cum_regret = std::stod(fields[4]);
        row.n2 = std::stoi(fields[5]);
        row.num_partitions = std::stoi(fields[6]);
        row.round_kind = fields[7];
        rows.push_back(std::move(row));
    }
    return rows;
}

inline constexpr const char* kAggregateHeader =
    "t,policy,mean_rate,std_rate,mean_cum_regret,std_cum_regret";

inline void write_aggregate_csv(const AggregateSeries& agg, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write aggregate file: " + path);
    out << kAggregateHeader << '\n';
    for (int t = 1; t <= agg.rounds; ++t) {
        for (std::size_t p = 0; p < agg.policy_names.size(); ++p) {
            out << t << ',' << agg.policy_names[p] << ','
                << format_rate(agg.mean_rate[p][t - 1]) << ','
                << format_rate(agg.std_rate[p][t - 1]) << ','
                << format_rate(agg.mean_cum_regret[p][t - 1]) << ','
                << format_rate(agg.std_cum_regret[p][t - 1]) << '\n';
        }
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

// Line-oriented diagnostics, one run per block, empty when nothing happened.
inline void write_event_log(const std::vector<RunResult>& runs, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write event log: " + path);
    for (std::size_t r = 0; r < runs.size(); ++r)
        for (const auto& msg : runs[r].events)
            out << "rep=" << r << " seed=" << runs[r].seed << ' ' << msg << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

// Partition-size series: first column t, then the sizes of blocks 1..M_t
// (rows are ragged since M_t grows over time).
inline void write_partition_series_csv(const std::vector<std::vector<int>>& sizes_by_round,
                                       const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write partition series: " + path);
    out << "t,sizes\n";
    for (std::size_t t = 0; t < sizes_by_round.size(); ++t) {
        out << t;
        for (int s : sizes_by_round[t])
            out << ',' << s;
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline std::vector<std::vector<int>> read_partition_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open partition series: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,sizes", 0) != 0)
        throw std::runtime_error(path + ": unexpected header");
    std::vector<std::vector<int>> rows;
    long long expected_t = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2)
            throw std::runtime_error(path + ": row without sizes");
        if (std::stoll(fields[0]) != expected_t)
            throw std::runtime_error(path + ": non-consecutive round index");
        std::vector<int> sizes;
        for (std::size_t i = 1; i < fields.size(); ++i)
            sizes.push_back(std::stoi(fields[i]));
        rows.push_back(std::move(sizes));
        ++expected_t;
    }
    return rows;
}

} // namespace ccsim

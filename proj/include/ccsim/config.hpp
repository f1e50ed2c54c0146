#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ccsim/types.hpp"
#include "ccsim/workload.hpp"

namespace ccsim {

inline const std::vector<std::string> kKnownPolicies = {"opm1", "opm2", "nsk", "oracle"};

// One experiment's parameters. `delta` and `catalog` stay in their textual
// spec form until a catalog exists: delta accepts a number or the literal
// "1/nK", catalogs are "zipf:<n>:<s>", "ratings:<path>" or "cache:<path>".
struct SimConfig {
    int rounds = 1000;
    int users = 100;
    int cache = 10;
    std::string delta = "0.1";
    int history = 10;
    int method = 2;
    int attack_period = 0;
    int attack_phase = 0;
    std::uint64_t seed = 1;
    int replications = 20;
    std::vector<std::string> policies = {"opm1", "opm2", "nsk", "oracle"};
    // Default workload: power-law with the rating-share decay of a large
    // movie-ratings corpus (exponent ~0.73) at a tractable catalog size, so
    // requests sample the catalog sparsely the way real traces do.
    std::string catalog = "zipf:500:0.73";
    bool count_attack_rounds = true; // whether attack rounds enter the regret sums
    bool oracle_screening = false;   // extension screen inside the regret oracle
};

inline double resolve_delta(const std::string& spec, int catalog_n, int users) {
    std::string s = spec;
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
            s.end());
    double value = 0.0;
    if (s == "1/nK" || s == "1/nk" || s == "1/(nK)" || s == "1/(nk)") {
        value = 1.0 / (static_cast<double>(catalog_n) * users);
    } else {
        try {
            std::size_t used = 0;
            value = std::stod(s, &used);
            if (used != s.size())
                throw ConfigError("bad delta: " + spec);
        } catch (const std::logic_error&) {
            throw ConfigError("bad delta: " + spec);
        }
    }
    if (!(value > 0.0 && value < 1.0))
        throw ConfigError("delta must lie in (0,1), got " + spec);
    return value;
}

inline std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline Catalog make_catalog(const std::string& spec) {
    const auto sep = spec.find(':');
    const std::string kind = spec.substr(0, sep);
    if (kind == "zipf") {
        if (sep == std::string::npos)
            throw ConfigError("catalog zipf needs zipf:<n>:<s>");
        const std::string rest = spec.substr(sep + 1);
        const auto sep2 = rest.find(':');
        if (sep2 == std::string::npos)
            throw ConfigError("catalog zipf needs zipf:<n>:<s>");
        try {
            const int n = std::stoi(rest.substr(0, sep2));
            const double s = std::stod(rest.substr(sep2 + 1));
            return zipf_catalog(n, s);
        } catch (const std::logic_error&) {
            throw ConfigError("bad zipf catalog spec: " + spec);
        }
    }
    if (kind == "ratings") {
        if (sep == std::string::npos || sep + 1 == spec.size())
            throw ConfigError("catalog ratings needs ratings:<path>");
        return load_ratings_catalog(spec.substr(sep + 1));
    }
    if (kind == "cache") {
        if (sep == std::string::npos || sep + 1 == spec.size())
            throw ConfigError("catalog cache needs cache:<path>");
        return load_catalog_cache(spec.substr(sep + 1));
    }
    throw ConfigError("unknown catalog spec: " + spec + " (want zipf:<n>:<s> | ratings:<path> | cache:<path>)");
}

// The two stock scenarios: a 100-user network under periodic sweep attacks,
// and a quiet 50-user network. Catalog, rounds and the rest stay at their
// defaults unless set explicitly.
inline void apply_preset(SimConfig& cfg, const std::string& name) {
    if (name == "attack100") {
        cfg.users = 100;
        cfg.cache = 10;
        cfg.attack_period = 100;
    } else if (name == "quiet50") {
        cfg.users = 50;
        cfg.cache = 10;
        cfg.attack_period = 0;
    } else {
        throw ConfigError("unknown preset: " + name + " (want attack100 | quiet50)");
    }
}

// Flat key=value overlay; '#' starts a comment, blank lines are skipped.
// Keys mirror the SimConfig fields.
inline void apply_config_file(SimConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::string line;
    long long line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "rounds") cfg.rounds = std::stoi(value);
            else if (key == "users") cfg.users = std::stoi(value);
            else if (key == "cache") cfg.cache = std::stoi(value);
            else if (key == "delta") cfg.delta = value;
            else if (key == "history") cfg.history = std::stoi(value);
            else if (key == "method") cfg.method = std::stoi(value);
            else if (key == "attack_period") cfg.attack_period = std::stoi(value);
            else if (key == "attack_phase") cfg.attack_phase = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "replications") cfg.replications = std::stoi(value);
            else if (key == "policies") cfg.policies = split_list(value);
            else if (key == "catalog") cfg.catalog = value;
            else if (key == "count_attack_rounds") cfg.count_attack_rounds = value == "true" || value == "1";
            else if (key == "oracle_screening") cfg.oracle_screening = value == "true" || value == "1";
            else throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const ConfigError*>(&e))
                throw;
            throw ConfigError(path + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
}

inline void validate_config(const SimConfig& cfg, int catalog_n) {
    if (cfg.rounds < 1)
        throw ConfigError("rounds must be >= 1");
    if (cfg.users < 1)
        throw ConfigError("users must be >= 1");
    if (cfg.cache < 0 || cfg.cache > catalog_n)
        throw ConfigError("cache must lie in [0, catalog size]");
    resolve_delta(cfg.delta, catalog_n, cfg.users);
    if (cfg.history < 1)
        throw ConfigError("history must be >= 1");
    if (cfg.method != 1 && cfg.method != 2)
        throw ConfigError("method must be 1 or 2");
    if (cfg.attack_period < 0)
        throw ConfigError("attack_period must be >= 0");
    if (cfg.replications < 1)
        throw ConfigError("replications must be >= 1");
    if (cfg.policies.empty())
        throw ConfigError("need at least one policy");
    for (const auto& p : cfg.policies) {
        if (std::find(kKnownPolicies.begin(), kKnownPolicies.end(), p) == kKnownPolicies.end())
            throw ConfigError("unknown policy '" + p + "' (want opm1,opm2,nsk,oracle)");
        if (std::count(cfg.policies.begin(), cfg.policies.end(), p) > 1)
            throw ConfigError("policy '" + p + "' listed twice");
    }
}

} // namespace ccsim

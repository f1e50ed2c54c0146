#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ccsim/config.hpp"
#include "ccsim/policies.hpp"
#include "ccsim/rng.hpp"
#include "ccsim/types.hpp"
#include "ccsim/workload.hpp"

namespace ccsim {

struct PolicyRound {
    double rate = 0.0;
    int n2 = 0;
    int partition_count = 0;
};

// Per-round outcome across all requested policies plus the oracle, computed
// on the one shared demand.
struct RoundRecord {
    int t = 0;
    RoundKind kind = RoundKind::normal;
    double oracle_rate = 0.0;
    int oracle_n2 = 0;
    std::vector<PolicyRound> policies; // aligned with RunResult::policy_names
};

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<std::string> policy_names;
    std::vector<RoundRecord> rounds;
    std::vector<std::string> events;
};

inline std::unique_ptr<PlacementPolicy> make_policy(const std::string& name,
                                                    const SimConfig& cfg, int catalog_n,
                                                    double delta) {
    if (name == "opm1")
        return std::make_unique<OpmPolicy>(name, catalog_n, cfg.users, cfg.cache, cfg.history,
                                           1, delta);
    if (name == "opm2")
        return std::make_unique<OpmPolicy>(name, catalog_n, cfg.users, cfg.cache, cfg.history,
                                           2, delta);
    if (name == "nsk")
        return std::make_unique<NskPolicy>(name, catalog_n, cfg.users, cfg.cache);
    throw ConfigError("unknown policy '" + name + "'");
}

// One replication: every policy commits its placement, one demand is drawn
// (or the sweep demand on the attack schedule), every policy's rate and the
// oracle rate are computed on that same demand, then every policy learns.
inline RunResult run(const SimConfig& cfg, const Catalog& catalog, std::uint64_t seed) {
    validate_config(cfg, catalog.size());
    const double delta = resolve_delta(cfg.delta, catalog.size(), cfg.users);

    RunResult result;
    result.seed = seed;
    result.policy_names = cfg.policies;

    std::vector<std::unique_ptr<PlacementPolicy>> learners(cfg.policies.size());
    for (std::size_t p = 0; p < cfg.policies.size(); ++p)
        if (cfg.policies[p] != "oracle")
            learners[p] = make_policy(cfg.policies[p], cfg, catalog.size(), delta);

    Rng rng(seed);
    result.rounds.reserve(cfg.rounds);
    std::vector<PolicyDecision> decisions(cfg.policies.size());
    for (int t = 1; t <= cfg.rounds; ++t) {
        for (std::size_t p = 0; p < learners.size(); ++p)
            if (learners[p])
                decisions[p] = learners[p]->decide();

        const Demand demand = is_attack_round(t, cfg.attack_period, cfg.attack_phase)
                                  ? attack_demand(catalog.size())
                                  : sample_demand(catalog, cfg.users, rng);

        const CutEvaluation oracle = oracle_cut(catalog, demand, cfg.cache, cfg.oracle_screening);

        RoundRecord rec;
        rec.t = t;
        rec.kind = demand.kind;
        rec.oracle_rate = oracle.rate;
        rec.oracle_n2 = oracle.n2;
        rec.policies.resize(cfg.policies.size());
        for (std::size_t p = 0; p < learners.size(); ++p) {
            if (!learners[p]) { // the oracle runs as its own row
                rec.policies[p] = {oracle.rate, oracle.n2, catalog.size()};
                continue;
            }
            const DemandStats stats = demand_stats(demand, decisions[p].group);
            rec.policies[p].rate = total_rate(decisions[p].group.count,
                                              learners[p]->cache_size(), stats);
            rec.policies[p].n2 = decisions[p].group.count;
            learners[p]->observe(demand);
            rec.policies[p].partition_count = learners[p]->partition_count();
            for (auto& msg : learners[p]->take_diagnostics())
                result.events.push_back("t=" + std::to_string(t) + " policy=" +
                                        cfg.policies[p] + " " + msg);
        }
        result.rounds.push_back(std::move(rec));
    }
    return result;
}

// Prefix sums of the per-round gap to the oracle. Attack rounds can be left
// out of the sums; they then contribute zero but keep their time slot.
inline std::vector<double> cumulative_regret(const RunResult& run, std::size_t policy_index,
                                             bool count_attack_rounds = true) {
    if (policy_index >= run.policy_names.size())
        throw std::invalid_argument("cumulative_regret: policy index out of range");
    std::vector<double> out;
    out.reserve(run.rounds.size());
    double acc = 0.0;
    for (const auto& rec : run.rounds) {
        if (count_attack_rounds || rec.kind != RoundKind::attack)
            acc += rec.policies[policy_index].rate - rec.oracle_rate;
        out.push_back(acc);
    }
    return out;
}

// Per-round mean and sample standard deviation across replications.
struct AggregateSeries {
    std::vector<std::string> policy_names;
    int rounds = 0;
    // indexed [policy][t-1]
    std::vector<std::vector<double>> mean_rate, std_rate;
    std::vector<std::vector<double>> mean_cum_regret, std_cum_regret;
};

inline AggregateSeries aggregate_replications(const std::vector<RunResult>& runs,
                                              bool count_attack_rounds = true) {
    if (runs.empty())
        throw std::invalid_argument("aggregate_replications: no runs");
    const std::size_t policies = runs.front().policy_names.size();
    const std::size_t rounds = runs.front().rounds.size();
    for (const auto& r : runs) {
        if (r.rounds.size() != rounds || r.policy_names != runs.front().policy_names)
            throw std::invalid_argument("aggregate_replications: runs differ in length or policies");
    }

    AggregateSeries agg;
    agg.policy_names = runs.front().policy_names;
    agg.rounds = static_cast<int>(rounds);
    const auto zero = std::vector<double>(rounds, 0.0);
    agg.mean_rate.assign(policies, zero);
    agg.std_rate.assign(policies, zero);
    agg.mean_cum_regret.assign(policies, zero);
    agg.std_cum_regret.assign(policies, zero);

    std::vector<std::vector<std::vector<double>>> regret(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        regret[r].resize(policies);
        for (std::size_t p = 0; p < policies; ++p)
            regret[r][p] = cumulative_regret(runs[r], p, count_attack_rounds);
    }

    const double denom = static_cast<double>(runs.size());
    for (std::size_t p = 0; p < policies; ++p) {
        for (std::size_t t = 0; t < rounds; ++t) {
            double sum_rate = 0.0, sum_reg = 0.0;
            for (std::size_t r = 0; r < runs.size(); ++r) {
                sum_rate += runs[r].rounds[t].policies[p].rate;
                sum_reg += regret[r][p][t];
            }
            const double m_rate = sum_rate / denom;
            const double m_reg = sum_reg / denom;
            agg.mean_rate[p][t] = m_rate;
            agg.mean_cum_regret[p][t] = m_reg;
            if (runs.size() > 1) {
                double ss_rate = 0.0, ss_reg = 0.0;
                for (std::size_t r = 0; r < runs.size(); ++r) {
                    const double dr = runs[r].rounds[t].policies[p].rate - m_rate;
                    const double dg = regret[r][p][t] - m_reg;
                    ss_rate += dr * dr;
                    ss_reg += dg * dg;
                }
                agg.std_rate[p][t] = std::sqrt(ss_rate / (denom - 1.0));
                agg.std_cum_regret[p][t] = std::sqrt(ss_reg / (denom - 1.0));
            }
        }
    }
    return agg;
}

struct Experiment {
    std::vector<RunResult> runs;
    AggregateSeries aggregate;
};

// Replication r draws its demand stream from a seed derived as
// mix_seed(cfg.seed, r); replications share nothing else.
inline Experiment run_experiment(const SimConfig& cfg, const Catalog& catalog) {
    Experiment exp;
    exp.runs.reserve(cfg.replications);
    for (int r = 0; r < cfg.replications; ++r)
        exp.runs.push_back(run(cfg, catalog, mix_seed(cfg.seed, static_cast<std::uint64_t>(r))));
    exp.aggregate = aggregate_replications(exp.runs, cfg.count_attack_rounds);
    return exp;
}

} // namespace ccsim

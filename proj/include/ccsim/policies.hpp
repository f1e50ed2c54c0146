#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "ccsim/ranker.hpp"
#include "ccsim/rate.hpp"
#include "ccsim/types.hpp"
#include "ccsim/workload.hpp"

namespace ccsim {

// A committed cache placement for one round.
struct PolicyDecision {
    PopularGroup group;
    int merged_blocks = 0; // leading partition blocks merged; 0 when not applicable
};

// Round interface shared by all learning policies: the placement decision is
// produced strictly before the round's demand is presented, then the demand
// is observed for learning. Each instance is a single-writer state machine.
class PlacementPolicy {
public:
    virtual ~PlacementPolicy() = default;
    virtual const std::string& name() const = 0;
    virtual int cache_size() const = 0;
    virtual PolicyDecision decide() = 0;
    virtual void observe(const Demand& demand) = 0;
    virtual int partition_count() const = 0;
    virtual std::vector<std::string> take_diagnostics() { return {}; }
};

// Rolling window of the last H rounds' demands, stored as sorted distinct
// request sets (the rate depends on a demand only through those).
class HistoryWindow {
public:
    explicit HistoryWindow(int capacity) : capacity_(capacity) {
        if (capacity < 1)
            throw ConfigError("history window needs capacity >= 1");
    }

    int capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    int size() const { return static_cast<int>(entries_.size()); }
    const std::deque<std::vector<FileId>>& entries() const { return entries_; }

    void push(std::vector<FileId> distinct_sorted) {
        entries_.push_back(std::move(distinct_sorted));
        if (static_cast<int>(entries_.size()) > capacity_)
            entries_.pop_front();
    }

    // Distinct union of every windowed demand, sorted.
    std::vector<FileId> merged_distinct() const {
        std::vector<FileId> merged;
        for (const auto& e : entries_)
            merged.insert(merged.end(), e.begin(), e.end());
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        return merged;
    }

private:
    int capacity_;
    std::deque<std::vector<FileId>> entries_;
};

inline std::vector<FileId> distinct_sorted_requests(const Demand& demand, int catalog_n) {
    std::vector<std::uint8_t> seen(catalog_n, 0);
    std::vector<FileId> out;
    for (FileId id : demand.requests) {
        if (id < 1 || id > catalog_n)
            throw std::invalid_argument("invalid demand: file id " + std::to_string(id) +
                                        " outside catalog [1," + std::to_string(catalog_n) + "]");
        if (!seen[id - 1]) {
            seen[id - 1] = 1;
            out.push_back(id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Partition-merging policy: ranks files online from request-count differences
// and caches the union of the b leading partition blocks, where b minimizes
// the delivery rate replayed against the history window. Method 1 merges the
// window into one aggregate demand; method 2 picks the per-round best b most
// often chosen across the window. Ties break toward fewer blocks.
class OpmPolicy : public PlacementPolicy {
public:
    OpmPolicy(std::string name, int catalog_n, int users, int cache, int history, int method,
              double delta)
        : name_(std::move(name)),
          users_(users),
          cache_(cache),
          method_(method),
          window_(history),
          ranker_(catalog_n, delta) {
        if (method != 1 && method != 2)
            throw ConfigError("opm method must be 1 or 2");
        if (users < 1)
            throw ConfigError("opm needs users >= 1");
        if (cache < 0 || cache > catalog_n)
            throw ConfigError("cache size must lie in [0, catalog size]");
    }

    const std::string& name() const override { return name_; }
    int cache_size() const override { return cache_; }
    int partition_count() const override { return ranker_.partitioning().count(); }
    const Ranker& ranker() const { return ranker_; }
    const HistoryWindow& window() const { return window_; }
    std::vector<std::string> take_diagnostics() override { return ranker_.take_diagnostics(); }

    PolicyDecision decide() override {
        const Partitioning& part = ranker_.partitioning();
        int depth = 1; // before any observation the single initial block covers all files
        if (!window_.empty())
            depth = method_ == 1 ? best_depth_for(window_.merged_distinct()) : vote_depth();
        return make_prefix_decision(part, depth);
    }

    void observe(const Demand& demand) override {
        const int n = ranker_.catalog_size();
        window_.push(distinct_sorted_requests(demand, n));
        std::vector<int> counts(n, 0);
        for (FileId id : demand.requests)
            ++counts[id - 1];
        ranker_.process_round(counts);
    }

    // Rate-minimizing number of leading blocks for one distinct request set,
    // evaluated against the current partitioning.
    int best_depth_for(const std::vector<FileId>& distinct) const {
        const Partitioning& part = ranker_.partitioning();
        const int m_blocks = part.count();
        std::vector<int> hits(m_blocks, 0);
        for (FileId id : distinct)
            ++hits[part.block_of[id - 1]];
        const int n_e = static_cast<int>(distinct.size());
        int best_b = 1;
        double best_rate = std::numeric_limits<double>::infinity();
        int group_size = 0;
        int covered = 0;
        for (int b = 1; b <= m_blocks; ++b) {
            group_size += static_cast<int>(part.blocks[b - 1].size());
            covered += hits[b - 1];
            const double rate = total_rate(group_size, cache_, {n_e, covered});
            if (rate < best_rate) {
                best_rate = rate;
                best_b = b;
            }
        }
        return best_b;
    }

private:
    int vote_depth() const {
        std::map<int, int> votes;
        for (const auto& entry : window_.entries())
            ++votes[best_depth_for(entry)];
        int best_b = 0;
        int best_votes = -1;
        for (const auto& [b, v] : votes) {
            if (v > best_votes) { // map iterates b ascending, ties keep the smaller b
                best_votes = v;
                best_b = b;
            }
        }
        return best_b;
    }

    PolicyDecision make_prefix_decision(const Partitioning& part, int depth) const {
        PolicyDecision d;
        d.merged_blocks = depth;
        d.group = PopularGroup::none(ranker_.catalog_size());
        for (int b = 0; b < depth; ++b) {
            for (FileId id : part.blocks[b]) {
                d.group.member[id - 1] = 1;
                ++d.group.count;
            }
        }
        return d;
    }

    std::string name_;
    int users_;
    int cache_;
    int method_;
    HistoryWindow window_;
    Ranker ranker_;
};

// Estimate-and-threshold baseline: empirical request frequencies, caching
// every file whose estimate reaches 1/(users*cache). Before any observation
// all files count as equally popular. The popular set is re-evaluated every
// round, and attack-round requests feed the estimates like any others.
class NskPolicy : public PlacementPolicy {
public:
    NskPolicy(std::string name, int catalog_n, int users, int cache)
        : name_(std::move(name)), n_(catalog_n), users_(users), cache_(cache),
          counts_(catalog_n, 0) {
        if (users < 1)
            throw ConfigError("nsk needs users >= 1");
        if (static_cast<long long>(users) * cache == 0)
            throw ConfigError("nsk threshold 1/(users*cache) undefined for cache 0");
        if (cache > catalog_n)
            throw ConfigError("cache size must lie in [0, catalog size]");
    }

    const std::string& name() const override { return name_; }
    int cache_size() const override { return cache_; }
    int partition_count() const override { return 2; } // popular / unpopular

    PolicyDecision decide() override {
        const double threshold = 1.0 / (static_cast<double>(users_) * cache_);
        PolicyDecision d;
        d.group = PopularGroup::none(n_);
        const auto estimates = estimated_popularity();
        for (int i = 0; i < n_; ++i) {
            if (estimates[i] >= threshold) {
                d.group.member[i] = 1;
                ++d.group.count;
            }
        }
        return d;
    }

    void observe(const Demand& demand) override {
        for (FileId id : demand.requests) {
            if (id < 1 || id > n_)
                throw std::invalid_argument("invalid demand: file id out of range");
            ++counts_[id - 1];
            ++total_;
        }
    }

    std::vector<double> estimated_popularity() const {
        std::vector<double> p(n_);
        if (total_ == 0) {
            std::fill(p.begin(), p.end(), 1.0 / n_);
        } else {
            for (int i = 0; i < n_; ++i)
                p[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
        }
        return p;
    }

    long long total_requests() const { return total_; }

private:
    std::string name_;
    int n_;
    int users_;
    int cache_;
    std::vector<long long> counts_;
    long long total_ = 0;
};

// Omniscient benchmark: knows the true popularity order and the round's
// demand, and places the rate-minimizing prefix cut. Stateless per round.
inline CutEvaluation oracle_cut(const Catalog& catalog, const Demand& demand,
                                int cache, bool screening = false) {
    std::vector<FileId> distinct = distinct_sorted_requests(demand, catalog.size());
    std::vector<int> ranks;
    ranks.reserve(distinct.size());
    for (FileId id : distinct)
        ranks.push_back(catalog.rank_of(id));
    return oracle_best_cut(ranks, cache, catalog.size(), screening);
}

inline double oracle_step(const Catalog& catalog, const Demand& demand, int cache,
                          bool screening = false) {
    return oracle_cut(catalog, demand, cache, screening).rate;
}

// One full policy round: commit the placement, observe the demand, charge the
// delivery rate, learn.
struct PolicyRoundOutcome {
    double rate = 0.0;
    PolicyDecision decision;
};

inline PolicyRoundOutcome play_round(PlacementPolicy& policy, const Demand& demand) {
    PolicyRoundOutcome out;
    out.decision = policy.decide();
    const DemandStats stats = demand_stats(demand, out.decision.group);
    out.rate = total_rate(out.decision.group.count, policy.cache_size(), stats);
    policy.observe(demand);
    return out;
}

} // namespace ccsim

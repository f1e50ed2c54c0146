#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsim/types.hpp"

namespace ccsim {

// Scale constant of the self-normalized confidence threshold,
// 4*sqrt(2/pi)/erf(sqrt(2)) = 3.3436764...
inline double edge_threshold_constant() {
    static const double c = 4.0 * std::sqrt(2.0 / 3.14159265358979323846) /
                            std::erf(std::sqrt(2.0));
    return c;
}

// Evidence needed before a pairwise request-count difference s is trusted:
// an edge is admissible once s >= sqrt(2 v ln((c/delta) sqrt(v))). Pairs with
// no observed difference volume (v = 0) are never admissible.
inline double edge_threshold(long long v, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("delta must lie in (0,1)");
    if (v <= 0)
        return std::numeric_limits<double>::infinity();
    const double vd = static_cast<double>(v);
    return std::sqrt(2.0 * vd * std::log(edge_threshold_constant() / delta * std::sqrt(vd)));
}

// Splits one round's per-file request counts into max(counts) binary stages;
// stage a has a 1 for every file with at least a requests. Column sums of the
// stage matrix reproduce the counts.
inline std::vector<std::vector<std::uint8_t>> stage_decompose(const std::vector<int>& counts) {
    int theta = 0;
    for (int c : counts) {
        if (c < 0)
            throw std::invalid_argument("stage_decompose: negative request count");
        theta = std::max(theta, c);
    }
    std::vector<std::vector<std::uint8_t>> stages;
    stages.reserve(theta);
    for (int stage = 1; stage <= theta; ++stage) {
        std::vector<std::uint8_t> beta(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            beta[i] = counts[i] >= stage ? 1 : 0;
        stages.push_back(std::move(beta));
    }
    return stages;
}

// Accumulated pairwise evidence: s(i,j) sums the per-stage request-indicator
// differences (antisymmetric), v(i,j) their absolute values (symmetric). Both
// are stored once per unordered pair; with catalogs of a few thousand files
// that is millions of pair slots, so entries are 32-bit.
class PairwiseStats {
public:
    explicit PairwiseStats(int n) : n_(n), s_(pair_slots(n), 0), v_(pair_slots(n), 0) {}

    int catalog_size() const { return n_; }
    long long stage_count() const { return gamma_; }
    void advance_stage() { ++gamma_; }

    long long s(FileId i, FileId j) const {
        check(i), check(j);
        if (i == j)
            return 0;
        const long long raw = s_[index(std::min(i, j) - 1, std::max(i, j) - 1)];
        return i < j ? raw : -raw;
    }

    long long v(FileId i, FileId j) const {
        check(i), check(j);
        if (i == j)
            return 0;
        return v_[index(std::min(i, j) - 1, std::max(i, j) - 1)];
    }

    // Adds u to s(i,j) and |u| to v(i,j).
    void accumulate(FileId i, FileId j, int u) {
        check(i), check(j);
        if (i == j || u == 0)
            return;
        const std::size_t idx = index(std::min(i, j) - 1, std::max(i, j) - 1);
        s_[idx] += i < j ? u : -u;
        v_[idx] += u < 0 ? -u : u;
    }

    struct Entry {
        std::int32_t s;
        std::int32_t v;
    };

    // Hot path for the stage loop: records one +1 difference for the pair
    // (requested, unrequested) and returns the updated entry. Ids must be
    // distinct and in range; callers iterate partition blocks, which are.
    Entry bump(FileId requested, FileId unrequested) {
        const bool ordered = requested < unrequested;
        const std::size_t idx = ordered ? index(requested - 1, unrequested - 1)
                                        : index(unrequested - 1, requested - 1);
        s_[idx] += ordered ? 1 : -1;
        ++v_[idx];
        return {ordered ? s_[idx] : static_cast<std::int32_t>(-s_[idx]), v_[idx]};
    }

private:
    static std::size_t pair_slots(int n) {
        if (n < 1)
            throw std::invalid_argument("PairwiseStats: need at least one file");
        return static_cast<std::size_t>(n) * (n - 1) / 2;
    }

    void check(FileId id) const {
        if (id < 1 || id > n_)
            throw std::invalid_argument("PairwiseStats: file id out of range");
    }

    // a < b, both zero-based
    std::size_t index(int a, int b) const {
        return static_cast<std::size_t>(a) * (2 * n_ - a - 1) / 2 + (b - a - 1);
    }

    int n_;
    std::vector<std::int32_t> s_;
    std::vector<std::int32_t> v_;
    long long gamma_ = 0;
};

// Accumulated dominance relation: an edge (worse, better) records that
// `better` has been inferred more popular than `worse`. Edges only grow.
class DominanceGraph {
public:
    explicit DominanceGraph(int n) : n_(n), winners_(checked_size(n)), losers_(n) {}

    int size() const { return n_; }
    std::size_t edge_count() const { return edges_; }

    bool has_edge(FileId worse, FileId better) const {
        check(worse), check(better);
        const auto& w = winners_[worse - 1];
        return std::find(w.begin(), w.end(), better) != w.end();
    }

    // Returns true when the edge is new. Self-edges are never stored.
    bool add_edge(FileId worse, FileId better) {
        check(worse), check(better);
        if (worse == better || has_edge(worse, better))
            return false;
        winners_[worse - 1].push_back(better);
        losers_[better - 1].push_back(worse);
        ++edges_;
        return true;
    }

    const std::vector<FileId>& winners_of(FileId worse) const {
        check(worse);
        return winners_[worse - 1];
    }

    const std::vector<FileId>& losers_of(FileId better) const {
        check(better);
        return losers_[better - 1];
    }

private:
    static std::size_t checked_size(int n) {
        if (n < 1)
            throw std::invalid_argument("DominanceGraph: need at least one file");
        return static_cast<std::size_t>(n);
    }

    void check(FileId id) const {
        if (id < 1 || id > n_)
            throw std::invalid_argument("DominanceGraph: file id out of range");
    }

    int n_;
    std::vector<std::vector<FileId>> winners_;
    std::vector<std::vector<FileId>> losers_;
    std::size_t edges_ = 0;
};

// Ordered disjoint blocks covering [N]; earlier blocks hold files that are
// more popular or not yet separated. No edge connects two files of one block.
struct Partitioning {
    std::vector<std::vector<FileId>> blocks; // members sorted ascending
    std::vector<int> block_of;               // id-1 -> block index (0-based)

    int count() const { return static_cast<int>(blocks.size()); }

    static Partitioning single_block(int n) {
        Partitioning p;
        p.blocks.emplace_back();
        p.blocks[0].reserve(n);
        for (FileId id = 1; id <= n; ++id)
            p.blocks[0].push_back(id);
        p.block_of.assign(n, 0);
        return p;
    }
};

struct PeelResult {
    Partitioning partitioning;
    bool cycle_fallback = false;
};

// Level-by-level extraction: each block takes every remaining file with no
// remaining winner, i.e. not inferred less popular than anything still
// unplaced. A cycle (possible only through false edges) cannot be peeled;
// the remaining files then form one terminal block and the caller is told.
inline PeelResult peel(const DominanceGraph& graph) {
    const int n = graph.size();
    PeelResult result;
    result.partitioning.block_of.assign(n, -1);
    auto& blocks = result.partitioning.blocks;
    auto& block_of = result.partitioning.block_of;

    std::vector<int> pending(n); // winners not yet placed
    std::vector<FileId> level;
    for (FileId id = 1; id <= n; ++id) {
        pending[id - 1] = static_cast<int>(graph.winners_of(id).size());
        if (pending[id - 1] == 0)
            level.push_back(id);
    }

    int placed = 0;
    while (placed < n) {
        if (level.empty()) {
            std::vector<FileId> rest;
            for (FileId id = 1; id <= n; ++id)
                if (block_of[id - 1] < 0)
                    rest.push_back(id);
            for (FileId id : rest)
                block_of[id - 1] = static_cast<int>(blocks.size());
            placed += static_cast<int>(rest.size());
            blocks.push_back(std::move(rest));
            result.cycle_fallback = true;
            break;
        }
        std::sort(level.begin(), level.end());
        const int b = static_cast<int>(blocks.size());
        std::vector<FileId> next;
        for (FileId id : level)
            block_of[id - 1] = b;
        for (FileId id : level)
            for (FileId worse : graph.losers_of(id))
                if (block_of[worse - 1] < 0 && --pending[worse - 1] == 0)
                    next.push_back(worse);
        placed += static_cast<int>(level.size());
        blocks.push_back(std::move(level));
        level = std::move(next);
    }
    return result;
}

// Online partial-order learner over one catalog: per-stage pairwise updates,
// threshold-gated edge inference, and re-partitioning. Single writer; reads
// of the current partitioning are safe whenever no update is in flight.
class Ranker {
public:
    Ranker(int n, double delta)
        : delta_(delta), stats_(n), graph_(n), part_(Partitioning::single_block(n)) {
        edge_threshold(1, delta); // validates delta
        // tau(v)^2 = 2 v ln((c/delta) sqrt(v)) >= 2 v ln(c/delta) for v >= 1,
        // so s*s < quick_*v rules a crossing out without evaluating tau.
        quick_gate_ = 2.0 * std::log(edge_threshold_constant() / delta_);
    }

    int catalog_size() const { return stats_.catalog_size(); }
    double delta() const { return delta_; }
    long long stage_count() const { return stats_.stage_count(); }
    const PairwiseStats& stats() const { return stats_; }
    const DominanceGraph& graph() const { return graph_; }
    const Partitioning& partitioning() const { return part_; }

    std::vector<std::string> take_diagnostics() {
        std::vector<std::string> out;
        out.swap(diagnostics_);
        return out;
    }

    // One binary stage: pairs inside a common block accumulate the indicator
    // difference, newly admissible differences become edges, and the
    // partitioning is re-peeled when the relation grew. Pairs split across
    // blocks contribute nothing and stay frozen.
    void update_stage(const std::vector<std::uint8_t>& beta) {
        const int n = catalog_size();
        if (static_cast<int>(beta.size()) != n)
            throw std::invalid_argument("update_stage: beta length mismatch");
        stats_.advance_stage();

        bool grew = false;
        for (const auto& block : part_.blocks) {
            ones_.clear();
            zeros_.clear();
            for (FileId id : block)
                (beta[id - 1] ? ones_ : zeros_).push_back(id);
            for (FileId i : ones_) {
                for (FileId j : zeros_) {
                    const PairwiseStats::Entry e = stats_.bump(i, j);
                    if (e.s > 0 &&
                        static_cast<double>(e.s) * e.s >= quick_gate_ * e.v &&
                        static_cast<double>(e.s) >= edge_threshold(e.v, delta_))
                        grew |= graph_.add_edge(j, i);
                }
            }
        }
        if (grew) {
            PeelResult peeled = peel(graph_);
            if (peeled.cycle_fallback)
                diagnostics_.push_back("peel: dominance cycle, " +
                                       std::to_string(peeled.partitioning.blocks.back().size()) +
                                       " files merged into terminal block");
            part_ = std::move(peeled.partitioning);
        }
    }

    // One full delivery round: decompose the request counts into binary
    // stages and apply them in order.
    void process_round(const std::vector<int>& counts) {
        if (static_cast<int>(counts.size()) != catalog_size())
            throw std::invalid_argument("process_round: counts length mismatch");
        for (const auto& beta : stage_decompose(counts))
            update_stage(beta);
    }

private:
    double delta_;
    double quick_gate_ = 0.0;
    PairwiseStats stats_;
    DominanceGraph graph_;
    Partitioning part_;
    std::vector<std::string> diagnostics_;
    std::vector<FileId> ones_, zeros_; // stage scratch
};

} // namespace ccsim

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccsim/types.hpp"

namespace ccsim {

// Distinct-request summary of one round's demand against a popular group.
struct DemandStats {
    int n_e = 0; // distinct requested files
    int h_e = 0; // distinct requested files inside the popular group
};

// One evaluated placement cut: group size and the delivery rate it incurs,
// in units of the file size F.
struct CutEvaluation {
    int n2 = 0;
    double rate = 0.0;
};

// The extension screen below is a first-order heuristic; it is only applied
// when the current group is much larger than the cache-times-coverage
// product. Callers outside this regime must not rely on it.
inline constexpr int kScreenRegimeFactor = 50;

inline DemandStats demand_stats(const Demand& demand, const PopularGroup& group) {
    const int n = group.catalog_size();
    std::vector<std::uint8_t> seen(n, 0);
    DemandStats out;
    for (FileId id : demand.requests) {
        if (id < 1 || id > n)
            throw std::invalid_argument("invalid demand: file id " + std::to_string(id) +
                                        " outside catalog [1," + std::to_string(n) + "]");
        if (seen[id - 1])
            continue;
        seen[id - 1] = 1;
        ++out.n_e;
        if (group.member[id - 1])
            ++out.h_e;
    }
    return out;
}

// Delivery rate for one round under decentralized placement over a popular
// group of n2 files with per-user cache size m (both in whole files):
//
//     (n2 - m)/m * (1 - (1 - m/n2)^h_e) + (n_e - h_e)      for n2 > m
//
// The group term vanishes when the whole group fits in cache (n2 <= m),
// and with no cache at all (m = 0) every distinct request ships uncoded.
inline double total_rate(int n2, int m, const DemandStats& stats) {
    if (n2 < 0 || m < 0 || stats.n_e < 0 || stats.h_e < 0 || stats.h_e > stats.n_e)
        throw std::domain_error("total_rate: negative or inconsistent inputs");
    if (m == 0 || n2 == 0)
        return static_cast<double>(stats.n_e);
    if (n2 <= m)
        return static_cast<double>(stats.n_e - stats.h_e);
    const double ratio = static_cast<double>(m) / static_cast<double>(n2);
    const double group_term = (static_cast<double>(n2 - m) / static_cast<double>(m)) *
                              (1.0 - std::pow(1.0 - ratio, static_cast<double>(stats.h_e)));
    return group_term + static_cast<double>(stats.n_e - stats.h_e);
}

// Screening inequality for enlarging a popular group of n2 files (currently
// covering h_e distinct requests) by added_files files so that added_covered
// more requests fall inside it. Returns true when the enlarged group is
// predicted to lower the rate. Exact in integer arithmetic:
//   keep  <=>  added_files * h_e < n2 * added_covered.
inline bool keep_group_extension(int n2, int h_e, long long added_files, long long added_covered) {
    if (h_e <= 0)
        throw std::domain_error("keep_group_extension: requires h_e >= 1");
    if (n2 <= 0 || added_covered < 1 || added_files < added_covered)
        throw std::domain_error("keep_group_extension: invalid extension step");
    return added_files * static_cast<long long>(h_e) <
           static_cast<long long>(n2) * added_covered;
}

inline bool extension_screen_in_regime(int n2, int m, int h_e) {
    return n2 > m && h_e > 0 &&
           static_cast<long long>(n2) >=
               static_cast<long long>(kScreenRegimeFactor) * m * h_e;
}

// Rate-minimizing prefix cut for a demand whose distinct requests sit at the
// given popularity ranks (strictly increasing, 1-based). Only cuts at
// requested ranks (plus the empty cut) can be optimal: growing the group past
// a requested rank without covering a new request only raises the rate. The
// rate is not convex in the cut, so every candidate is evaluated; with
// `screening` enabled, candidates are skipped when the extension screen
// rejects them inside its validity regime.
inline CutEvaluation oracle_best_cut(const std::vector<int>& demand_ranks, int m, int n,
                                     bool screening = false) {
    if (m < 0 || n < 0)
        throw std::domain_error("oracle_best_cut: negative cache or catalog size");
    for (std::size_t j = 0; j < demand_ranks.size(); ++j) {
        if (demand_ranks[j] < 1 || demand_ranks[j] > n)
            throw std::invalid_argument("oracle_best_cut: rank outside [1,n]");
        if (j > 0 && demand_ranks[j] <= demand_ranks[j - 1])
            throw std::invalid_argument("oracle_best_cut: ranks must be strictly increasing");
    }
    const int n_e = static_cast<int>(demand_ranks.size());
    if (n_e == 0)
        return {0, 0.0};

    CutEvaluation best{0, total_rate(0, m, {n_e, 0})};
    int best_h = 0;
    for (int j = 0; j < n_e; ++j) {
        const int cut = demand_ranks[j];
        const int covered = j + 1;
        if (screening && best.n2 > 0 && extension_screen_in_regime(best.n2, m, best_h)) {
            const long long added_files = cut - best.n2;
            const long long added_covered = covered - best_h;
            if (!keep_group_extension(best.n2, best_h, added_files, added_covered))
                continue;
        }
        const double rate = total_rate(cut, m, {n_e, covered});
        if (rate < best.rate) {
            best = {cut, rate};
            best_h = covered;
        }
    }
    return best;
}

} // namespace ccsim

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccsim/rng.hpp"
#include "ccsim/types.hpp"

namespace ccsim {

// Immutable file universe with its ground-truth popularity vector, sorted
// non-increasing; file ids coincide with popularity ranks after construction.
class Catalog {
public:
    // `popularity` must be non-negative, non-increasing and sum to 1 within
    // 1e-9. `source_ids`, when given, carries the pre-reindexing dataset ids.
    explicit Catalog(std::vector<double> popularity, std::vector<long long> source_ids = {})
        : popularity_(std::move(popularity)), source_ids_(std::move(source_ids)) {
        if (popularity_.empty())
            throw std::invalid_argument("Catalog: empty popularity vector");
        if (!source_ids_.empty() && source_ids_.size() != popularity_.size())
            throw std::invalid_argument("Catalog: source id count mismatch");
        double sum = 0.0;
        for (std::size_t i = 0; i < popularity_.size(); ++i) {
            if (popularity_[i] < 0.0)
                throw std::invalid_argument("Catalog: negative popularity");
            if (i > 0 && popularity_[i] > popularity_[i - 1])
                throw std::invalid_argument("Catalog: popularity not sorted non-increasing");
            sum += popularity_[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("Catalog: popularity sums to " + std::to_string(sum));
        cdf_.resize(popularity_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < popularity_.size(); ++i) {
            acc += popularity_[i];
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;
    }

    int size() const { return static_cast<int>(popularity_.size()); }

    double prob(FileId id) const {
        check(id);
        return popularity_[id - 1];
    }

    const std::vector<double>& popularity() const { return popularity_; }

    // Ids are assigned by descending popularity, so a file's id is its rank.
    int rank_of(FileId id) const {
        check(id);
        return id;
    }

    // Dataset id a file carried before re-indexing; 0 for synthetic catalogs.
    long long source_id(FileId id) const {
        check(id);
        return source_ids_.empty() ? 0 : source_ids_[id - 1];
    }

    FileId sample(Rng& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t idx = std::min<std::size_t>(it - cdf_.begin(), popularity_.size() - 1);
        return static_cast<FileId>(idx + 1);
    }

private:
    void check(FileId id) const {
        if (id < 1 || id > size())
            throw std::invalid_argument("Catalog: file id out of range");
    }

    std::vector<double> popularity_;
    std::vector<double> cdf_;
    std::vector<long long> source_ids_;
};

// Power-law catalog: p_i proportional to i^-s. s = 0 gives a uniform catalog.
inline Catalog zipf_catalog(int n, double exponent) {
    if (n < 1)
        throw std::invalid_argument("zipf_catalog: need n >= 1");
    if (exponent < 0.0)
        throw std::invalid_argument("zipf_catalog: exponent must be >= 0");
    std::vector<double> weights(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        weights[i] = std::pow(static_cast<double>(i + 1), -exponent);
        sum += weights[i];
    }
    for (double& w : weights)
        w /= sum;
    return Catalog(std::move(weights));
}

// Ratings-file ingestion: one record per line, four fields separated by "::"
// (user-id, movie-id, rating, timestamp); only the movie id is consumed. A
// movie's popularity is its share of all rating lines; unrated movies do not
// appear. Ties in rating count break by ascending dataset id.
inline Catalog load_ratings_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open ratings file: " + path);

    std::unordered_map<long long, long long> counts;
    long long total = 0;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto fail = [&](const std::string& why) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed ratings line (" + why + ")");
        };
        const std::size_t u_end = line.find("::");
        if (u_end == std::string::npos)
            fail("missing field separator");
        const std::size_t m_end = line.find("::", u_end + 2);
        if (m_end == std::string::npos)
            fail("expected four :: separated fields");
        if (line.find("::", m_end + 2) == std::string::npos)
            fail("expected four :: separated fields");
        const std::string movie_field = line.substr(u_end + 2, m_end - u_end - 2);
        long long movie = 0;
        try {
            std::size_t used = 0;
            movie = std::stoll(movie_field, &used);
            if (used != movie_field.size() || movie_field.empty())
                fail("movie id is not an integer");
        } catch (const std::logic_error&) {
            fail("movie id is not an integer");
        }
        ++counts[movie];
        ++total;
    }
    if (total == 0)
        throw std::runtime_error("ratings file is empty: " + path);

    std::vector<std::pair<long long, long long>> by_movie(counts.begin(), counts.end());
    std::sort(by_movie.begin(), by_movie.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<double> popularity;
    std::vector<long long> source_ids;
    popularity.reserve(by_movie.size());
    source_ids.reserve(by_movie.size());
    for (const auto& [movie, cnt] : by_movie) {
        popularity.push_back(static_cast<double>(cnt) / static_cast<double>(total));
        source_ids.push_back(movie);
    }
    return Catalog(std::move(popularity), std::move(source_ids));
}

// Two-column text cache of a catalog (file-id, popularity) for fast reload.
inline void write_catalog_cache(const Catalog& catalog, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write catalog cache: " + path);
    char buf[64];
    for (FileId id = 1; id <= catalog.size(); ++id) {
        std::snprintf(buf, sizeof(buf), "%.17g", catalog.prob(id));
        out << id << ' ' << buf << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline Catalog load_catalog_cache(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open catalog cache: " + path);
    std::vector<double> popularity;
    long long expected_id = 1;
    long long id = 0;
    double p = 0.0;
    while (in >> id >> p) {
        if (id != expected_id)
            throw std::runtime_error(path + ": catalog cache ids must be dense from 1, got " +
                                     std::to_string(id));
        popularity.push_back(p);
        ++expected_id;
    }
    if (!in.eof())
        throw std::runtime_error(path + ": malformed catalog cache entry " +
                                 std::to_string(expected_id));
    if (popularity.empty())
        throw std::runtime_error(path + ": empty catalog cache");
    return Catalog(std::move(popularity));
}

// k i.i.d. draws from the catalog's popularity distribution; duplicates are
// expected and kept.
inline Demand sample_demand(const Catalog& catalog, int k, Rng& rng) {
    if (k < 0)
        throw std::invalid_argument("sample_demand: negative request count");
    Demand d;
    d.kind = RoundKind::normal;
    d.requests.reserve(k);
    for (int i = 0; i < k; ++i)
        d.requests.push_back(catalog.sample(rng));
    return d;
}

// Sweep round: every catalog file requested exactly once.
inline Demand attack_demand(int n) {
    if (n < 1)
        throw std::invalid_argument("attack_demand: need n >= 1");
    Demand d;
    d.kind = RoundKind::attack;
    d.requests.reserve(n);
    for (FileId id = 1; id <= n; ++id)
        d.requests.push_back(id);
    return d;
}

// Attack schedule: with period A and default phase 0, rounds A, 2A, ... are
// attack rounds, i.e. exactly floor(T/A) attacks in T rounds.
inline bool is_attack_round(long long t, int period, int phase = 0) {
    if (period <= 0)
        return false;
    long long want = phase % period;
    if (want < 0)
        want += period;
    return t % period == want;
}

} // namespace ccsim

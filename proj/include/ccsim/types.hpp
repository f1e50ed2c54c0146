#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccsim {

// File ids are 1-based popularity ranks: catalogs re-index their files by
// non-increasing popularity, so id 1 is the most popular file.
using FileId = int;

// Invalid parameters or malformed configuration, as opposed to runtime
// failures; the CLI maps this to the usage-error exit code.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class RoundKind { normal, attack };

inline const char* to_string(RoundKind k) {
    return k == RoundKind::attack ? "attack" : "normal";
}

// One delivery round's requests. Length K for a normal round, length N for
// an attack round (every file requested once). Duplicates are allowed.
struct Demand {
    std::vector<FileId> requests;
    RoundKind kind = RoundKind::normal;
};

// Membership view of the cached ("popular") group over a catalog of n files.
struct PopularGroup {
    std::vector<std::uint8_t> member; // indexed by id-1
    int count = 0;

    static PopularGroup none(int n) { return {std::vector<std::uint8_t>(n, 0), 0}; }

    static PopularGroup all(int n) { return {std::vector<std::uint8_t>(n, 1), n}; }

    static PopularGroup from_ids(int n, const std::vector<FileId>& ids) {
        PopularGroup g = none(n);
        for (FileId id : ids) {
            if (id < 1 || id > n)
                throw std::invalid_argument("file id " + std::to_string(id) +
                                            " outside catalog [1," + std::to_string(n) + "]");
            if (!g.member[id - 1]) {
                g.member[id - 1] = 1;
                ++g.count;
            }
        }
        return g;
    }

    int catalog_size() const { return static_cast<int>(member.size()); }

    bool contains(FileId id) const {
        return id >= 1 && id <= catalog_size() && member[id - 1] != 0;
    }
};

} // namespace ccsim

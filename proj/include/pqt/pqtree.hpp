#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pqt/codebook.hpp"
#include "pqt/linequant.hpp"

namespace pqt {

/// Per-part (level-1 index, level-2 index) pair addressing one bin.
struct BinCode {
    std::vector<std::array<std::uint32_t, 2>> parts; // {i1, i2}
};

/// Flat per-part code i1*k2 + i2.
inline std::uint64_t flat_part_code(const BinCode& code, std::size_t p, const PqtConfig& cfg) {
    return static_cast<std::uint64_t>(code.parts[p][0]) * cfg.k2 + code.parts[p][1];
}

/// Positional code over base k1*k2, evaluated with unsigned wraparound;
/// part 0 is the least significant digit.
std::uint64_t global_code(const BinCode& code, const PqtConfig& cfg);

/// global_code modulo H. Distinct bins may collide; collisions are
/// accepted and re-ranking sorts the foreign vectors out.
std::uint64_t encode_slot(const BinCode& code, const PqtConfig& cfg, std::uint64_t hash_size);

/// Per part the nearest level-1 centroid (exhaustive over k1) and the
/// nearest level-2 centroid within that parent (exhaustive over k2).
BinCode assign_bin(const TreeCodebooks& tree, const float* x);

/// Slot-bucketed vector ids: offsets is an H+1 prefix-sum array and ids
/// lists, slot by slot, the vector ids in ascending order.
struct InvertedLists {
    std::vector<std::uint64_t> offsets; // H + 1
    std::vector<std::uint32_t> ids;     // n

    std::uint64_t slots() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Histogram over slots, exclusive prefix sum, then a scatter that keeps
/// ascending id order within each slot.
InvertedLists build_inverted_lists(const TreeCodebooks& tree, const VectorSet& db,
                                   const PqtConfig& cfg, int threads = 0);

/// Same construction from precomputed per-vector slots.
InvertedLists build_inverted_lists_from_slots(const std::vector<std::uint64_t>& slots,
                                              std::uint64_t hash_size);

/// Query-time traversal output. level1[p] holds all k1 (id, distance)
/// pairs sorted ascending; level2[p] holds the w*k2 children of the w
/// best parents, sorted; fine_dists is the p_line x k1 matrix of per-fine-
/// part squared distances filled as a by-product of the level-1 loop.
struct TraversalLists {
    struct L1Entry {
        std::uint32_t id;
        float dist;
    };
    struct L2Entry {
        std::uint32_t parent;
        std::uint32_t child;
        float dist;
    };
    std::vector<std::vector<L1Entry>> level1;
    std::vector<std::vector<L2Entry>> level2;
    std::vector<float> fine_dists; // p_line * k1, row-major

    float fine_at(std::size_t f, std::size_t i, std::uint32_t k1) const {
        return fine_dists[f * k1 + i];
    }
};

/// w-pruned traversal: k1 level-1 distances per part (aggregated from the
/// fine-part partials), then k2 level-2 distances for each of the w best
/// parents. Ties sort by ascending centroid id.
TraversalLists traverse(const TreeCodebooks& tree, const FineCentroids& fine,
                        const float* y, const PqtConfig& cfg);

} // namespace pqt

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace pqt {

/// Precomputed traversal order for one part-pair: the table_len smallest
/// rank tuples (r_a, r_b) under cost r_a + slope * r_b, ties broken
/// lexicographically. (0, 0) is always first.
struct OrderTable {
    double slope = 1.0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
};

/// One table per slope 1.08^k, k in [-5, 4]. The enumeration window is
/// sized from the cost bound so the result equals a full grid sort.
std::vector<OrderTable> build_slope_tables(std::uint32_t table_len);

inline constexpr std::uint32_t kSlopeTableCount = 10;
inline constexpr std::uint32_t kDefaultOrderTableLen = 4096;

/// Index into the slope tables nearest in log space to the ratio of the
/// two parts' first distance gaps; slope 1 when a gap is zero or a list
/// is too short to have one.
std::uint32_t pick_slope_table(std::span<const float> dists_a, std::span<const float> dists_b);

/// Ordered rank tuples, one per candidate bin, flattened row-major.
struct BinSequence {
    std::uint32_t parts = 0;
    std::vector<std::uint32_t> ranks; // size() * parts

    std::size_t size() const { return parts == 0 ? 0 : ranks.size() / parts; }
    std::span<const std::uint32_t> tuple(std::size_t i) const {
        return {ranks.data() + i * parts, parts};
    }
};

/// Exact multi-sequence enumeration: emits rank tuples in non-decreasing
/// order of the summed per-part distances (ties lexicographic), each
/// tuple exactly once, until max_bins or exhaustion. Reference order for
/// the precomputed heuristics; sequential by nature.
BinSequence dijkstra_order(const std::vector<std::vector<float>>& dist_lists,
                           std::size_t max_bins);

/// Lazily emits the heuristic bin order so callers can pull exactly as
/// many bins as gathering needs. The table prefix is followed by a
/// deterministic sweep of the not-yet-emitted grid, which makes the
/// order a complete enumeration when pulled to exhaustion.
class BinStream {
public:
    BinStream(const std::vector<std::vector<float>>& dist_lists,
              const std::vector<OrderTable>& tables);
    ~BinStream();
    BinStream(BinStream&&) noexcept;
    BinStream& operator=(BinStream&&) noexcept;

    std::uint32_t parts() const { return parts_; }
    /// Total tuples the stream can ever emit (the full rank grid).
    std::uint64_t total() const { return total_; }
    /// Writes the next tuple into out (parts() entries); false when done.
    bool next(std::uint32_t* out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint32_t parts_ = 0;
    std::uint64_t total_ = 0;
};

/// Materialized heuristic order: table-driven for 2 parts, hierarchical
/// pair merge for 4 (pairs (0,1) and (2,3) each through their slope
/// table, pair streams merged with the slope-1 table), identity for 1.
/// Other part counts fall back to the exact priority-queue order.
BinSequence heuristic_order(const std::vector<std::vector<float>>& dist_lists,
                            const std::vector<OrderTable>& tables,
                            std::size_t max_bins);

} // namespace pqt

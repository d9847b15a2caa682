#include "pqt/binorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace pqt {

std::vector<OrderTable> build_slope_tables(std::uint32_t table_len) {
    if (table_len == 0) {
        throw std::invalid_argument("build_slope_tables: table_len must be positive");
    }
    std::vector<OrderTable> tables;
    tables.reserve(kSlopeTableCount);
    for (int k = -5; k <= 4; ++k) {
        double slope = std::pow(1.08, k);
        // Window satisfying: at least table_len lattice points have cost
        // <= bound, hence the sorted window prefix is the exact top-T.
        double bound = std::sqrt(2.0 * slope * (table_len + 4.0)) + slope + 2.0;
        std::uint32_t max_a = static_cast<std::uint32_t>(bound) + 1;
        std::uint32_t max_b = static_cast<std::uint32_t>(bound / slope) + 1;

        std::vector<std::pair<std::uint32_t, std::uint32_t>> grid;
        grid.reserve(static_cast<std::size_t>(max_a + 1) * (max_b + 1));
        for (std::uint32_t a = 0; a <= max_a; ++a) {
            for (std::uint32_t b = 0; b <= max_b; ++b) {
                grid.emplace_back(a, b);
            }
        }
        auto cost = [slope](const std::pair<std::uint32_t, std::uint32_t>& e) {
            return static_cast<double>(e.first) + slope * static_cast<double>(e.second);
        };
        std::sort(grid.begin(), grid.end(), [&](const auto& x, const auto& y) {
            double cx = cost(x);
            double cy = cost(y);
            return cx != cy ? cx < cy : x < y;
        });
        grid.resize(std::min<std::size_t>(table_len, grid.size()));

        OrderTable table;
        table.slope = slope;
        table.entries = std::move(grid);
        tables.push_back(std::move(table));
    }
    return tables;
}

std::uint32_t pick_slope_table(std::span<const float> dists_a, std::span<const float> dists_b) {
    if (dists_a.size() < 2 || dists_b.size() < 2) {
        return 5; // slope 1
    }
    double gap_a = static_cast<double>(dists_a[1]) - dists_a[0];
    double gap_b = static_cast<double>(dists_b[1]) - dists_b[0];
    if (!(gap_a > 0.0) || !(gap_b > 0.0)) {
        return 5;
    }
    double ratio = gap_b / gap_a;
    int k = static_cast<int>(std::lround(std::log(ratio) / std::log(1.08)));
    k = std::clamp(k, -5, 4);
    return static_cast<std::uint32_t>(k + 5);
}

namespace {

// Lazy enumeration of one part-pair: the (bounds-filtered) slope table
// first, then a lexicographic sweep of the grid positions the table did
// not cover. Complete and duplicate-free over the len_a x len_b grid.
struct PairCursor {
    const OrderTable* table = nullptr;
    std::uint64_t len_a = 0;
    std::uint64_t len_b = 0;
    std::size_t table_pos = 0;
    std::uint64_t sweep_a = 0;
    std::uint64_t sweep_b = 0;
    std::unordered_set<std::uint64_t> emitted; // table entries within bounds

    std::uint64_t total() const { return len_a * len_b; }

    bool next(std::uint32_t& ra, std::uint32_t& rb) {
        while (table_pos < table->entries.size()) {
            auto [a, b] = table->entries[table_pos++];
            if (a < len_a && b < len_b) {
                emitted.insert((static_cast<std::uint64_t>(a) << 32) | b);
                ra = a;
                rb = b;
                return true;
            }
        }
        while (sweep_a < len_a) {
            while (sweep_b < len_b) {
                std::uint64_t key = (sweep_a << 32) | sweep_b;
                std::uint32_t a = static_cast<std::uint32_t>(sweep_a);
                std::uint32_t b = static_cast<std::uint32_t>(sweep_b);
                ++sweep_b;
                if (!emitted.count(key)) {
                    ra = a;
                    rb = b;
                    return true;
                }
            }
            sweep_b = 0;
            ++sweep_a;
        }
        return false;
    }
};

// Exact multi-sequence generator: min-heap on (sum, lexicographic tuple)
// with a visited set, emitting each tuple once.
struct DijkstraCursor {
    const std::vector<std::vector<float>>* lists = nullptr;

    struct Entry {
        double sum;
        std::vector<std::uint32_t> tuple;
    };
    struct Cmp {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.sum != b.sum ? a.sum > b.sum : a.tuple > b.tuple;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Cmp> heap;
    std::set<std::vector<std::uint32_t>> visited;

    void init(const std::vector<std::vector<float>>& dist_lists) {
        lists = &dist_lists;
        for (const auto& l : dist_lists) {
            if (l.empty()) {
                return; // nothing reachable
            }
        }
        std::vector<std::uint32_t> zero(dist_lists.size(), 0);
        heap.push({sum_of(zero), zero});
        visited.insert(std::move(zero));
    }

    double sum_of(const std::vector<std::uint32_t>& tuple) const {
        double s = 0.0;
        for (std::size_t p = 0; p < tuple.size(); ++p) {
            s += (*lists)[p][tuple[p]];
        }
        return s;
    }

    bool next(std::uint32_t* out) {
        if (heap.empty()) {
            return false;
        }
        Entry top = heap.top();
        heap.pop();
        std::copy(top.tuple.begin(), top.tuple.end(), out);
        for (std::size_t p = 0; p < top.tuple.size(); ++p) {
            if (top.tuple[p] + 1 < (*lists)[p].size()) {
                std::vector<std::uint32_t> succ = top.tuple;
                ++succ[p];
                if (visited.insert(succ).second) {
                    heap.push({sum_of(succ), std::move(succ)});
                }
            }
        }
        return true;
    }
};

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return a * b;
}

} // namespace

struct BinStream::Impl {
    enum class Mode { single, pair, quad, exact } mode = Mode::exact;

    // single
    std::uint64_t pos = 0;
    std::uint64_t len = 0;

    // pair / quad
    PairCursor pair_a;
    PairCursor pair_b;
    PairCursor merge;
    std::vector<std::array<std::uint32_t, 2>> stream_a; // materialized prefixes
    std::vector<std::array<std::uint32_t, 2>> stream_b;

    DijkstraCursor exact;

    bool extend_stream(PairCursor& cursor, std::vector<std::array<std::uint32_t, 2>>& stream,
                       std::uint64_t needed) {
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        while (stream.size() < needed) {
            if (!cursor.next(a, b)) {
                return false;
            }
            stream.push_back({a, b});
        }
        return true;
    }
};

BinStream::BinStream(const std::vector<std::vector<float>>& dist_lists,
                     const std::vector<OrderTable>& tables)
    : impl_(std::make_unique<Impl>()) {
    parts_ = static_cast<std::uint32_t>(dist_lists.size());
    total_ = 1;
    for (const auto& l : dist_lists) {
        total_ = saturating_mul(total_, l.size());
    }

    if (parts_ == 1) {
        impl_->mode = Impl::Mode::single;
        impl_->len = dist_lists[0].size();
        return;
    }
    if (parts_ == 2 && tables.size() == kSlopeTableCount) {
        impl_->mode = Impl::Mode::pair;
        impl_->pair_a.table = &tables[pick_slope_table(dist_lists[0], dist_lists[1])];
        impl_->pair_a.len_a = dist_lists[0].size();
        impl_->pair_a.len_b = dist_lists[1].size();
        return;
    }
    if (parts_ == 4 && tables.size() == kSlopeTableCount) {
        impl_->mode = Impl::Mode::quad;
        impl_->pair_a.table = &tables[pick_slope_table(dist_lists[0], dist_lists[1])];
        impl_->pair_a.len_a = dist_lists[0].size();
        impl_->pair_a.len_b = dist_lists[1].size();
        impl_->pair_b.table = &tables[pick_slope_table(dist_lists[2], dist_lists[3])];
        impl_->pair_b.len_a = dist_lists[2].size();
        impl_->pair_b.len_b = dist_lists[3].size();
        impl_->merge.table = &tables[5]; // slope 1 over pair ranks
        impl_->merge.len_a = impl_->pair_a.total();
        impl_->merge.len_b = impl_->pair_b.total();
        return;
    }
    // No precomputed heuristic for this part count: exact order instead.
    impl_->mode = Impl::Mode::exact;
    impl_->exact.init(dist_lists);
}

BinStream::~BinStream() = default;
BinStream::BinStream(BinStream&&) noexcept = default;
BinStream& BinStream::operator=(BinStream&&) noexcept = default;

bool BinStream::next(std::uint32_t* out) {
    switch (impl_->mode) {
    case Impl::Mode::single: {
        if (impl_->pos >= impl_->len) {
            return false;
        }
        out[0] = static_cast<std::uint32_t>(impl_->pos++);
        return true;
    }
    case Impl::Mode::pair: {
        return impl_->pair_a.next(out[0], out[1]);
    }
    case Impl::Mode::quad: {
        std::uint32_t u = 0;
        std::uint32_t v = 0;
        if (!impl_->merge.next(u, v)) {
            return false;
        }
        if (!impl_->extend_stream(impl_->pair_a, impl_->stream_a, static_cast<std::uint64_t>(u) + 1) ||
            !impl_->extend_stream(impl_->pair_b, impl_->stream_b, static_cast<std::uint64_t>(v) + 1)) {
            return false; // cannot happen: merge bounds match stream totals
        }
        out[0] = impl_->stream_a[u][0];
        out[1] = impl_->stream_a[u][1];
        out[2] = impl_->stream_b[v][0];
        out[3] = impl_->stream_b[v][1];
        return true;
    }
    case Impl::Mode::exact:
        return impl_->exact.next(out);
    }
    return false;
}

BinSequence dijkstra_order(const std::vector<std::vector<float>>& dist_lists,
                           std::size_t max_bins) {
    BinSequence seq;
    seq.parts = static_cast<std::uint32_t>(dist_lists.size());
    if (seq.parts == 0) {
        return seq;
    }
    DijkstraCursor cursor;
    cursor.init(dist_lists);
    std::vector<std::uint32_t> tuple(seq.parts);
    while (seq.size() < max_bins && cursor.next(tuple.data())) {
        seq.ranks.insert(seq.ranks.end(), tuple.begin(), tuple.end());
    }
    return seq;
}

BinSequence heuristic_order(const std::vector<std::vector<float>>& dist_lists,
                            const std::vector<OrderTable>& tables, std::size_t max_bins) {
    BinSequence seq;
    seq.parts = static_cast<std::uint32_t>(dist_lists.size());
    if (seq.parts == 0) {
        return seq;
    }
    BinStream stream(dist_lists, tables);
    std::vector<std::uint32_t> tuple(seq.parts);
    while (seq.size() < max_bins && stream.next(tuple.data())) {
        seq.ranks.insert(seq.ranks.end(), tuple.begin(), tuple.end());
    }
    return seq;
}

} // namespace pqt

#include "pqt/pqtree.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "pqt/distance.hpp"
#include "pqt/parallel.hpp"

namespace pqt {

std::uint64_t global_code(const BinCode& code, const PqtConfig& cfg) {
    const std::uint64_t base = static_cast<std::uint64_t>(cfg.k1) * cfg.k2;
    std::uint64_t acc = 0;
    std::uint64_t mult = 1;
    for (std::size_t p = 0; p < code.parts.size(); ++p) {
        acc += flat_part_code(code, p, cfg) * mult; // unsigned wraparound intended
        mult *= base;
    }
    return acc;
}

std::uint64_t encode_slot(const BinCode& code, const PqtConfig& cfg, std::uint64_t hash_size) {
    return global_code(code, cfg) % hash_size;
}

BinCode assign_bin(const TreeCodebooks& tree, const float* x) {
    BinCode code;
    code.parts.resize(tree.parts());
    const std::uint32_t m = tree.level1[0].part_dim;
    for (std::uint32_t p = 0; p < tree.parts(); ++p) {
        const float* xp = x + static_cast<std::size_t>(p) * m;
        std::uint32_t i1 = nearest_centroid(tree.level1[p], xp).first;
        std::uint32_t i2 = nearest_centroid(tree.level2[p][i1], xp).first;
        code.parts[p] = {i1, i2};
    }
    return code;
}

InvertedLists build_inverted_lists_from_slots(const std::vector<std::uint64_t>& slots,
                                              std::uint64_t hash_size) {
    InvertedLists lists;
    lists.offsets.assign(hash_size + 1, 0);
    for (std::uint64_t s : slots) {
        ++lists.offsets[s + 1];
    }
    for (std::uint64_t i = 1; i <= hash_size; ++i) {
        lists.offsets[i] += lists.offsets[i - 1];
    }
    lists.ids.resize(slots.size());
    std::vector<std::uint64_t> cursor(lists.offsets.begin(), lists.offsets.end() - 1);
    // Scatter in ascending id order so each slot's ids come out sorted.
    for (std::size_t id = 0; id < slots.size(); ++id) {
        lists.ids[cursor[slots[id]]++] = static_cast<std::uint32_t>(id);
    }
    return lists;
}

InvertedLists build_inverted_lists(const TreeCodebooks& tree, const VectorSet& db,
                                   const PqtConfig& cfg, int threads) {
    if (db.count() > 0 && db.dim != cfg.dim) {
        throw std::invalid_argument("build_inverted_lists: dimension mismatch");
    }
    const std::uint64_t hash_size = cfg.resolved_hash_size(db.count());
    std::vector<std::uint64_t> slots(db.count());
    parallel_for(db.count(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            slots[i] = encode_slot(assign_bin(tree, db.row(i)), cfg, hash_size);
        }
    });
    return build_inverted_lists_from_slots(slots, hash_size);
}

TraversalLists traverse(const TreeCodebooks& tree, const FineCentroids& fine, const float* y,
                        const PqtConfig& cfg) {
    TraversalLists out;
    const std::uint32_t parts = cfg.p_tree;
    const std::uint32_t per_part = cfg.fine_per_part();
    const std::uint32_t fdim = fine.fine_dim;
    out.level1.resize(parts);
    out.level2.resize(parts);
    out.fine_dists.resize(static_cast<std::size_t>(cfg.p_line) * cfg.k1);

    for (std::uint32_t p = 0; p < parts; ++p) {
        auto& l1 = out.level1[p];
        l1.resize(cfg.k1);
        for (std::uint32_t i = 0; i < cfg.k1; ++i) {
            // Fine-part partials first; the part distance is their sum, so
            // the aggregation identity holds by construction.
            float total = 0.0f;
            for (std::uint32_t f = p * per_part; f < (p + 1) * per_part; ++f) {
                float d = l2_sq(y + static_cast<std::size_t>(f) * fdim, fine.slice(f, i), fdim);
                out.fine_dists[static_cast<std::size_t>(f) * cfg.k1 + i] = d;
                total += d;
            }
            l1[i] = {i, total};
        }
        std::sort(l1.begin(), l1.end(), [](const auto& a, const auto& b) {
            return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
        });

        auto& l2 = out.level2[p];
        l2.reserve(static_cast<std::size_t>(cfg.w) * cfg.k2);
        const float* yp = y + static_cast<std::size_t>(p) * cfg.part_dim();
        for (std::uint32_t r = 0; r < cfg.w; ++r) {
            std::uint32_t parent = l1[r].id;
            const Codebook& book = tree.level2[p][parent];
            for (std::uint32_t c = 0; c < cfg.k2; ++c) {
                l2.push_back({parent, c, l2_sq(yp, book.row(c), cfg.part_dim())});
            }
        }
        std::sort(l2.begin(), l2.end(), [](const auto& a, const auto& b) {
            if (a.dist != b.dist) {
                return a.dist < b.dist;
            }
            return a.parent != b.parent ? a.parent < b.parent : a.child < b.child;
        });
    }
    return out;
}

} // namespace pqt

#include "pqt/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "pqt/distance.hpp"
#include "pqt/parallel.hpp"

namespace pqt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point from, Clock::time_point to) {
    return std::chrono::duration<double, std::micro>(to - from).count();
}

void warn_missing_database() {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
        std::fprintf(stderr,
                     "pqt: rerank_exact > 0 but no raw vectors attached; "
                     "exact re-ranking disabled\n");
    }
}

struct Candidate {
    float dist;
    std::uint32_t id;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
}

} // namespace

void PqtIndex::attach_database(std::shared_ptr<const VectorSet> db) {
    if (db && (db->count() != size() || db->dim != config.dim)) {
        throw std::invalid_argument("attach_database: vector set does not match index");
    }
    database = std::move(db);
}

IndexBuilder::IndexBuilder(const VectorSet& train, PqtConfig config, int threads, bool keep_raw)
    : config_(config), threads_(threads), keep_raw_(keep_raw) {
    config_.validate();
    tree_ = train_tree(train, config_, threads_);
    fine_ = build_fine_centroids(tree_, config_.p_line);
    pair_table_ = build_pair_table(fine_);
    codes_.p_line = config_.p_line;
    raw_.dim = config_.dim;
    raw_.kind = train.kind;
}

void IndexBuilder::add(const VectorSet& chunk) {
    if (finalized_) {
        throw std::logic_error("IndexBuilder: add after finalize");
    }
    if (chunk.count() == 0) {
        return;
    }
    if (chunk.dim != config_.dim) {
        throw std::invalid_argument("IndexBuilder: chunk dimension mismatch");
    }
    const std::size_t base = slots_.size();
    const std::size_t n = chunk.count();
    slots_.resize(base + n);
    codes_.lambda_q.resize((base + n) * config_.p_line);
    codes_.pair_id.resize((base + n) * config_.p_line);
    parallel_for(n, threads_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            // Hashing happens at finalize once the total count (and with it
            // an auto hash size) is known; waves store the global code.
            slots_[base + i] = global_code(assign_bin(tree_, chunk.row(i)), config_);
            encode_line(fine_, pair_table_, chunk.row(i),
                        codes_.lambda_q.data() + (base + i) * config_.p_line,
                        codes_.pair_id.data() + (base + i) * config_.p_line);
        }
    });
    if (keep_raw_) {
        raw_.data.insert(raw_.data.end(), chunk.data.begin(), chunk.data.end());
    }
}

PqtIndex IndexBuilder::finalize() {
    if (finalized_) {
        throw std::logic_error("IndexBuilder: finalize called twice");
    }
    finalized_ = true;

    const std::uint64_t hash_size = config_.resolved_hash_size(slots_.size());
    for (auto& s : slots_) {
        s %= hash_size;
    }

    PqtIndex index;
    index.config = config_;
    index.config.hash_size = hash_size;
    index.tree = std::move(tree_);
    index.fine = std::move(fine_);
    index.pair_table = std::move(pair_table_);
    index.tables = build_slope_tables(kDefaultOrderTableLen);
    index.lists = build_inverted_lists_from_slots(slots_, hash_size);
    index.codes = std::move(codes_);
    if (keep_raw_) {
        index.database = std::make_shared<VectorSet>(std::move(raw_));
    }
    return index;
}

PqtIndex build_index(const VectorSet& db, const VectorSet& train, const PqtConfig& config,
                     int threads) {
    IndexBuilder builder(train, config, threads);
    builder.add(db);
    return builder.finalize();
}

QueryResult knn_query(const PqtIndex& index, const float* y, std::uint32_t k) {
    QueryResult result;
    const PqtConfig& cfg = index.config;
    const std::size_t n = index.size();
    if (k == 0 || n == 0) {
        return result;
    }

    auto t0 = Clock::now();
    TraversalLists tl = traverse(index.tree, index.fine, y, cfg);
    auto t1 = Clock::now();
    result.stats.traversal_us = elapsed_us(t0, t1);

    std::vector<std::vector<float>> dist_lists(cfg.p_tree);
    for (std::uint32_t p = 0; p < cfg.p_tree; ++p) {
        dist_lists[p].reserve(tl.level2[p].size());
        for (const auto& e : tl.level2[p]) {
            dist_lists[p].push_back(e.dist);
        }
    }

    const std::uint64_t hash_size = index.lists.slots();
    const std::size_t budget = std::min<std::size_t>(cfg.candidate_budget, n);
    const std::uint32_t parts = cfg.p_tree;
    // Resorting is defined over the whole proposed window, so pull one
    // budget-sized batch in that mode; otherwise batch size only amortizes
    // the stream calls and does not change the emitted order.
    const std::size_t batch_tuples = cfg.resort_bins ? std::max<std::size_t>(budget, 1) : 1024;

    BinStream stream(dist_lists, index.tables);
    std::vector<std::uint32_t> batch;
    std::vector<std::uint32_t> tuple(parts);
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> candidates;
    candidates.reserve(budget);
    std::unordered_set<std::uint64_t> seen_slots;
    BinCode code;
    code.parts.resize(parts);
    bool stream_done = false;

    while (!stream_done && candidates.size() < budget) {
        auto tb = Clock::now();
        batch.clear();
        while (batch.size() < batch_tuples * parts) {
            if (!stream.next(tuple.data())) {
                stream_done = true;
                break;
            }
            batch.insert(batch.end(), tuple.begin(), tuple.end());
        }
        const std::size_t count = batch.size() / parts;
        order.resize(count);
        std::iota(order.begin(), order.end(), 0u);
        if (cfg.resort_bins) {
            std::vector<float> agg(count);
            for (std::size_t b = 0; b < count; ++b) {
                float s = 0.0f;
                for (std::uint32_t p = 0; p < parts; ++p) {
                    s += dist_lists[p][batch[b * parts + p]];
                }
                agg[b] = s;
            }
            std::stable_sort(order.begin(), order.end(),
                             [&](std::uint32_t a, std::uint32_t b) { return agg[a] < agg[b]; });
        }
        auto tg = Clock::now();
        result.stats.bin_selection_us += elapsed_us(tb, tg);

        for (std::uint32_t b : order) {
            for (std::uint32_t p = 0; p < parts; ++p) {
                const auto& e = tl.level2[p][batch[b * parts + p]];
                code.parts[p] = {e.parent, e.child};
            }
            std::uint64_t slot = encode_slot(code, cfg, hash_size);
            if (!seen_slots.insert(slot).second) {
                continue; // hash collision between proposed bins
            }
            std::uint64_t lo = index.lists.offsets[slot];
            std::uint64_t hi = index.lists.offsets[slot + 1];
            if (lo == hi) {
                continue;
            }
            ++result.stats.bins_visited;
            for (std::uint64_t i = lo; i < hi && candidates.size() < budget; ++i) {
                candidates.push_back(index.lists.ids[i]);
            }
            if (candidates.size() >= budget) {
                break;
            }
        }
        result.stats.vector_proposal_us += elapsed_us(tg, Clock::now());
    }
    result.stats.candidates = candidates.size();

    auto t3 = Clock::now();
    std::vector<Candidate> ranked(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::uint32_t id = candidates[i];
        ranked[i] = {line_distance(index.codes.lambda_row(id), index.codes.pair_row(id),
                                   tl.fine_dists.data(), index.pair_table),
                     id};
    }

    std::size_t rerank = 0;
    if (cfg.rerank_exact > 0) {
        if (index.database) {
            // At least k so the returned list is exact-sorted throughout.
            rerank = std::min<std::size_t>(std::max<std::uint32_t>(cfg.rerank_exact, k),
                                           ranked.size());
        } else {
            warn_missing_database();
        }
    }
    const std::size_t top = std::min<std::size_t>(ranked.size(), std::max<std::size_t>(k, rerank));
    std::partial_sort(ranked.begin(), ranked.begin() + top, ranked.end(), candidate_less);

    if (rerank > 0) {
        const VectorSet& db = *index.database;
        for (std::size_t i = 0; i < rerank; ++i) {
            ranked[i].dist = l2_sq(db.row(ranked[i].id), y, cfg.dim);
        }
        result.stats.exact_evals = rerank;
        std::sort(ranked.begin(), ranked.begin() + rerank, candidate_less);
    }

    const std::size_t out = std::min<std::size_t>(k, ranked.size());
    result.ids.resize(out);
    result.dists.resize(out);
    for (std::size_t i = 0; i < out; ++i) {
        result.ids[i] = ranked[i].id;
        result.dists[i] = ranked[i].dist;
    }
    result.stats.rerank_us = elapsed_us(t3, Clock::now());
    return result;
}

std::vector<QueryResult> knn_query_batch(const PqtIndex& index, const VectorSet& queries,
                                         std::uint32_t k, int threads) {
    if (queries.count() > 0 && queries.dim != index.config.dim) {
        throw std::invalid_argument("knn_query_batch: query dimension mismatch");
    }
    std::vector<QueryResult> results(queries.count());
    parallel_for(queries.count(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            results[q] = knn_query(index, queries.row(q), k);
        }
    });
    return results;
}

QueryResult brute_force_knn(const VectorSet& db, const float* y, std::uint32_t k) {
    QueryResult result;
    const std::size_t n = db.count();
    const std::size_t out = std::min<std::size_t>(k, n);
    if (out == 0) {
        return result;
    }
    auto t0 = Clock::now();
    std::vector<Candidate> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = {l2_sq(db.row(i), y, db.dim), static_cast<std::uint32_t>(i)};
    }
    std::partial_sort(all.begin(), all.begin() + out, all.end(), candidate_less);
    result.ids.resize(out);
    result.dists.resize(out);
    for (std::size_t i = 0; i < out; ++i) {
        result.ids[i] = all[i].id;
        result.dists[i] = all[i].dist;
    }
    result.stats.candidates = n;
    result.stats.exact_evals = n;
    result.stats.rerank_us = elapsed_us(t0, Clock::now());
    return result;
}

} // namespace pqt

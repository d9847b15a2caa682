#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pqt/binorder.hpp"
#include "pqt/codebook.hpp"
#include "pqt/linequant.hpp"
#include "pqt/pqtree.hpp"
#include "pqt/vecio.hpp"

namespace pqt {

struct QueryStats {
    std::uint64_t bins_visited = 0;
    std::uint64_t candidates = 0;
    std::uint64_t exact_evals = 0;
    double traversal_us = 0.0;
    double bin_selection_us = 0.0;
    double vector_proposal_us = 0.0;
    double rerank_us = 0.0;
};

struct QueryResult {
    std::vector<std::uint32_t> ids;
    std::vector<float> dists; // squared, non-decreasing
    QueryStats stats;
};

/// Fully built index. The raw database is held only for exact re-ranking
/// and is not part of the serialized container; re-attach after loading
/// when rerank_exact > 0 is wanted.
struct PqtIndex {
    PqtConfig config; // hash_size resolved to the actual slot count
    TreeCodebooks tree;
    FineCentroids fine;
    PairDistanceTable pair_table;
    std::vector<OrderTable> tables;
    InvertedLists lists;
    LineCodes codes;
    std::shared_ptr<const VectorSet> database; // optional

    std::size_t size() const { return lists.ids.size(); }

    void attach_database(std::shared_ptr<const VectorSet> db);
};

/// Incremental construction: codebooks are trained once from the training
/// set, then database vectors are ingested in waves; the result is
/// identical to a one-shot build over the concatenated waves.
class IndexBuilder {
public:
    IndexBuilder(const VectorSet& train, PqtConfig config, int threads = 0,
                 bool keep_raw = true);

    void add(const VectorSet& chunk);
    PqtIndex finalize();

private:
    PqtConfig config_;
    int threads_;
    bool keep_raw_;
    TreeCodebooks tree_;
    FineCentroids fine_;
    PairDistanceTable pair_table_;
    std::vector<std::uint64_t> slots_;
    LineCodes codes_;
    VectorSet raw_;
    bool finalized_ = false;
};

PqtIndex build_index(const VectorSet& db, const VectorSet& train,
                     const PqtConfig& config, int threads = 0);

/// Four-stage query: traversal, bin proposal, vector proposal by slot
/// gathering up to the candidate budget, line-quantized ranking, then
/// optional exact re-ranking of the best candidates. Pure with respect
/// to the index; safe to run concurrently.
QueryResult knn_query(const PqtIndex& index, const float* y, std::uint32_t k);

std::vector<QueryResult> knn_query_batch(const PqtIndex& index, const VectorSet& queries,
                                         std::uint32_t k, int threads = 0);

/// Exact squared-Euclidean top-k, ties by ascending id.
QueryResult brute_force_knn(const VectorSet& db, const float* y, std::uint32_t k);

} // namespace pqt

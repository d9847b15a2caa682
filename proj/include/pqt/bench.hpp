#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pqt/search.hpp"
#include "pqt/vecio.hpp"

namespace pqt {

/// Aggregated evaluation results. recall holds (R, fraction) pairs with R
/// ascending; stage means are wall-clock milliseconds per query.
struct RecallReport {
    std::vector<std::pair<std::uint32_t, double>> recall;
    double traversal_ms = 0.0;
    double bin_selection_ms = 0.0;
    double vector_proposal_ms = 0.0;
    double rerank_ms = 0.0;
    double total_ms = 0.0;
    std::uint64_t queries = 0;
    std::uint32_t k = 0;
    PqtConfig config;

    double recall_at(std::uint32_t r) const;
};

/// Fraction of queries whose true nearest neighbor (gt row head) appears
/// within the first R returned ids. Throws on mismatched counts.
double recall_fraction(const std::vector<QueryResult>& results, const GroundTruth& gt,
                       std::uint32_t r);

/// Exact top-depth ids per query via brute force.
GroundTruth make_ground_truth(const VectorSet& db, const VectorSet& queries,
                              std::uint32_t depth, int threads = 0);

/// n vectors from `blobs` isotropic Gaussians with means uniform in
/// [0, 255]^dim; deterministic per seed.
VectorSet synth_clustered(std::size_t n, std::uint32_t dim, std::uint32_t blobs,
                          float sigma, std::uint64_t seed);

/// Runs every query once for warmup and once measured, then aggregates
/// recall at R in {1, 10, 100} and per-stage timing means.
RecallReport run_benchmark(const PqtIndex& index, const VectorSet& queries,
                           const GroundTruth& gt, std::uint32_t k, int threads = 0);

/// Line-oriented key=value rendering of a report.
std::string format_report(const RecallReport& report);

/// JSON rendering (same content; schema documented in the README).
std::string report_json(const RecallReport& report);

} // namespace pqt

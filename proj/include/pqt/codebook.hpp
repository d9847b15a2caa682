#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pqt/vecio.hpp"

namespace pqt {

/// All hyperparameters of a product quantization tree index.
struct PqtConfig {
    std::uint32_t dim = 128;
    std::uint32_t p_tree = 2;  // tree parts P
    std::uint32_t k1 = 16;     // level-1 centroids per part
    std::uint32_t k2 = 8;      // level-2 centroids per level-1 cluster
    std::uint32_t w = 4;       // level-1 clusters refined per part
    std::uint32_t p_line = 32; // fine parts for line quantization
    std::uint64_t hash_size = 0;          // inverted-list slots H; 0 = auto
    std::uint32_t candidate_budget = 4096; // max vectors gathered per query
    std::uint32_t rerank_exact = 64;       // exact re-rank depth; 0 disables
    bool resort_bins = false;
    std::uint32_t train_iters = 25;
    std::uint64_t seed = 42;

    /// Throws std::invalid_argument on any violated constraint.
    void validate() const;

    std::uint32_t part_dim() const { return dim / p_tree; } // m
    std::uint32_t fine_dim() const { return dim / p_line; }
    std::uint32_t fine_per_part() const { return p_line / p_tree; }

    /// H actually used for n database vectors: hash_size if set, otherwise
    /// min(2^26, 4n) clamped to at least one slot.
    std::uint64_t resolved_hash_size(std::size_t n) const;
};

/// k centroids of a part subspace, row-major k x part_dim.
struct Codebook {
    std::uint32_t part_dim = 0;
    std::uint32_t k = 0;
    std::vector<float> centroids;

    const float* row(std::size_t i) const { return centroids.data() + i * part_dim; }
    float* row(std::size_t i) { return centroids.data() + i * part_dim; }
};

/// Two-level per-part codebooks: level1[p] has k1 centroids; level2[p][i]
/// has k2 centroids trained on the sub-vectors assigned to level-1
/// centroid i of part p.
struct TreeCodebooks {
    std::vector<Codebook> level1;              // p_tree entries
    std::vector<std::vector<Codebook>> level2; // p_tree x k1 entries

    std::uint32_t parts() const { return static_cast<std::uint32_t>(level1.size()); }
};

/// Nearest centroid by squared distance, ties broken by lowest index.
std::pair<std::uint32_t, float> nearest_centroid(const Codebook& book, const float* x);

/// Lloyd iterations with k-means++ seeding. Guarantees k live centroids
/// (empty clusters are re-seeded on the farthest point, duplicates get a
/// deterministic 1e-6 jitter after convergence) and never fails for k
/// larger than the number of distinct points.
Codebook train_kmeans(const float* points, std::size_t n, std::uint32_t dim,
                      std::uint32_t k, std::uint32_t iters, std::uint64_t seed,
                      int threads = 1);

/// Same as train_kmeans but also reports the within-cluster SSE measured
/// at the start of every iteration (non-increasing by construction).
struct KmeansResult {
    Codebook codebook;
    std::vector<double> sse_history;
};
KmeansResult train_kmeans_traced(const float* points, std::size_t n, std::uint32_t dim,
                                 std::uint32_t k, std::uint32_t iters, std::uint64_t seed,
                                 int threads = 1);

/// Trains the full two-level tree: level 1 per part on the part slices,
/// each level-2 codebook on exactly the sub-vectors assigned to its
/// parent. Parents with no training points get jittered copies of the
/// parent centroid.
TreeCodebooks train_tree(const VectorSet& train, const PqtConfig& config, int threads = 0);

} // namespace pqt

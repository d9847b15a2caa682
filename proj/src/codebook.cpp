#include "pqt/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "pqt/distance.hpp"
#include "pqt/parallel.hpp"

namespace pqt {

void PqtConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (dim == 0 || p_tree == 0 || p_line == 0) {
        fail("dim, p_tree and p_line must be positive");
    }
    if (dim % p_tree != 0) {
        fail("dim must be divisible by p_tree");
    }
    if (p_line % p_tree != 0) {
        fail("p_line must be a multiple of p_tree");
    }
    if (dim % p_line != 0) {
        fail("dim must be divisible by p_line");
    }
    if (k1 < 1 || k2 < 1) {
        fail("k1 and k2 must be at least 1");
    }
    if (w < 1 || w > k1) {
        fail("w must be in [1, k1]");
    }
}

std::uint64_t PqtConfig::resolved_hash_size(std::size_t n) const {
    if (hash_size > 0) {
        return hash_size;
    }
    std::uint64_t h = std::min<std::uint64_t>(1ULL << 26, 4 * static_cast<std::uint64_t>(n));
    return std::max<std::uint64_t>(1, h);
}

std::pair<std::uint32_t, float> nearest_centroid(const Codebook& book, const float* x) {
    std::uint32_t best = 0;
    float best_d = std::numeric_limits<float>::infinity();
    for (std::uint32_t i = 0; i < book.k; ++i) {
        float d = l2_sq(x, book.row(i), book.part_dim);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {best, best_d};
}

namespace {

// k-means++ seeding. All randomness comes from rng; distance bookkeeping
// in double so the discrete sampling is stable.
std::vector<float> seed_centroids(const float* points, std::size_t n, std::uint32_t dim,
                                  std::uint32_t k, std::mt19937_64& rng) {
    std::vector<float> centroids(static_cast<std::size_t>(k) * dim);
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t c0 = first(rng);
    std::copy(points + c0 * dim, points + (c0 + 1) * dim, centroids.begin());

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = l2_sq(points + i * dim, centroids.data(), dim);
    }
    std::vector<double> cum(n);
    for (std::uint32_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += d2[i];
            cum[i] = total;
        }
        std::size_t pick;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng);
            pick = static_cast<std::size_t>(
                std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
            pick = std::min(pick, n - 1);
        } else {
            // Every point coincides with a chosen centroid; duplicates are
            // resolved after training.
            pick = first(rng);
        }
        float* dst = centroids.data() + static_cast<std::size_t>(c) * dim;
        std::copy(points + pick * dim, points + (pick + 1) * dim, dst);
        for (std::size_t i = 0; i < n; ++i) {
            double d = l2_sq(points + i * dim, dst, dim);
            d2[i] = std::min(d2[i], d);
        }
    }
    return centroids;
}

// Separates exact-duplicate centroids with a deterministic jitter of
// magnitude 1e-6 per coordinate.
void separate_duplicates(std::vector<float>& centroids, std::uint32_t k, std::uint32_t dim,
                         std::mt19937_64& rng) {
    std::uniform_real_distribution<float> jitter(-1e-6f, 1e-6f);
    for (int pass = 0; pass < 8; ++pass) {
        bool any = false;
        for (std::uint32_t a = 0; a < k; ++a) {
            for (std::uint32_t b = a + 1; b < k; ++b) {
                float* ca = centroids.data() + static_cast<std::size_t>(a) * dim;
                float* cb = centroids.data() + static_cast<std::size_t>(b) * dim;
                if (std::equal(ca, ca + dim, cb)) {
                    for (std::uint32_t j = 0; j < dim; ++j) {
                        cb[j] += jitter(rng);
                    }
                    any = true;
                }
            }
        }
        if (!any) {
            return;
        }
    }
}

} // namespace

KmeansResult train_kmeans_traced(const float* points, std::size_t n, std::uint32_t dim,
                                 std::uint32_t k, std::uint32_t iters, std::uint64_t seed,
                                 int threads) {
    if (n == 0) {
        throw std::invalid_argument("train_kmeans: empty point set");
    }
    if (k == 0) {
        throw std::invalid_argument("train_kmeans: k must be positive");
    }
    std::mt19937_64 rng(seed);
    std::vector<float> centroids = seed_centroids(points, n, dim, k, rng);

    std::vector<std::uint32_t> assign(n);
    std::vector<std::uint32_t> prev_assign(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<float> best_d2(n);
    std::vector<double> sums(static_cast<std::size_t>(k) * dim);
    std::vector<std::size_t> counts(k);
    std::vector<double> sse_history;
    sse_history.reserve(iters);

    for (std::uint32_t it = 0; it < iters; ++it) {
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const float* x = points + i * dim;
                std::uint32_t best = 0;
                float bd = std::numeric_limits<float>::infinity();
                for (std::uint32_t c = 0; c < k; ++c) {
                    float d = l2_sq(x, centroids.data() + static_cast<std::size_t>(c) * dim, dim);
                    if (d < bd) {
                        bd = d;
                        best = c;
                    }
                }
                assign[i] = best;
                best_d2[i] = bd;
            }
        });

        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sse += best_d2[i];
        }
        sse_history.push_back(sse);

        if (assign == prev_assign) {
            break;
        }
        prev_assign = assign;

        // Mean update with a fixed (point-order) summation so the result
        // is identical for every thread count.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const float* x = points + i * dim;
            double* s = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
            for (std::uint32_t j = 0; j < dim; ++j) {
                s[j] += x[j];
            }
            ++counts[assign[i]];
        }
        std::vector<bool> used(n, false);
        for (std::uint32_t c = 0; c < k; ++c) {
            float* dst = centroids.data() + static_cast<std::size_t>(c) * dim;
            if (counts[c] > 0) {
                const double* s = sums.data() + static_cast<std::size_t>(c) * dim;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    dst[j] = static_cast<float>(s[j] / static_cast<double>(counts[c]));
                }
            } else {
                // Re-seed the dead centroid on the farthest point, LBG style.
                std::size_t far = 0;
                float far_d = -1.0f;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!used[i] && best_d2[i] > far_d) {
                        far_d = best_d2[i];
                        far = i;
                    }
                }
                used[far] = true;
                std::copy(points + far * dim, points + (far + 1) * dim, dst);
            }
        }
    }

    separate_duplicates(centroids, k, dim, rng);

    KmeansResult result;
    result.codebook.part_dim = dim;
    result.codebook.k = k;
    result.codebook.centroids = std::move(centroids);
    result.sse_history = std::move(sse_history);
    return result;
}

Codebook train_kmeans(const float* points, std::size_t n, std::uint32_t dim, std::uint32_t k,
                      std::uint32_t iters, std::uint64_t seed, int threads) {
    return train_kmeans_traced(points, n, dim, k, iters, seed, threads).codebook;
}

TreeCodebooks train_tree(const VectorSet& train, const PqtConfig& config, int threads) {
    config.validate();
    if (train.count() == 0) {
        throw std::invalid_argument("train_tree: empty training set");
    }
    if (train.dim != config.dim) {
        throw std::invalid_argument("train_tree: training dimension " +
                                    std::to_string(train.dim) + " does not match config dim " +
                                    std::to_string(config.dim));
    }
    const std::size_t n = train.count();
    const std::uint32_t m = config.part_dim();

    TreeCodebooks tree;
    tree.level1.resize(config.p_tree);
    tree.level2.resize(config.p_tree);

    std::vector<float> slice(n * m);
    std::vector<std::uint32_t> parent(n);
    std::mt19937_64 jitter_rng(mix_seed(config.seed, 0x6a69, 0));
    std::uniform_real_distribution<float> jitter(-1e-6f, 1e-6f);

    for (std::uint32_t p = 0; p < config.p_tree; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
            const float* src = train.row(i) + static_cast<std::size_t>(p) * m;
            std::copy(src, src + m, slice.data() + i * m);
        }
        tree.level1[p] = train_kmeans(slice.data(), n, m, config.k1, config.train_iters,
                                      mix_seed(config.seed, p, 0), threads);

        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                parent[i] = nearest_centroid(tree.level1[p], slice.data() + i * m).first;
            }
        });

        std::vector<std::vector<std::size_t>> members(config.k1);
        for (std::size_t i = 0; i < n; ++i) {
            members[parent[i]].push_back(i);
        }

        tree.level2[p].resize(config.k1);
        std::vector<float> subset;
        for (std::uint32_t c = 0; c < config.k1; ++c) {
            if (members[c].empty()) {
                // No training data under this parent: synthesize k2 jittered
                // copies of the parent centroid to keep addressing total.
                Codebook& book = tree.level2[p][c];
                book.part_dim = m;
                book.k = config.k2;
                book.centroids.resize(static_cast<std::size_t>(config.k2) * m);
                const float* parent_c = tree.level1[p].row(c);
                for (std::uint32_t j = 0; j < config.k2; ++j) {
                    float* dst = book.row(j);
                    for (std::uint32_t d = 0; d < m; ++d) {
                        dst[d] = parent_c[d] + jitter(jitter_rng);
                    }
                }
                continue;
            }
            subset.resize(members[c].size() * m);
            for (std::size_t i = 0; i < members[c].size(); ++i) {
                std::copy(slice.data() + members[c][i] * m, slice.data() + (members[c][i] + 1) * m,
                          subset.data() + i * m);
            }
            tree.level2[p][c] = train_kmeans(subset.data(), members[c].size(), m, config.k2,
                                             config.train_iters,
                                             mix_seed(config.seed, p, c + 1), threads);
        }
    }
    return tree;
}

} // namespace pqt

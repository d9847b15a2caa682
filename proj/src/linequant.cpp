#include "pqt/linequant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pqt/distance.hpp"
#include "pqt/parallel.hpp"

namespace pqt {

FineCentroids build_fine_centroids(const TreeCodebooks& tree, std::uint32_t p_line) {
    if (tree.level1.empty()) {
        throw std::invalid_argument("build_fine_centroids: empty tree");
    }
    const std::uint32_t parts = tree.parts();
    const std::uint32_t m = tree.level1[0].part_dim;
    const std::uint32_t k1 = tree.level1[0].k;
    if (p_line % parts != 0 || m % (p_line / parts) != 0) {
        throw std::invalid_argument("build_fine_centroids: p_line incompatible with tree");
    }
    const std::uint32_t per_part = p_line / parts;
    const std::uint32_t fine_dim = m / per_part;

    FineCentroids fine;
    fine.p_line = p_line;
    fine.k1 = k1;
    fine.fine_dim = fine_dim;
    fine.slices.resize(static_cast<std::size_t>(p_line) * k1 * fine_dim);
    fine.sqnorm.resize(static_cast<std::size_t>(p_line) * k1);

    for (std::uint32_t f = 0; f < p_line; ++f) {
        std::uint32_t p = f / per_part;
        std::uint32_t within = f % per_part;
        for (std::uint32_t i = 0; i < k1; ++i) {
            const float* src = tree.level1[p].row(i) + static_cast<std::size_t>(within) * fine_dim;
            float* dst = fine.slices.data() + (static_cast<std::size_t>(f) * k1 + i) * fine_dim;
            std::copy(src, src + fine_dim, dst);
            fine.sqnorm[static_cast<std::size_t>(f) * k1 + i] = dot(dst, dst, fine_dim);
        }
    }
    return fine;
}

std::array<std::uint16_t, 2> decode_pair(std::uint32_t pair_id, std::uint32_t k1) {
    if (k1 <= 1) {
        return {0, 0};
    }
    std::uint32_t i = 0;
    while (pair_id >= k1 - i - 1) {
        pair_id -= k1 - i - 1;
        ++i;
    }
    return {static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(i + 1 + pair_id)};
}

PairDistanceTable build_pair_table(const FineCentroids& fine) {
    PairDistanceTable table;
    table.p_line = fine.p_line;
    table.k1 = fine.k1;
    table.d2.assign(static_cast<std::size_t>(fine.p_line) * fine.k1 * fine.k1, 0.0f);
    for (std::uint32_t f = 0; f < fine.p_line; ++f) {
        for (std::uint32_t i = 0; i < fine.k1; ++i) {
            for (std::uint32_t j = i + 1; j < fine.k1; ++j) {
                float d = l2_sq(fine.slice(f, i), fine.slice(f, j), fine.fine_dim);
                table.d2[(static_cast<std::size_t>(f) * fine.k1 + i) * fine.k1 + j] = d;
                table.d2[(static_cast<std::size_t>(f) * fine.k1 + j) * fine.k1 + i] = d;
            }
        }
    }
    if (fine.k1 == 1) {
        table.pairs.push_back({0, 0}); // degenerate single-centroid "pair"
    } else {
        for (std::uint16_t i = 0; i < fine.k1; ++i) {
            for (std::uint16_t j = i + 1; j < fine.k1; ++j) {
                table.pairs.push_back({i, j});
            }
        }
    }
    return table;
}

void encode_line(const FineCentroids& fine, const PairDistanceTable& table, const float* x,
                 std::uint8_t* lambda_out, std::uint16_t* pair_out) {
    const std::uint32_t k1 = fine.k1;
    std::vector<float> t(k1); // dot(x_f, c_i) per centroid

    for (std::uint32_t f = 0; f < fine.p_line; ++f) {
        const float* xf = x + static_cast<std::size_t>(f) * fine.fine_dim;
        float xsq = dot(xf, xf, fine.fine_dim);
        for (std::uint32_t i = 0; i < k1; ++i) {
            t[i] = dot(xf, fine.slice(f, i), fine.fine_dim);
        }

        if (k1 == 1) {
            lambda_out[f] = 0;
            pair_out[f] = 0;
            continue;
        }

        float best_res = std::numeric_limits<float>::infinity();
        std::uint32_t best_pair = 0;
        float best_lambda = 0.0f;
        bool found = false;
        std::uint32_t pid = 0;
        for (std::uint32_t i = 0; i < k1; ++i) {
            float si = fine.slice_sqnorm(f, i);
            float ei = xsq - 2.0f * t[i] + si; // |x_f - c_i|^2
            for (std::uint32_t j = i + 1; j < k1; ++j, ++pid) {
                float c2 = table.at(f, i, j);
                if (c2 <= 0.0f) {
                    continue; // coincident endpoints span no line
                }
                float sj = fine.slice_sqnorm(f, j);
                // dot(x_f - c_i, c_j - c_i) from the cached dot products
                float proj = t[j] - t[i] + 0.5f * (si - sj + c2);
                float lambda = std::clamp(proj / c2, 0.0f, 1.0f);
                float res = ei - 2.0f * lambda * proj + lambda * lambda * c2;
                if (res < best_res) {
                    best_res = res;
                    best_pair = pid;
                    best_lambda = lambda;
                    found = true;
                }
            }
        }

        if (!found) {
            // Every pair degenerate: quantize to the nearest single centroid.
            std::uint32_t best_i = 0;
            float best_e = std::numeric_limits<float>::infinity();
            for (std::uint32_t i = 0; i < k1; ++i) {
                float e = xsq - 2.0f * t[i] + fine.slice_sqnorm(f, i);
                if (e < best_e) {
                    best_e = e;
                    best_i = i;
                }
            }
            if (best_i + 1 < k1) {
                best_pair = table.pair_index(best_i, best_i + 1);
                best_lambda = 0.0f;
            } else {
                best_pair = table.pair_index(best_i - 1, best_i);
                best_lambda = 1.0f;
            }
        }

        lambda_out[f] = static_cast<std::uint8_t>(std::lround(255.0f * best_lambda));
        pair_out[f] = static_cast<std::uint16_t>(best_pair);
    }
}

LineCodes encode_database(const FineCentroids& fine, const PairDistanceTable& table,
                          const VectorSet& db, int threads) {
    LineCodes codes;
    codes.p_line = fine.p_line;
    codes.lambda_q.resize(db.count() * fine.p_line);
    codes.pair_id.resize(db.count() * fine.p_line);
    parallel_for(db.count(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            encode_line(fine, table, db.row(v), codes.lambda_q.data() + v * fine.p_line,
                        codes.pair_id.data() + v * fine.p_line);
        }
    });
    return codes;
}

float line_distance(const std::uint8_t* lambda_q, const std::uint16_t* pair_id,
                    const float* fine_dists, const PairDistanceTable& table) {
    float total = 0.0f;
    const std::uint32_t k1 = table.k1;
    for (std::uint32_t f = 0; f < table.p_line; ++f) {
        const auto& pr = table.pairs[pair_id[f]];
        float lambda = static_cast<float>(lambda_q[f]) * (1.0f / 255.0f);
        float b2 = fine_dists[f * k1 + pr[0]];
        float a2 = fine_dists[f * k1 + pr[1]];
        float c2 = table.at(f, pr[0], pr[1]);
        total += line_part_distance(b2, a2, c2, lambda);
    }
    return total;
}

DistortionStats distortion_stats(const VectorSet& db, const LineCodes& codes,
                                 const FineCentroids& fine, int threads) {
    const std::size_t n = db.count();
    if (codes.count() != n) {
        throw std::invalid_argument("distortion_stats: codes do not match database");
    }
    DistortionStats stats;
    if (n == 0) {
        return stats;
    }
    std::vector<double> residual(n);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            const float* x = db.row(v);
            const std::uint16_t* pairs = codes.pair_row(v);
            double total = 0.0;
            for (std::uint32_t f = 0; f < fine.p_line; ++f) {
                const float* xf = x + static_cast<std::size_t>(f) * fine.fine_dim;
                auto [i, j] = decode_pair(pairs[f], fine.k1);
                const float* ci = fine.slice(f, i);
                const float* cj = fine.slice(f, j);
                float c2 = l2_sq(ci, cj, fine.fine_dim);
                float lambda = 0.0f;
                if (c2 > 0.0f) {
                    float num = 0.0f;
                    for (std::uint32_t d = 0; d < fine.fine_dim; ++d) {
                        num += (xf[d] - ci[d]) * (cj[d] - ci[d]);
                    }
                    lambda = std::clamp(num / c2, 0.0f, 1.0f);
                }
                float res = 0.0f;
                for (std::uint32_t d = 0; d < fine.fine_dim; ++d) {
                    float pd = (1.0f - lambda) * ci[d] + lambda * cj[d];
                    float diff = xf[d] - pd;
                    res += diff * diff;
                }
                total += res;
            }
            residual[v] = total;
        }
    });
    stats.min = residual[0];
    stats.max = residual[0];
    double sum = 0.0;
    for (double r : residual) {
        stats.min = std::min(stats.min, r);
        stats.max = std::max(stats.max, r);
        sum += r;
    }
    stats.mean = sum / static_cast<double>(n);
    return stats;
}

} // namespace pqt

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pqt/codebook.hpp"

namespace pqt {

/// Fine-part slices of the level-1 centroids. Fine part f covers query
/// dimensions [f*fine_dim, (f+1)*fine_dim) and belongs to tree part
/// f / (p_line / p_tree); its k1 slices concatenate back to that part's
/// level-1 centroids.
struct FineCentroids {
    std::uint32_t p_line = 0;
    std::uint32_t k1 = 0;
    std::uint32_t fine_dim = 0;
    std::vector<float> slices; // p_line * k1 * fine_dim
    std::vector<float> sqnorm; // p_line * k1, |c|^2 per slice

    const float* slice(std::size_t f, std::size_t i) const {
        return slices.data() + (f * k1 + i) * fine_dim;
    }
    float slice_sqnorm(std::size_t f, std::size_t i) const {
        return sqnorm[f * k1 + i];
    }
};

FineCentroids build_fine_centroids(const TreeCodebooks& tree, std::uint32_t p_line);

/// Per fine part the symmetric k1 x k1 matrix of squared distances between
/// centroid slices, plus the enumeration of unordered pairs (i < j) that
/// line codes index into. For k1 == 1 the single "pair" degenerates to
/// (0, 0) and every lambda is zero.
struct PairDistanceTable {
    std::uint32_t p_line = 0;
    std::uint32_t k1 = 0;
    std::vector<float> d2;                        // p_line * k1 * k1
    std::vector<std::array<std::uint16_t, 2>> pairs; // lexicographic (i, j), i < j

    float at(std::size_t f, std::size_t i, std::size_t j) const {
        return d2[(f * k1 + i) * k1 + j];
    }
    std::uint32_t pair_count() const { return static_cast<std::uint32_t>(pairs.size()); }

    /// Index of unordered pair (i, j), i < j: i*k1 - i(i+1)/2 + (j-i-1).
    std::uint32_t pair_index(std::uint32_t i, std::uint32_t j) const {
        return i * k1 - i * (i + 1) / 2 + (j - i - 1);
    }
};

/// Inverse of the lexicographic pair enumeration; (0, 0) when k1 == 1.
std::array<std::uint16_t, 2> decode_pair(std::uint32_t pair_id, std::uint32_t k1);

PairDistanceTable build_pair_table(const FineCentroids& fine);

/// Per-vector line codes, flat n * p_line records of (quantized lambda,
/// pair id). Decoded lambda is lambda_q / 255.
struct LineCodes {
    std::uint32_t p_line = 0;
    std::vector<std::uint8_t> lambda_q;
    std::vector<std::uint16_t> pair_id;

    std::size_t count() const { return p_line == 0 ? 0 : lambda_q.size() / p_line; }
    const std::uint8_t* lambda_row(std::size_t v) const { return lambda_q.data() + v * p_line; }
    const std::uint16_t* pair_row(std::size_t v) const { return pair_id.data() + v * p_line; }
};

/// Encodes one vector: per fine part picks the centroid pair whose segment
/// projection minimizes the residual (ties to the lexicographically
/// smallest pair) and quantizes the clamped lambda to a byte.
void encode_line(const FineCentroids& fine, const PairDistanceTable& table,
                 const float* x, std::uint8_t* lambda_out, std::uint16_t* pair_out);

LineCodes encode_database(const FineCentroids& fine, const PairDistanceTable& table,
                          const VectorSet& db, int threads = 0);

/// Triangulated squared distance contribution of one fine part:
/// b2 + lambda^2 * c2 + lambda * (a2 - b2 - c2), where b2 is the query
/// distance to the lambda=0 endpoint, a2 to the lambda=1 endpoint and c2
/// the squared endpoint separation.
inline float line_part_distance(float b2, float a2, float c2, float lambda) {
    return b2 + lambda * lambda * c2 + lambda * (a2 - b2 - c2);
}

/// Full approximate squared distance of a stored code against the
/// traversal's fine-part distance matrix (p_line x k1, row-major).
float line_distance(const std::uint8_t* lambda_q, const std::uint16_t* pair_id,
                    const float* fine_dists, const PairDistanceTable& table);

struct DistortionStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

/// Residual statistics of stored codes: per vector the summed squared
/// distance to its line projections, re-derived with continuous lambda so
/// the numbers measure the chosen lines, not the byte quantization.
DistortionStats distortion_stats(const VectorSet& db, const LineCodes& codes,
                                 const FineCentroids& fine, int threads = 0);

} // namespace pqt

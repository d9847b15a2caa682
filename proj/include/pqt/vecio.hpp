#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pqt {

/// Raised for malformed or incompatible on-disk data (truncated records,
/// inconsistent dimensions, bad index container headers).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

enum class ElemKind : std::uint8_t { f32 = 0, u8 = 1 };

/// Dense row-major collection of fixed-dimension vectors. bvecs data is
/// widened to float32 at read time; all arithmetic downstream is float32.
struct VectorSet {
    std::uint32_t dim = 0;
    ElemKind kind = ElemKind::f32;
    std::vector<float> data; // count() * dim, row-major

    std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }

    const float* row(std::size_t i) const { return data.data() + i * dim; }
    float* row(std::size_t i) { return data.data() + i * dim; }

    std::span<const float> row_span(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }
};

/// Per-query ordered lists of true nearest-neighbor ids (ivecs payload).
struct GroundTruth {
    std::uint32_t depth = 0;
    std::vector<std::int32_t> ids; // count() * depth, row-major

    std::size_t count() const { return depth == 0 ? 0 : ids.size() / depth; }

    std::span<const std::int32_t> row(std::size_t i) const {
        return {ids.data() + i * depth, depth};
    }
};

enum class VecKind { fvecs, bvecs, ivecs };

/// Guess the record kind from the file extension; throws on unknown ones.
VecKind kind_from_path(const std::string& path);

// TexMex record layout: per record a little-endian int32 dimension d
// followed by d payload elements (float32 / uint8 / int32).
VectorSet read_fvecs(const std::string& path, std::size_t limit = SIZE_MAX);
VectorSet read_bvecs(const std::string& path, std::size_t limit = SIZE_MAX);
GroundTruth read_ivecs(const std::string& path, std::size_t limit = SIZE_MAX);

void write_fvecs(const VectorSet& set, const std::string& path);
void write_bvecs(const VectorSet& set, const std::string& path);
void write_ivecs(const GroundTruth& gt, const std::string& path);

/// Reads fvecs or bvecs depending on `kind`.
VectorSet read_vectors(const std::string& path, VecKind kind, std::size_t limit = SIZE_MAX);

} // namespace pqt

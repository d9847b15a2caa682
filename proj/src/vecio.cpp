#include "pqt/vecio.hpp"

#include <cstring>
#include <fstream>
#include <limits>

namespace pqt {

namespace {

std::size_t elem_size(VecKind kind) {
    return kind == VecKind::bvecs ? 1 : 4;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path + " for reading");
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open " + path + " for writing");
    }
    return out;
}

// Reads records of [int32 d | d * elem] into `payload` (raw bytes),
// enforcing a consistent dimension. Returns the number of records read.
std::size_t read_records(const std::string& path, VecKind kind, std::size_t limit,
                         std::uint32_t& dim, std::vector<char>& payload) {
    std::ifstream in = open_input(path);
    std::size_t esize = elem_size(kind);
    std::size_t offset = 0;
    std::size_t count = 0;
    dim = 0;
    while (count < limit) {
        std::int32_t d = 0;
        in.read(reinterpret_cast<char*>(&d), 4);
        if (in.gcount() == 0 && in.eof()) {
            break; // clean end between records
        }
        if (in.gcount() != 4) {
            throw FormatError(path + ": truncated record header at byte offset " +
                              std::to_string(offset));
        }
        if (d <= 0) {
            throw FormatError(path + ": non-positive dimension " + std::to_string(d) +
                              " at byte offset " + std::to_string(offset));
        }
        if (count == 0) {
            dim = static_cast<std::uint32_t>(d);
        } else if (static_cast<std::uint32_t>(d) != dim) {
            throw FormatError(path + ": record " + std::to_string(count) + " has dimension " +
                              std::to_string(d) + ", expected " + std::to_string(dim) +
                              " (byte offset " + std::to_string(offset) + ")");
        }
        std::size_t bytes = static_cast<std::size_t>(d) * esize;
        std::size_t old = payload.size();
        payload.resize(old + bytes);
        in.read(payload.data() + old, static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in.gcount()) != bytes) {
            throw FormatError(path + ": truncated record payload at byte offset " +
                              std::to_string(offset + 4));
        }
        offset += 4 + bytes;
        ++count;
    }
    return count;
}

} // namespace

VecKind kind_from_path(const std::string& path) {
    auto ends_with = [&](const char* suffix) {
        std::size_t n = std::strlen(suffix);
        return path.size() >= n && path.compare(path.size() - n, n, suffix) == 0;
    };
    if (ends_with(".fvecs")) {
        return VecKind::fvecs;
    }
    if (ends_with(".bvecs")) {
        return VecKind::bvecs;
    }
    if (ends_with(".ivecs")) {
        return VecKind::ivecs;
    }
    throw FormatError(path + ": unknown vector file extension (expected .fvecs/.bvecs/.ivecs)");
}

VectorSet read_fvecs(const std::string& path, std::size_t limit) {
    std::vector<char> payload;
    std::uint32_t dim = 0;
    std::size_t count = read_records(path, VecKind::fvecs, limit, dim, payload);
    VectorSet set;
    set.dim = dim;
    set.kind = ElemKind::f32;
    set.data.resize(count * dim);
    std::memcpy(set.data.data(), payload.data(), payload.size());
    return set;
}

VectorSet read_bvecs(const std::string& path, std::size_t limit) {
    std::vector<char> payload;
    std::uint32_t dim = 0;
    std::size_t count = read_records(path, VecKind::bvecs, limit, dim, payload);
    VectorSet set;
    set.dim = dim;
    set.kind = ElemKind::u8;
    set.data.resize(count * dim);
    for (std::size_t i = 0; i < set.data.size(); ++i) {
        set.data[i] = static_cast<float>(static_cast<std::uint8_t>(payload[i]));
    }
    return set;
}

GroundTruth read_ivecs(const std::string& path, std::size_t limit) {
    std::vector<char> payload;
    std::uint32_t dim = 0;
    std::size_t count = read_records(path, VecKind::ivecs, limit, dim, payload);
    GroundTruth gt;
    gt.depth = dim;
    gt.ids.resize(count * dim);
    std::memcpy(gt.ids.data(), payload.data(), payload.size());
    return gt;
}

VectorSet read_vectors(const std::string& path, VecKind kind, std::size_t limit) {
    switch (kind) {
    case VecKind::fvecs:
        return read_fvecs(path, limit);
    case VecKind::bvecs:
        return read_bvecs(path, limit);
    default:
        throw FormatError(path + ": ivecs files hold ground truth, not vectors");
    }
}

void write_fvecs(const VectorSet& set, const std::string& path) {
    std::ofstream out = open_output(path);
    std::int32_t d = static_cast<std::int32_t>(set.dim);
    for (std::size_t i = 0; i < set.count(); ++i) {
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(set.row(i)),
                  static_cast<std::streamsize>(set.dim * sizeof(float)));
    }
    if (!out) {
        throw FormatError("write failed for " + path);
    }
}

void write_bvecs(const VectorSet& set, const std::string& path) {
    std::ofstream out = open_output(path);
    std::int32_t d = static_cast<std::int32_t>(set.dim);
    std::vector<std::uint8_t> row(set.dim);
    for (std::size_t i = 0; i < set.count(); ++i) {
        const float* src = set.row(i);
        for (std::uint32_t j = 0; j < set.dim; ++j) {
            row[j] = static_cast<std::uint8_t>(src[j]);
        }
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(row.data()), set.dim);
    }
    if (!out) {
        throw FormatError("write failed for " + path);
    }
}

void write_ivecs(const GroundTruth& gt, const std::string& path) {
    std::ofstream out = open_output(path);
    std::int32_t d = static_cast<std::int32_t>(gt.depth);
    for (std::size_t i = 0; i < gt.count(); ++i) {
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(gt.row(i).data()),
                  static_cast<std::streamsize>(gt.depth * sizeof(std::int32_t)));
    }
    if (!out) {
        throw FormatError("write failed for " + path);
    }
}

} // namespace pqt

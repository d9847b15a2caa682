#include "pqt/index_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace pqt {

namespace {

// All fields little-endian; this implementation targets little-endian
// hosts and writes native representations.
constexpr std::array<char, 8> kMagic = {'P', 'Q', 'T', 'I', 'N', 'D', 'E', 'X'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void read_pod(std::istream& in, T& value, const std::string& path) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw FormatError(path + ": truncated index file");
    }
}

template <class T>
void read_vec(std::istream& in, std::vector<T>& v, std::size_t count, const std::string& path) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) {
        throw FormatError(path + ": truncated index file");
    }
}

void write_config(std::ostream& out, const PqtConfig& c) {
    write_pod(out, c.dim);
    write_pod(out, c.p_tree);
    write_pod(out, c.k1);
    write_pod(out, c.k2);
    write_pod(out, c.w);
    write_pod(out, c.p_line);
    write_pod(out, c.hash_size);
    write_pod(out, c.candidate_budget);
    write_pod(out, c.rerank_exact);
    write_pod(out, static_cast<std::uint8_t>(c.resort_bins ? 1 : 0));
    write_pod(out, c.train_iters);
    write_pod(out, c.seed);
}

PqtConfig read_config(std::istream& in, const std::string& path) {
    PqtConfig c;
    read_pod(in, c.dim, path);
    read_pod(in, c.p_tree, path);
    read_pod(in, c.k1, path);
    read_pod(in, c.k2, path);
    read_pod(in, c.w, path);
    read_pod(in, c.p_line, path);
    read_pod(in, c.hash_size, path);
    read_pod(in, c.candidate_budget, path);
    read_pod(in, c.rerank_exact, path);
    std::uint8_t resort = 0;
    read_pod(in, resort, path);
    c.resort_bins = resort != 0;
    read_pod(in, c.train_iters, path);
    read_pod(in, c.seed, path);
    return c;
}

void write_codebook(std::ostream& out, const Codebook& book) {
    write_pod(out, book.part_dim);
    write_pod(out, book.k);
    write_vec(out, book.centroids);
}

Codebook read_codebook(std::istream& in, const std::string& path) {
    Codebook book;
    read_pod(in, book.part_dim, path);
    read_pod(in, book.k, path);
    read_vec(in, book.centroids, static_cast<std::size_t>(book.part_dim) * book.k, path);
    return book;
}

} // namespace

void save_index(const PqtIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open " + path + " for writing");
    }
    out.write(kMagic.data(), kMagic.size());
    write_pod(out, kVersion);
    write_config(out, index.config);

    const std::uint64_t n = index.size();
    write_pod(out, n);

    for (const auto& book : index.tree.level1) {
        write_codebook(out, book);
    }
    for (const auto& children : index.tree.level2) {
        for (const auto& book : children) {
            write_codebook(out, book);
        }
    }

    write_vec(out, index.pair_table.d2);

    write_pod(out, static_cast<std::uint32_t>(index.tables.size()));
    write_pod(out, index.tables.empty() ? 0u
                                        : static_cast<std::uint32_t>(index.tables[0].entries.size()));
    for (const auto& table : index.tables) {
        write_pod(out, table.slope);
        for (const auto& [a, b] : table.entries) {
            write_pod(out, a);
            write_pod(out, b);
        }
    }

    write_vec(out, index.lists.offsets);
    write_vec(out, index.lists.ids);

    // Line codes: 1 lambda byte plus a pair id sized by the pair count.
    const bool narrow_pairs = index.pair_table.pair_count() <= 256;
    write_pod(out, static_cast<std::uint8_t>(narrow_pairs ? 1 : 2));
    for (std::size_t i = 0; i < index.codes.lambda_q.size(); ++i) {
        write_pod(out, index.codes.lambda_q[i]);
        if (narrow_pairs) {
            write_pod(out, static_cast<std::uint8_t>(index.codes.pair_id[i]));
        } else {
            write_pod(out, index.codes.pair_id[i]);
        }
    }

    if (!out) {
        throw FormatError("write failed for " + path);
    }
}

PqtIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path + " for reading");
    }
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw FormatError(path + ": bad index magic, expected \"" +
                          std::string(kMagic.data(), kMagic.size()) + "\", got \"" +
                          std::string(magic.data(), magic.size()) + "\"");
    }
    std::uint32_t version = 0;
    read_pod(in, version, path);
    if (version != kVersion) {
        throw FormatError(path + ": unsupported index version " + std::to_string(version) +
                          ", expected " + std::to_string(kVersion));
    }

    PqtIndex index;
    index.config = read_config(in, path);
    index.config.validate();

    std::uint64_t n = 0;
    read_pod(in, n, path);

    index.tree.level1.resize(index.config.p_tree);
    for (auto& book : index.tree.level1) {
        book = read_codebook(in, path);
    }
    index.tree.level2.resize(index.config.p_tree);
    for (auto& children : index.tree.level2) {
        children.resize(index.config.k1);
        for (auto& book : children) {
            book = read_codebook(in, path);
        }
    }

    index.fine = build_fine_centroids(index.tree, index.config.p_line);
    index.pair_table = build_pair_table(index.fine);
    read_vec(in, index.pair_table.d2,
             static_cast<std::size_t>(index.config.p_line) * index.config.k1 * index.config.k1,
             path);

    std::uint32_t table_count = 0;
    std::uint32_t table_len = 0;
    read_pod(in, table_count, path);
    read_pod(in, table_len, path);
    index.tables.resize(table_count);
    for (auto& table : index.tables) {
        read_pod(in, table.slope, path);
        table.entries.resize(table_len);
        for (auto& [a, b] : table.entries) {
            read_pod(in, a, path);
            read_pod(in, b, path);
        }
    }

    read_vec(in, index.lists.offsets, index.config.hash_size + 1, path);
    read_vec(in, index.lists.ids, n, path);

    std::uint8_t pair_width = 0;
    read_pod(in, pair_width, path);
    if (pair_width != 1 && pair_width != 2) {
        throw FormatError(path + ": invalid line-code pair width " + std::to_string(pair_width));
    }
    index.codes.p_line = index.config.p_line;
    const std::size_t records = static_cast<std::size_t>(n) * index.config.p_line;
    index.codes.lambda_q.resize(records);
    index.codes.pair_id.resize(records);
    for (std::size_t i = 0; i < records; ++i) {
        read_pod(in, index.codes.lambda_q[i], path);
        if (pair_width == 1) {
            std::uint8_t p = 0;
            read_pod(in, p, path);
            index.codes.pair_id[i] = p;
        } else {
            read_pod(in, index.codes.pair_id[i], path);
        }
    }
    return index;
}

} // namespace pqt

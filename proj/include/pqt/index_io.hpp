#pragma once

#include <string>

#include "pqt/search.hpp"

namespace pqt {

/// Single-file little-endian container: magic, format version, config,
/// codebooks, pair-distance table, slope tables, inverted lists and line
/// codes. Raw database vectors are never stored.
void save_index(const PqtIndex& index, const std::string& path);

/// Throws FormatError on magic/version mismatch or truncation; never
/// returns a partially initialized index.
PqtIndex load_index(const std::string& path);

} // namespace pqt

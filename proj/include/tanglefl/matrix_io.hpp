#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tanglefl {

/// Little-endian float64 matrix file: 8-byte header (uint32 row count,
/// uint32 column count) followed by row-major values. Shared by the ledger
/// payload export and the dataset export.
void write_matrix(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t cols,
                  const std::vector<double>& values);

struct MatrixFile {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<double> values;
};

MatrixFile read_matrix(const std::filesystem::path& path);

} // namespace tanglefl

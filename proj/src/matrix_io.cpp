#include "tanglefl/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include "tanglefl/common.hpp"

namespace tanglefl {

namespace {

void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64_le(std::string& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
    return std::bit_cast<double>(bits);
}

} // namespace

void write_matrix(const std::filesystem::path& path, std::uint32_t rows, std::uint32_t cols,
                  const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(rows) * cols) {
        throw ShapeError("write_matrix: value count does not match rows x cols");
    }
    std::string buffer;
    buffer.reserve(8 + values.size() * 8);
    put_u32_le(buffer, rows);
    put_u32_le(buffer, cols);
    for (double v : values) put_f64_le(buffer, v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

MatrixFile read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buffer.size() < 8) throw IoError("matrix file truncated: " + path.string());

    const auto* bytes = reinterpret_cast<const unsigned char*>(buffer.data());
    MatrixFile file;
    file.rows = get_u32_le(bytes);
    file.cols = get_u32_le(bytes + 4);
    const std::size_t expected = 8 + static_cast<std::size_t>(file.rows) * file.cols * 8;
    if (buffer.size() != expected) {
        throw IoError("matrix file size mismatch: " + path.string());
    }
    file.values.resize(static_cast<std::size_t>(file.rows) * file.cols);
    for (std::size_t i = 0; i < file.values.size(); ++i) {
        file.values[i] = get_f64_le(bytes + 8 + i * 8);
    }
    return file;
}

} // namespace tanglefl

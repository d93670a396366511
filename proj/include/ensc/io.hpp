#pragma once

#include "ensc/core.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace ensc::io {

inline constexpr char kBinaryMagic[8] = {'E', 'N', 'S', 'C', 'M', 'A', 'T', '1'};

/// Formats a double with '.' decimal separator and full round-trip precision.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Writes through a temp file in the same directory, then renames into place.
inline void atomic_write(const std::filesystem::path& path,
                         const std::function<void(std::ostream&)>& writer) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::FileNotFound, "cannot open for writing: " + tmp.string());
        writer(out);
        out.flush();
        if (!out) throw Error(ErrorCode::FormatError, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Flat binary matrix format: 16-byte header (magic "ENSCMAT1", u32 rows,
// u32 cols, little-endian), then rows*cols little-endian f64 in column-major
// order.
// ---------------------------------------------------------------------------

inline void save_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
    atomic_write(path, [&](std::ostream& out) {
        out.write(kBinaryMagic, 8);
        const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
        const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
        out.write(reinterpret_cast<const char*>(&rows), 4);
        out.write(reinterpret_cast<const char*>(&cols), 4);
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(sizeof(double)) * m.size());
    });
}

inline Matrix load_matrix_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "no such file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kBinaryMagic, 8) != 0)
        throw Error(ErrorCode::FormatError, "bad magic in " + path.string());
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in || rows < 1)
        throw Error(ErrorCode::FormatError, "bad header in " + path.string());
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double)) * m.size());
    if (!in) throw Error(ErrorCode::FormatError, "truncated matrix in " + path.string());
    return m;
}

// ---------------------------------------------------------------------------
// CSV: one row per matrix row, ',' separator, '.' decimal, LF endings.
// An optional non-numeric first line is treated as a header and skipped.
// ---------------------------------------------------------------------------

inline void save_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    atomic_write(path, [&](std::ostream& out) {
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) {
                if (j) out << ',';
                out << format_double(m(i, j));
            }
            out << '\n';
        }
    });
}

namespace detail {

inline bool parse_csv_row(const std::string& line, std::vector<double>& out) {
    out.clear();
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        const std::string cell = line.substr(pos, comma - pos);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        // reject cells that are not fully numeric (allowing surrounding spaces)
        const char* p = end;
        while (p && *p != '\0' && std::isspace(static_cast<unsigned char>(*p))) ++p;
        if (end == cell.c_str() || (p && *p != '\0')) return false;
        out.push_back(v);
        if (comma == line.size()) break;
        pos = comma + 1;
    }
    return true;
}

}  // namespace detail

inline Matrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "no such file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        if (!detail::parse_csv_row(line, row)) {
            if (first) {  // header line
                first = false;
                continue;
            }
            throw Error(ErrorCode::FormatError, "bad CSV row in " + path.string());
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(ErrorCode::FormatError, "ragged CSV in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::FormatError, "empty CSV: " + path.string());
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

/// Loads a matrix by sniffing the format: binary magic first, CSV otherwise.
inline Matrix load_matrix(const std::filesystem::path& path) {
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw Error(ErrorCode::FileNotFound, "no such file: " + path.string());
        char magic[8] = {};
        probe.read(magic, 8);
        if (probe && std::memcmp(magic, kBinaryMagic, 8) == 0) return load_matrix_binary(path);
    }
    return load_matrix_csv(path);
}

// ---------------------------------------------------------------------------
// Labels: single-column CSV of integers.
// ---------------------------------------------------------------------------

inline void save_labels_csv(const std::filesystem::path& path, const std::vector<int>& labels) {
    atomic_write(path, [&](std::ostream& out) {
        for (int v : labels) out << v << '\n';
    });
}

inline std::vector<int> load_labels_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "no such file: " + path.string());
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            labels.push_back(std::stoi(line));
        } catch (const std::exception&) {
            if (labels.empty()) continue;  // header
            throw Error(ErrorCode::FormatError, "bad label row in " + path.string());
        }
    }
    if (labels.empty()) throw Error(ErrorCode::FormatError, "empty labels: " + path.string());
    return labels;
}

}  // namespace ensc::io

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scakit/types.hpp"

namespace scakit {

enum class FileFormat { csv, binary };

// ".csv" -> csv, anything else -> binary.
FileFormat infer_format(const std::filesystem::path& path);

ResponseMatrix load_matrix(const std::filesystem::path& path, FileFormat format);
ConnectivityMatrix load_connectivity(const std::filesystem::path& path,
                                     FileFormat format, ConnectivityKind kind);

void save_matrix(const ResponseMatrix& m, const std::filesystem::path& path,
                 FileFormat format);
void save_matrix(const ConnectivityMatrix& m, const std::filesystem::path& path,
                 FileFormat format);

// Shortest representation that parses back to the identical double.
std::string format_double(double v);

namespace detail {

// Shared carrier for both on-disk formats. Binary layout: little-endian,
// magic "SCAKITMX", u32 version, u32 dtype (1 = f64), u64 rows, u64 cols,
// row-major f64 payload, then two length-prefixed UTF-8 label blocks (rows,
// columns). CSV: header row of column ids, first column of row ids, '.'
// decimal separator.
struct LabeledMatrix {
    Matrix data;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
};

LabeledMatrix read_labeled(const std::filesystem::path& path, FileFormat format);
void write_labeled(const LabeledMatrix& m, const std::filesystem::path& path,
                   FileFormat format);

}  // namespace detail

}  // namespace scakit

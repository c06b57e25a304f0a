#include "scakit/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace scakit {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'A', 'K', 'I', 'T', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeF64 = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
public:
    ByteReader(std::string bytes, std::string path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    std::uint32_t get_u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= std::uint32_t(std::uint8_t(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= std::uint64_t(std::uint8_t(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double get_f64() { return std::bit_cast<double>(get_u64()); }

    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size())
            throw ParseError("truncated binary matrix file: " + path_);
    }
    std::string bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof())
        throw IoError("read failure: " + path.string());
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) throw IoError("write failure: " + path.string());
}

void check_label(const std::string& label) {
    if (label.find_first_of(",\n\r") != std::string::npos)
        throw ValueError("label contains a delimiter character: " + label);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_cell(const std::string& field, long row, long col) {
    double v = 0.0;
    const char* b = field.data();
    const char* e = b + field.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        throw ParseError("cannot parse numeric cell '" + field + "' at (" +
                             std::to_string(row) + "," + std::to_string(col) + ")",
                         row, col);
    if (std::isnan(v))
        throw ParseError("NaN detected at cell (" + std::to_string(row) + "," +
                             std::to_string(col) + ")",
                         row, col);
    return v;
}

detail::LabeledMatrix read_csv(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) nl = content.size();
        std::string line = content.substr(start, nl - start);
        if (!trim(line).empty()) lines.push_back(std::move(line));
        start = nl + 1;
    }
    if (lines.empty()) throw ParseError("empty CSV file: " + path.string());

    auto header = split_csv_line(lines[0]);
    if (header.size() < 2)
        throw ParseError("CSV header must list at least one column id", 0, -1);
    detail::LabeledMatrix m;
    m.col_ids.assign(header.begin() + 1, header.end());

    const long rows = static_cast<long>(lines.size()) - 1;
    const long cols = static_cast<long>(m.col_ids.size());
    if (rows < 1) throw ParseError("CSV has no data rows", -1, -1);
    m.data.resize(rows, cols);
    m.row_ids.reserve(static_cast<std::size_t>(rows));
    for (long r = 0; r < rows; ++r) {
        auto fields = split_csv_line(lines[static_cast<std::size_t>(r) + 1]);
        if (static_cast<long>(fields.size()) != cols + 1)
            throw ParseError("row " + std::to_string(r + 1) + " has " +
                                 std::to_string(fields.size() - 1) +
                                 " cells, expected " + std::to_string(cols),
                             r + 1, -1);
        m.row_ids.push_back(fields[0]);
        for (long c = 0; c < cols; ++c)
            m.data(r, c) = parse_cell(fields[static_cast<std::size_t>(c) + 1],
                                      r + 1, c + 1);
    }
    return m;
}

void write_csv(const detail::LabeledMatrix& m, const std::filesystem::path& path) {
    for (const auto& id : m.row_ids) check_label(id);
    for (const auto& id : m.col_ids) check_label(id);
    std::string out;
    out += "stimulus";
    for (const auto& id : m.col_ids) {
        out += ',';
        out += id;
    }
    out += '\n';
    for (long r = 0; r < m.data.rows(); ++r) {
        out += m.row_ids[static_cast<std::size_t>(r)];
        for (long c = 0; c < m.data.cols(); ++c) {
            out += ',';
            out += format_double(m.data(r, c));
        }
        out += '\n';
    }
    write_file(path, out);
}

void put_labels(std::string& out, const std::vector<std::string>& ids) {
    put_u64(out, ids.size());
    for (const auto& id : ids) {
        put_u32(out, static_cast<std::uint32_t>(id.size()));
        out += id;
    }
}

std::vector<std::string> get_labels(ByteReader& r) {
    const std::uint64_t n = r.get_u64();
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t len = r.get_u32();
        ids.push_back(r.get_bytes(len));
    }
    return ids;
}

detail::LabeledMatrix read_binary(const std::filesystem::path& path) {
    ByteReader r(read_file(path), path.string());
    const std::string magic = r.get_bytes(8);
    if (std::memcmp(magic.data(), kMagic, 8) != 0)
        throw ParseError("bad magic, not a scakit matrix file: " + path.string());
    const std::uint32_t version = r.get_u32();
    if (version != kVersion)
        throw ParseError("unsupported matrix file version " +
                         std::to_string(version));
    const std::uint32_t dtype = r.get_u32();
    if (dtype != kDtypeF64)
        throw ParseError("unsupported dtype " + std::to_string(dtype));
    const std::uint64_t rows = r.get_u64();
    const std::uint64_t cols = r.get_u64();
    if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32))
        throw ParseError("implausible matrix dimensions in " + path.string());
    detail::LabeledMatrix m;
    m.data.resize(static_cast<long>(rows), static_cast<long>(cols));
    for (std::uint64_t i = 0; i < rows; ++i)
        for (std::uint64_t j = 0; j < cols; ++j)
            m.data(static_cast<long>(i), static_cast<long>(j)) = r.get_f64();
    m.row_ids = get_labels(r);
    m.col_ids = get_labels(r);
    if (!r.at_end())
        throw ParseError("trailing bytes after label blocks: " + path.string());
    if (m.row_ids.size() != rows || m.col_ids.size() != cols)
        throw ParseError("label block sizes do not match matrix dimensions");
    return m;
}

void write_binary(const detail::LabeledMatrix& m,
                  const std::filesystem::path& path) {
    std::string out;
    out.reserve(32 + static_cast<std::size_t>(m.data.size()) * 8);
    out.append(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, kDtypeF64);
    put_u64(out, static_cast<std::uint64_t>(m.data.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.data.cols()));
    for (long i = 0; i < m.data.rows(); ++i)
        for (long j = 0; j < m.data.cols(); ++j) put_f64(out, m.data(i, j));
    put_labels(out, m.row_ids);
    put_labels(out, m.col_ids);
    write_file(path, out);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

FileFormat infer_format(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? FileFormat::csv : FileFormat::binary;
}

namespace detail {

LabeledMatrix read_labeled(const std::filesystem::path& path, FileFormat format) {
    return format == FileFormat::csv ? read_csv(path) : read_binary(path);
}

void write_labeled(const LabeledMatrix& m, const std::filesystem::path& path,
                   FileFormat format) {
    if (format == FileFormat::csv)
        write_csv(m, path);
    else
        write_binary(m, path);
}

}  // namespace detail

ResponseMatrix load_matrix(const std::filesystem::path& path, FileFormat format) {
    auto m = detail::read_labeled(path, format);
    return ResponseMatrix(std::move(m.data), std::move(m.row_ids),
                          std::move(m.col_ids));
}

ConnectivityMatrix load_connectivity(const std::filesystem::path& path,
                                     FileFormat format, ConnectivityKind kind) {
    auto m = detail::read_labeled(path, format);
    if (m.row_ids != m.col_ids)
        throw DimensionError(
            "connectivity matrix row and column labels differ: " + path.string());
    return ConnectivityMatrix::from_raw(std::move(m.data), kind,
                                        std::move(m.row_ids));
}

void save_matrix(const ResponseMatrix& m, const std::filesystem::path& path,
                 FileFormat format) {
    detail::write_labeled({m.data(), m.stimulus_ids(), m.unit_ids()}, path,
                          format);
}

void save_matrix(const ConnectivityMatrix& m, const std::filesystem::path& path,
                 FileFormat format) {
    detail::write_labeled({m.data(), m.stimulus_ids(), m.stimulus_ids()}, path,
                          format);
}

}  // namespace scakit

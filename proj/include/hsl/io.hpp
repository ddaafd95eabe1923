// SPDX-License-Identifier: Apache-2.0
//
// Text formats and report rendering.
//
//   trimat v1  — "trimat v1 N=<n>"; data line i holds exactly i numbers,
//                optionally "re,im" pairs for complex entries; '#' comments.
//   covmat v1  — "covmat v1 N=<n>"; N data lines of N numbers.
//   vecw v1    — "vecw v1 N=<n> d=<d>"; N data lines of d coordinates.
//
// Reports are CSV or aligned tables.  Floating values print with 17
// significant digits so a report round-trips losslessly.  The only
// non-deterministic line is the leading "# generated-at:" comment.
#ifndef HSL_IO_HPP
#define HSL_IO_HPP

#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <sstream>
#include <variant>
#include <vector>

#include "hsl/coeffs.hpp"
#include "hsl/covfactor.hpp"
#include "hsl/core.hpp"

namespace hsl::io {

class parse_error : public std::runtime_error {
  public:
    parse_error(const std::string& name, int line, const std::string& what)
        : std::runtime_error(name + ":" + std::to_string(line) + ": " + what),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

using real_matrix = coeffs::coefficient_matrix<double>;
using complex_matrix = coeffs::coefficient_matrix<std::complex<double>>;
using any_matrix = std::variant<real_matrix, complex_matrix>;

namespace detail {

inline std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline double parse_number(const std::string& tok, const std::string& name,
                           int line) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw parse_error(name, line, "malformed number '" + tok + "'");
    return v;
}

inline std::complex<double> parse_entry(const std::string& tok,
                                        const std::string& name, int line,
                                        bool& saw_complex) {
    const auto comma = tok.find(',');
    if (comma == std::string::npos)
        return {parse_number(tok, name, line), 0.0};
    saw_complex = true;
    return {parse_number(tok.substr(0, comma), name, line),
            parse_number(tok.substr(comma + 1), name, line)};
}

// Header "<tag> v1 key=<int> ..." -> values for the requested keys.
inline std::vector<index_t> parse_header(const std::string& line,
                                         const std::string& tag,
                                         std::span<const char* const> keys,
                                         const std::string& name) {
    const auto toks = tokenize(strip_comment(line));
    if (toks.size() != 2 + keys.size() || toks[0] != tag || toks[1] != "v1")
        throw parse_error(name, 1, "expected header '" + tag + " v1 ...'");
    std::vector<index_t> vals;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::string prefix = std::string(keys[i]) + "=";
        const std::string& tok = toks[2 + i];
        if (tok.rfind(prefix, 0) != 0)
            throw parse_error(name, 1, "expected '" + prefix + "<int>' in header");
        const index_t v =
            static_cast<index_t>(parse_number(tok.substr(prefix.size()), name, 1));
        if (v < 1) throw parse_error(name, 1, prefix + " must be >= 1");
        vals.push_back(v);
    }
    return vals;
}

struct data_line {
    std::vector<std::string> tokens;
    int line_no = 0;
};

inline std::vector<data_line> read_data_lines(std::istream& in, int& line_no) {
    std::vector<data_line> out;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(strip_comment(line));
        if (!toks.empty()) out.push_back({std::move(toks), line_no});
    }
    return out;
}

}  // namespace detail

inline any_matrix load_trimat(std::istream& in,
                              const std::string& name = "<stream>") {
    std::string header;
    if (!std::getline(in, header)) throw parse_error(name, 1, "empty input");
    constexpr const char* keys[] = {"N"};
    const auto vals = detail::parse_header(header, "trimat", keys, name);
    const index_t n = vals[0];

    int line_no = 1;
    const auto lines = detail::read_data_lines(in, line_no);
    if (static_cast<index_t>(lines.size()) != n)
        throw parse_error(name, line_no,
                          "expected " + std::to_string(n) + " data rows, found " +
                              std::to_string(lines.size()));

    bool saw_complex = false;
    std::vector<std::vector<std::complex<double>>> rows(
        static_cast<std::size_t>(n));
    for (index_t i = 1; i <= n; ++i) {
        const auto& dl = lines[static_cast<std::size_t>(i - 1)];
        if (static_cast<index_t>(dl.tokens.size()) != i)
            throw parse_error(name, dl.line_no,
                              "row " + std::to_string(i) + " must hold " +
                                  std::to_string(i) + " entries, found " +
                                  std::to_string(dl.tokens.size()));
        auto& row = rows[static_cast<std::size_t>(i - 1)];
        row.reserve(static_cast<std::size_t>(i));
        for (const auto& tok : dl.tokens)
            row.push_back(detail::parse_entry(tok, name, dl.line_no, saw_complex));
    }

    bool any_imag = false;
    for (const auto& row : rows)
        for (const auto& v : row)
            if (v.imag() != 0.0) any_imag = true;
    if (saw_complex && any_imag)
        return complex_matrix::from_rows(std::move(rows));
    std::vector<std::vector<double>> real_rows(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        real_rows[i].reserve(rows[i].size());
        for (const auto& v : rows[i]) real_rows[i].push_back(v.real());
    }
    return real_matrix::from_rows(std::move(real_rows));
}

inline any_matrix load_trimat_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    return load_trimat(in, path);
}

inline std::string fmt_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_trimat(std::ostream& out, const real_matrix& m, index_t n) {
    out << "trimat v1 N=" << n << "\n";
    for (index_t i = 1; i <= n; ++i) {
        for (index_t k = 1; k <= i; ++k)
            out << (k > 1 ? " " : "") << fmt_float(m.at(i, k));
        out << "\n";
    }
}

inline covfactor::covariance_spec load_covmat(std::istream& in,
                                              const std::string& name = "<stream>") {
    std::string header;
    if (!std::getline(in, header)) throw parse_error(name, 1, "empty input");
    constexpr const char* keys[] = {"N"};
    const auto vals = detail::parse_header(header, "covmat", keys, name);
    const index_t n = vals[0];

    int line_no = 1;
    const auto lines = detail::read_data_lines(in, line_no);
    if (static_cast<index_t>(lines.size()) != n)
        throw parse_error(name, line_no,
                          "expected " + std::to_string(n) + " data rows, found " +
                              std::to_string(lines.size()));
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n) * n);
    for (const auto& dl : lines) {
        if (static_cast<index_t>(dl.tokens.size()) != n)
            throw parse_error(name, dl.line_no,
                              "expected " + std::to_string(n) + " entries per row");
        for (const auto& tok : dl.tokens)
            data.push_back(detail::parse_number(tok, name, dl.line_no));
    }
    return covfactor::covariance_spec::explicit_matrix(n, std::move(data));
}

inline covfactor::covariance_spec load_covmat_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open covariance file: " + path);
    return load_covmat(in, path);
}

inline coeffs::vector_weights load_weights(std::istream& in,
                                           const std::string& name = "<stream>") {
    std::string header;
    if (!std::getline(in, header)) throw parse_error(name, 1, "empty input");
    constexpr const char* keys[] = {"N", "d"};
    const auto vals = detail::parse_header(header, "vecw", keys, name);
    const index_t n = vals[0];
    const index_t d = vals[1];

    int line_no = 1;
    const auto lines = detail::read_data_lines(in, line_no);
    if (static_cast<index_t>(lines.size()) != n)
        throw parse_error(name, line_no,
                          "expected " + std::to_string(n) + " data rows, found " +
                              std::to_string(lines.size()));
    std::vector<std::vector<double>> vecs(static_cast<std::size_t>(n));
    for (index_t i = 1; i <= n; ++i) {
        const auto& dl = lines[static_cast<std::size_t>(i - 1)];
        if (static_cast<index_t>(dl.tokens.size()) != d)
            throw parse_error(name, dl.line_no,
                              "expected " + std::to_string(d) + " coordinates per row");
        auto& v = vecs[static_cast<std::size_t>(i - 1)];
        v.reserve(static_cast<std::size_t>(d));
        for (const auto& tok : dl.tokens)
            v.push_back(detail::parse_number(tok, name, dl.line_no));
    }
    return coeffs::vector_weights::from_vectors(std::move(vecs));
}

inline coeffs::vector_weights load_weights_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open weights file: " + path);
    return load_weights(in, path);
}

// ---------------------------------------------------------------------------
// Reports.

enum class report_format { csv, table };

struct report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> notes;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_config(std::string key, std::string value) {
        config.emplace_back(std::move(key), std::move(value));
    }
    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    std::string render(report_format fmt, bool with_timestamp = true) const {
        std::ostringstream out;
        if (with_timestamp) {
            std::time_t now = std::time(nullptr);
            char buf[32];
            std::tm tm_utc{};
            gmtime_r(&now, &tm_utc);
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
            out << "# generated-at: " << buf << "\n";
        }
        out << "# command: " << command << "\n";
        for (const auto& [k, v] : config) out << "# config: " << k << "=" << v << "\n";
        for (const auto& n : notes) out << "# note: " << n << "\n";
        if (fmt == report_format::csv) {
            for (std::size_t c = 0; c < columns.size(); ++c)
                out << (c ? "," : "") << columns[c];
            out << "\n";
            for (const auto& row : rows) {
                for (std::size_t c = 0; c < row.size(); ++c)
                    out << (c ? "," : "") << row[c];
                out << "\n";
            }
        } else {
            std::vector<std::size_t> width(columns.size(), 0);
            for (std::size_t c = 0; c < columns.size(); ++c)
                width[c] = columns[c].size();
            for (const auto& row : rows)
                for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
                    width[c] = std::max(width[c], row[c].size());
            const auto emit = [&](const std::vector<std::string>& row) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (c) out << "  ";
                    out << row[c];
                    if (c + 1 < row.size())
                        out << std::string(width[c] - row[c].size(), ' ');
                }
                out << "\n";
            };
            emit(columns);
            for (const auto& row : rows) emit(row);
        }
        return out.str();
    }
};

/// Report body without the volatile timestamp line; what determinism checks
/// compare.
inline std::string strip_volatile(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# generated-at:", 0) != 0) out << line << "\n";
    return out.str();
}

}  // namespace hsl::io

#endif

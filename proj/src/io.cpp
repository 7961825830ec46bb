#include "composa/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "composa/error.hpp"

namespace composa::io {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// A header row whose first field is numeric is a data row; the header is missing.
void require_header(const std::string& line, std::size_t lineno) {
    const std::string first = trim(line.substr(0, line.find(',')));
    char* end = nullptr;
    std::strtod(first.c_str(), &end);
    if (!first.empty() && end == first.c_str() + first.size()) {
        throw Error("line " + std::to_string(lineno) + ": missing header row");
    }
}

double parse_double(const std::string& tok, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != tok.size()) {
        throw Error("line " + std::to_string(line) + ": expected a number, got '" + tok + "'");
    }
    return v;
}

Index parse_index(const std::string& tok, std::size_t line) {
    Index v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw Error("line " + std::to_string(line) + ": expected a non-negative integer, got '" + tok + "'");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw Error("matrix market: empty input");
    std::istringstream banner(lower(line));
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%matrixmarket" || object != "matrix") throw Error("matrix market: bad banner line");
    if (format != "coordinate" && format != "array") throw Error("matrix market: unsupported format " + format);
    if (field != "real" && field != "integer" && field != "double") {
        throw Error("matrix market: unsupported field " + field);
    }
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") throw Error("matrix market: unsupported symmetry " + symmetry);

    // size line
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream size_line(line);
    Index nrows = 0, ncols = 0, nnz = 0;
    if (format == "coordinate") {
        if (!(size_line >> nrows >> ncols >> nnz)) throw Error("matrix market: bad size line " + std::to_string(lineno));
    } else {
        if (!(size_line >> nrows >> ncols)) throw Error("matrix market: bad size line " + std::to_string(lineno));
    }

    std::vector<Triplet> trips;
    if (format == "coordinate") {
        trips.reserve(symmetric ? 2 * nnz : nnz);
        Index read = 0;
        while (read < nnz && std::getline(in, line)) {
            ++lineno;
            line = trim(line);
            if (line.empty() || line[0] == '%') continue;
            std::istringstream ss(line);
            std::string si, sj, sv;
            ss >> si >> sj >> sv;
            const Index i = parse_index(si, lineno);
            const Index j = parse_index(sj, lineno);
            const double v = parse_double(sv, lineno);
            if (i == 0 || j == 0 || i > nrows || j > ncols) {
                throw IndexError("matrix market: entry out of range on line " + std::to_string(lineno));
            }
            trips.push_back({i - 1, j - 1, v});
            if (symmetric && i != j) trips.push_back({j - 1, i - 1, v});
            ++read;
        }
        if (read != nnz) throw Error("matrix market: expected " + std::to_string(nnz) + " entries");
    } else {
        // column-major dense listing
        Index k = 0;
        const Index total = nrows * ncols;
        while (k < total && std::getline(in, line)) {
            ++lineno;
            line = trim(line);
            if (line.empty() || line[0] == '%') continue;
            const double v = parse_double(line, lineno);
            trips.push_back({k % nrows, k / nrows, v});
            ++k;
        }
        if (k != total) throw Error("matrix market: truncated array data");
    }
    return SparseMatrix::from_triplets(trips, nrows, ncols);
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_matrix_market(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        auto cols = m.row_cols(i);
        auto vals = m.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) {
            out << i + 1 << ' ' << cols[k] + 1 << ' ' << format_double(vals[k]) << '\n';
        }
    }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
    auto out = open_out(path);
    write_matrix_market(out, m);
}

Vector read_vector_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    Vector v;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (header) {
            require_header(line, lineno);
            header = false;
            continue;
        }
        if (line.find(',') != std::string::npos) {
            throw Error("line " + std::to_string(lineno) + ": vector CSV must have a single column");
        }
        v.push_back(parse_double(line, lineno));
    }
    if (header) throw Error("vector CSV: missing header row");
    return v;
}

Vector read_vector_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_vector_csv(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_vector_csv(std::ostream& out, std::span<const double> v, const std::string& header) {
    out << header << '\n';
    for (double x : v) out << format_double(x) << '\n';
}

void write_vector_csv(const std::filesystem::path& path, std::span<const double> v, const std::string& header) {
    auto out = open_out(path);
    write_vector_csv(out, v, header);
}

std::vector<Edge> read_edge_list(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (header) {
            require_header(line, lineno);
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error("line " + std::to_string(lineno) + ": expected 'src,dst'");
        edges.emplace_back(parse_index(trim(line.substr(0, comma)), lineno),
                           parse_index(trim(line.substr(comma + 1)), lineno));
    }
    if (header) throw Error("edge list: missing header row");
    return edges;
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return read_edge_list(in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_edge_list(const std::filesystem::path& path, const std::vector<Edge>& edges) {
    auto out = open_out(path);
    out << "src,dst\n";
    for (const auto& [s, d] : edges) out << s << ',' << d << '\n';
}

}  // namespace composa::io

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "composa/linalg.hpp"

namespace composa::io {

using Edge = std::pair<Index, Index>;

/// Matrix Market: `coordinate` (general or symmetric) and `array` real
/// formats are read; files on disk are 1-based.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::filesystem::path& path);
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);

/// Single-column CSV with a mandatory header row.
Vector read_vector_csv(std::istream& in);
Vector read_vector_csv(const std::filesystem::path& path);
void write_vector_csv(std::ostream& out, std::span<const double> v, const std::string& header = "value");
void write_vector_csv(const std::filesystem::path& path, std::span<const double> v,
                      const std::string& header = "value");

/// `src,dst` header followed by 0-based index pairs.
std::vector<Edge> read_edge_list(std::istream& in);
std::vector<Edge> read_edge_list(const std::filesystem::path& path);
void write_edge_list(const std::filesystem::path& path, const std::vector<Edge>& edges);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace composa::io

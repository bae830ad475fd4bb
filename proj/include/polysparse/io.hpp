#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "polysparse/matrix_core.hpp"
#include "polysparse/mdbd.hpp"

namespace polysparse::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string read_text(const std::string& path);
void write_text(const std::string& path, std::string_view content);

/// Coordinate text format:
///   # comment
///   n m
///   D: d_0 d_1 ...        (optional, may span several lines)
///   i j w                 (m lines, 0-based, i <= j)
/// Without D lines the diagonal defaults to the row sums of M (a Laplacian).
TMatrix parse_matrix(std::string_view text);
std::string format_matrix(const TMatrix& b);
TMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const TMatrix& b);

/// JSON array or whitespace-separated numbers.
Vector parse_vector(std::string_view text);
std::string format_vector(const Vector& v);
Vector read_vector(const std::string& path);

/// {"N": int, "T": int, "p": [...], "alpha": [...]}
MDBD parse_mdbd(std::string_view text);
std::string format_mdbd(const MDBD& mix);
MDBD read_mdbd(const std::string& path);

/// Vertex list as a JSON array or whitespace-separated integers.
std::vector<std::size_t> parse_subset(std::string_view text);
std::vector<std::size_t> read_subset(const std::string& path);

}  // namespace polysparse::io

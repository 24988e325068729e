#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kmd/types.hpp"

namespace kmd::io
{

/// Formats with 17 significant digits; non-finite values print as "inf",
/// "-inf" or "nan".
std::string format_double(double value);

/// Parses one numeric token (surrounding blanks allowed, "inf"/"nan" accepted).
/// Throws InputError on anything else.
double parse_double(std::string_view token);

/// Splits a comma-separated line into trimmed tokens.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string read_text(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, so readers never observe a
/// half-written file.
void write_text_atomic(const std::filesystem::path& path, std::string_view contents);

std::string matrix_to_csv(const RealMatrix& m);

/// Reads a rectangular numeric CSV; ragged rows are an error.
RealMatrix parse_csv_matrix(std::string_view text, bool skip_header = false);

} // namespace kmd::io

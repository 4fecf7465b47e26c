#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace replica {

/// A CSV table held as text cells. Numbers are written with the shortest
/// representation that parses back to the same double.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; throws std::out_of_range if absent.
  std::size_t column(std::string_view name) const;
  std::string to_csv() const;
};

std::string format_double(double value);
std::string format_uint(unsigned long long value);
/// Parses a cell written by format_double ("nan", "inf" included).
double parse_double(std::string_view text);

Table parse_csv(std::string_view text);
Table read_csv(const std::string& path);

/// Writes to a temporary file next to `path` and renames it into place.
void write_file_atomic(const std::string& path, std::string_view contents);
void write_csv(const std::string& path, const Table& table);

}  // namespace replica

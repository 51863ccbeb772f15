#pragma once

#include <istream>
#include <string>
#include <vector>

#include "robustse/dataset.hpp"

namespace robustse {

/// RFC 4180 table with a mandatory header row. Fields are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of_row;  // 1-based source line where each row starts

  Index rows_count() const { return static_cast<Index>(rows.size()); }
  /// Throws UnknownColumn.
  std::size_t column_index(const std::string& name) const;
};

/// Throws ParseError with line and column on malformed input.
CsvTable read_csv(std::istream& in);
/// Throws FileNotFound when the file cannot be opened.
CsvTable read_csv_file(const std::string& path);

/// Parses a column as 64-bit floats (decimal point only). Throws MissingValue
/// on empty/NA cells and ParseError on anything else that is not a number.
Vector numeric_column(const CsvTable& table, const std::string& name);
std::vector<std::string> text_column(const CsvTable& table, const std::string& name);

}  // namespace robustse

#include "robustse/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "robustse/error.hpp"

namespace robustse {

namespace {

[[noreturn]] void parse_error(std::size_t line, std::size_t column, const std::string& what) {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << what;
  throw Error(ErrorKind::ParseError, os.str());
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw Error(ErrorKind::UnknownColumn, "no column named '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_line;
  std::size_t line = 1;
  std::size_t column = 1;

  while (pos < text.size()) {
    std::vector<std::string> record;
    const std::size_t start_line = line;
    bool end_of_record = false;
    while (!end_of_record) {
      std::string field;
      const std::size_t field_column = column;
      if (pos < text.size() && text[pos] == '"') {
        ++pos;
        ++column;
        bool closed = false;
        while (pos < text.size()) {
          const char c = text[pos];
          if (c == '"') {
            if (pos + 1 < text.size() && text[pos + 1] == '"') {
              field.push_back('"');
              pos += 2;
              column += 2;
              continue;
            }
            ++pos;
            ++column;
            closed = true;
            break;
          }
          if (c == '\n') {
            ++line;
            column = 0;
          }
          field.push_back(c);
          ++pos;
          ++column;
        }
        if (!closed) parse_error(start_line, field_column, "unterminated quoted field");
        if (pos < text.size() && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r')
          parse_error(line, column, "unexpected character after closing quote");
      } else {
        while (pos < text.size() && text[pos] != ',' && text[pos] != '\n' && text[pos] != '\r') {
          if (text[pos] == '"') parse_error(line, column, "quote inside unquoted field");
          field.push_back(text[pos]);
          ++pos;
          ++column;
        }
      }
      record.push_back(std::move(field));

      if (pos >= text.size()) {
        end_of_record = true;
      } else if (text[pos] == ',') {
        ++pos;
        ++column;
      } else {
        if (text[pos] == '\r') ++pos;
        if (pos < text.size() && text[pos] == '\n') ++pos;
        ++line;
        column = 1;
        end_of_record = true;
      }
    }
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      records.push_back(std::move(record));
      record_line.push_back(start_line);
    }
  }

  if (records.empty()) parse_error(1, 1, "missing header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      std::ostringstream os;
      os << "expected " << table.header.size() << " fields, found " << records[r].size();
      parse_error(record_line[r], 1, os.str());
    }
    table.rows.push_back(std::move(records[r]));
    table.line_of_row.push_back(record_line[r]);
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open '" + path + "'");
  return read_csv(in);
}

Vector numeric_column(const CsvTable& table, const std::string& name) {
  const std::size_t j = table.column_index(name);
  Vector out(table.rows_count());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::string_view cell = table.rows[r][j];
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    if (cell.empty() || cell == "NA") {
      std::ostringstream os;
      os << "missing value in column '" << name << "' at line " << table.line_of_row[r]
         << ", column " << j + 1;
      throw Error(ErrorKind::MissingValue, os.str());
    }
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
      parse_error(table.line_of_row[r], j + 1,
                  "'" + std::string(table.rows[r][j]) + "' is not a number");
    out(static_cast<Index>(r)) = value;
  }
  return out;
}

std::vector<std::string> text_column(const CsvTable& table, const std::string& name) {
  const std::size_t j = table.column_index(name);
  std::vector<std::string> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r][j].empty()) {
      std::ostringstream os;
      os << "missing value in column '" << name << "' at line " << table.line_of_row[r]
         << ", column " << j + 1;
      throw Error(ErrorKind::MissingValue, os.str());
    }
    out.push_back(table.rows[r][j]);
  }
  return out;
}

}  // namespace robustse

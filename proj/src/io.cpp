#include "kuramoto/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "kuramoto/error.hpp"

namespace kuramoto::io {

std::string format_double(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw Error("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw Error("CSV row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

void CsvWriter::row(const std::string& label, std::span<const double> values) {
  if (values.size() + 1 != columns_) throw Error("CSV row width does not match the header");
  out_ << label;
  for (double v : values) out_ << ',' << format_double(v);
  out_ << '\n';
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& row : cells) {
    const std::string& cell = row.at(c);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw ParseError("non-numeric CSV cell '" + cell + "' in column " + name);
    out.push_back(v);
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "' is empty");
  t.columns = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = split_line(line);
    if (row.size() != t.columns.size())
      throw ParseError("'" + path.string() + "': row width differs from the header");
    t.cells.push_back(std::move(row));
  }
  return t;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace kuramoto::io

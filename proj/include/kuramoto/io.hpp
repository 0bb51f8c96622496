#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace kuramoto::io {

// Shortest text that round-trips the double exactly (17 significant digits).
std::string format_double(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  // Mixed row whose first cell is text.
  void row(const std::string& label, std::span<const double> values);

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> cells;

  std::size_t rows() const noexcept { return cells.size(); }
  std::size_t column_index(const std::string& name) const;
  std::vector<double> numeric(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace kuramoto::io

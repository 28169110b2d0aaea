#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mmchain {

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

/// Small CSV builder with a fixed header. Cells are preformatted strings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mmchain

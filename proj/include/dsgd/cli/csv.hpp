#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "dsgd/models/dataset.hpp"

namespace dsgd::cli {

// Shortest round-trip decimal; NaN becomes an empty cell.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] double parse_cell(std::string_view cell);  // empty -> NaN

[[nodiscard]] std::vector<std::string> split_csv_line(std::string_view line);

// Line-buffered CSV writer; every row is flushed so a crash leaves the rows
// written so far.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(std::string_view v);
  void end_row();

 private:
  void sep();

  std::ofstream out_;
  std::string line_;
  bool first_ = true;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; IoError if absent.
  [[nodiscard]] std::size_t column(std::string_view name) const;
};

// IoError on an unreadable file or ragged rows.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

// Dataset as CSV: columns x0..x{d-1},label.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
[[nodiscard]] Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t num_classes = 0);

}  // namespace dsgd::cli

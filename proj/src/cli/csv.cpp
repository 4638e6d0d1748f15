#include "dsgd/cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "dsgd/core/error.hpp"

namespace dsgd::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_cell(std::string_view cell) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    if (cell == "inf") return std::numeric_limits<double>::infinity();
    if (cell == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("bad numeric cell '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot write " + path.string());
  for (std::string_view h : header) cell(h);
  end_row();
}

void CsvWriter::sep() {
  if (!first_) line_.push_back(',');
  first_ = false;
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  line_ += format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  sep();
  line_ += v;
  return *this;
}

void CsvWriter::end_row() {
  line_.push_back('\n');
  out_ << line_;
  out_.flush();
  if (!out_) throw IoError("write failed");
  line_.clear();
  first_ = true;
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw IoError(path.string() + ": empty file");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size()) throw IoError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.feature_dim; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << format_double(v) << ',';
    out << data.labels[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t num_classes) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header.back() != "label") {
    throw IoError(path.string() + ": expected feature columns followed by 'label'");
  }
  Dataset d;
  d.feature_dim = t.header.size() - 1;
  std::vector<double> row(d.feature_dim);
  int max_label = -1;
  for (const auto& r : t.rows) {
    for (std::size_t j = 0; j < d.feature_dim; ++j) row[j] = parse_cell(r[j]);
    const double label = parse_cell(r.back());
    if (!(label >= 0.0) || label != std::floor(label)) throw IoError(path.string() + ": bad label");
    d.push_back(row, static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  d.num_classes = num_classes > 0 ? num_classes : static_cast<std::size_t>(max_label + 1);
  try {
    d.validate();
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return d;
}

}  // namespace dsgd::cli

#include "dsgd/fed/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "dsgd/core/error.hpp"

namespace dsgd {

namespace {

constexpr std::array<char, 4> kCheckpointMagic{'D', 'F', 'L', '1'};
constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

void put_le64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_be32(std::ifstream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError(path.string() + ": truncated IDX header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamVector& x) {
  std::vector<unsigned char> buf;
  buf.reserve(16 + 8 * x.size());
  buf.insert(buf.end(), kCheckpointMagic.begin(), kCheckpointMagic.end());
  buf.insert(buf.end(), 4, 0);
  put_le64(buf, x.size());
  for (double v : x) put_le64(buf, std::bit_cast<std::uint64_t>(v));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ParamVector load_checkpoint(const std::filesystem::path& path) {
  const std::vector<unsigned char> buf = read_all(path);
  if (buf.size() < 16) throw IoError(path.string() + ": checkpoint header truncated");
  if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), buf.begin())) {
    throw IoError(path.string() + ": not a checkpoint (bad magic)");
  }
  const std::uint64_t n = get_le64(buf.data() + 8);
  if (n > (buf.size() - 16) / 8 || buf.size() != 16 + 8 * n) {
    throw IoError(path.string() + ": checkpoint size does not match its header");
  }
  ParamVector x(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::bit_cast<double>(get_le64(buf.data() + 16 + 8 * i));
  }
  return x;
}

Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw IoError("cannot open " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw IoError("cannot open " + labels.string());

  if (get_be32(img, images) != kIdxImages) throw IoError(images.string() + ": bad IDX image magic");
  const std::uint32_t n_img = get_be32(img, images);
  const std::uint32_t rows = get_be32(img, images);
  const std::uint32_t cols = get_be32(img, images);
  if (get_be32(lab, labels) != kIdxLabels) throw IoError(labels.string() + ": bad IDX label magic");
  const std::uint32_t n_lab = get_be32(lab, labels);
  if (n_img != n_lab) throw IoError("IDX image and label counts differ");
  if (rows == 0 || cols == 0) throw IoError(images.string() + ": empty image shape");

  const std::size_t pixels = std::size_t{rows} * cols;
  std::vector<unsigned char> raw(pixels * n_img);
  if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw IoError(images.string() + ": truncated pixel data");
  }
  std::vector<unsigned char> raw_labels(n_lab);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(n_lab))) {
    throw IoError(labels.string() + ": truncated label data");
  }

  Dataset out;
  out.feature_dim = pixels;
  out.features.resize(raw.size());
  std::transform(raw.begin(), raw.end(), out.features.begin(),
                 [](unsigned char v) { return static_cast<double>(v) / 255.0; });
  out.labels.assign(raw_labels.begin(), raw_labels.end());
  const int max_label = raw_labels.empty() ? 0 : *std::max_element(raw_labels.begin(), raw_labels.end());
  out.num_classes = num_classes ? num_classes : static_cast<std::size_t>(max_label) + 1;
  try {
    out.validate();
  } catch (const DimensionError& e) {
    throw IoError(labels.string() + ": " + e.what());
  }
  return out;
}

void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
               const Dataset& data, std::uint32_t rows, std::uint32_t cols) {
  require_same_size(data.feature_dim, std::size_t{rows} * cols, "IDX image shape");
  std::ofstream img(images, std::ios::binary | std::ios::trunc);
  std::ofstream lab(labels, std::ios::binary | std::ios::trunc);
  if (!img || !lab) throw IoError("cannot write IDX files");
  const auto n = static_cast<std::uint32_t>(data.size());
  put_be32(img, kIdxImages);
  put_be32(img, n);
  put_be32(img, rows);
  put_be32(img, cols);
  for (double v : data.features) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    img.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  put_be32(lab, kIdxLabels);
  put_be32(lab, n);
  for (int y : data.labels) lab.put(static_cast<char>(static_cast<unsigned char>(y)));
  if (!img || !lab) throw IoError("IDX write failed");
}

}  // namespace dsgd

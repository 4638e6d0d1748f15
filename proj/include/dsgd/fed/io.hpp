#pragma once

#include <filesystem>

#include "dsgd/core/param_vector.hpp"
#include "dsgd/models/dataset.hpp"

namespace dsgd {

// Checkpoint layout (all little-endian):
//   bytes 0..3   "DFL1"
//   bytes 4..7   reserved, zero
//   bytes 8..15  parameter count as uint64
//   then         parameter count float64 values
void save_checkpoint(const std::filesystem::path& path, const ParamVector& x);
// Throws IoError on a short read, a bad magic, or trailing bytes.
[[nodiscard]] ParamVector load_checkpoint(const std::filesystem::path& path);

// Reads an MNIST-layout IDX pair: images with magic 0x00000803 (uint8,
// n x rows x cols) and labels with magic 0x00000801 (uint8). Pixels are
// scaled to [0, 1]; num_classes is max label + 1 unless given.
[[nodiscard]] Dataset read_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                               std::size_t num_classes = 0);

// Writes a dataset as an IDX pair. Features must lie in [0, 1] and the
// feature count must equal rows * cols. Used to produce fixtures.
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
               const Dataset& data, std::uint32_t rows, std::uint32_t cols);

}  // namespace dsgd

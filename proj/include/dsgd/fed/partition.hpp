#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dsgd/core/rng.hpp"

namespace dsgd {

// Assignment of dataset sample indices to clients.
struct Partition {
  std::vector<std::vector<std::size_t>> client_indices;
  double alpha = 0.0;
  std::vector<double> class_prior;

  [[nodiscard]] std::size_t num_clients() const noexcept { return client_indices.size(); }
  [[nodiscard]] std::vector<std::size_t> sizes() const;
};

// Label-Dirichlet non-IID split. Each client draws q ~ Dir(alpha * prior),
// then fills its quota one sample at a time: a class is drawn from q
// restricted to classes whose pool is not yet empty, and a random remaining
// sample of that class is taken. Without explicit quotas every client gets
// floor(n / m) samples and the remainder is left unassigned.
//
// Throws ConfigError when m == 0, alpha <= 0, m > n, or the quotas exceed n.
[[nodiscard]] Partition dirichlet_partition(std::span<const int> labels, std::size_t num_classes,
                                            std::size_t m, double alpha, SeededRng& rng,
                                            std::optional<std::vector<std::size_t>> quotas = std::nullopt);

// Per-client sample counts drawn uniformly from [n_min, n_max]. Throws
// ConfigError when n_min > n_max, n_min == 0, or the total exceeds
// dataset_size.
[[nodiscard]] std::vector<std::size_t> unequal_partition_sizes(std::size_t m, std::size_t n_min,
                                                               std::size_t n_max,
                                                               std::size_t dataset_size,
                                                               SeededRng& rng);

// Class histogram of one client's samples.
[[nodiscard]] std::vector<std::size_t> label_histogram(std::span<const int> labels,
                                                       std::span<const std::size_t> indices,
                                                       std::size_t num_classes);

// Shannon entropy (nats) of a histogram; 0 for an empty histogram.
[[nodiscard]] double histogram_entropy(std::span<const std::size_t> histogram);

[[nodiscard]] double mean_label_entropy(const Partition& p, std::span<const int> labels,
                                        std::size_t num_classes);

[[nodiscard]] std::vector<std::size_t> distinct_class_counts(const Partition& p,
                                                             std::span<const int> labels,
                                                             std::size_t num_classes);

}  // namespace dsgd

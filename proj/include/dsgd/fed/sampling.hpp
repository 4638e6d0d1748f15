#pragma once

#include <cstddef>
#include <vector>

#include "dsgd/core/rng.hpp"

namespace dsgd {

// Number of participants per round, floor(p * m). Throws ConfigError when it
// is zero or p lies outside (0, 1].
[[nodiscard]] std::size_t participants_per_round(std::size_t m, double p);

// Uniform subset of floor(p * m) distinct client ids, returned in ascending
// (canonical) order.
[[nodiscard]] std::vector<std::size_t> sample_clients(std::size_t m, double p, SeededRng& rng);

}  // namespace dsgd

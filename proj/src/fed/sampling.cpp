#include "dsgd/fed/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsgd/core/error.hpp"

namespace dsgd {

std::size_t participants_per_round(std::size_t m, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("participation must lie in (0, 1]");
  // tolerate representation error such as 0.1 * 30 = 2.9999999999999996
  const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(m) + 1e-9));
  if (k == 0) throw ConfigError("participation selects no clients (floor(p * m) == 0)");
  return std::min(k, m);
}

std::vector<std::size_t> sample_clients(std::size_t m, double p, SeededRng& rng) {
  const std::size_t k = participants_per_round(m, p);
  std::vector<std::size_t> ids(m);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (k == m) return ids;
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(m - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace dsgd

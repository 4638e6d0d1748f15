#include "dsgd/fed/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "dsgd/core/error.hpp"

namespace dsgd {

std::vector<std::size_t> Partition::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(client_indices.size());
  for (const auto& c : client_indices) out.push_back(c.size());
  return out;
}

namespace {

template <typename T>
void fisher_yates(std::vector<T>& v, SeededRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

// Index drawn with probability proportional to weights[k]; weights sum > 0.
std::size_t draw_weighted(std::span<const double> weights, double total, SeededRng& rng) {
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (u < acc) return k;
  }
  return last_positive;
}

}  // namespace

Partition dirichlet_partition(std::span<const int> labels, std::size_t num_classes, std::size_t m,
                              double alpha, SeededRng& rng,
                              std::optional<std::vector<std::size_t>> quotas) {
  const std::size_t n = labels.size();
  if (m == 0) throw ConfigError("partition: need at least one client");
  if (!(alpha > 0.0)) throw ConfigError("partition: alpha must be > 0");
  if (m > n) {
    throw ConfigError("partition: " + std::to_string(m) + " clients but only " +
                      std::to_string(n) + " samples");
  }
  if (num_classes == 0) throw ConfigError("partition: num_classes must be >= 1");

  std::vector<std::size_t> quota;
  if (quotas) {
    if (quotas->size() != m) throw ConfigError("partition: quota count differs from client count");
    quota = *quotas;
    const std::size_t total = std::accumulate(quota.begin(), quota.end(), std::size_t{0});
    if (total > n) throw ConfigError("partition: quotas exceed dataset size");
    for (std::size_t q : quota) {
      if (q == 0) throw ConfigError("partition: every client needs at least one sample");
    }
  } else {
    quota.assign(m, n / m);
  }

  std::vector<std::vector<std::size_t>> pools(num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw ConfigError("partition: label out of range");
    }
    pools[static_cast<std::size_t>(y)].push_back(i);
  }
  for (auto& pool : pools) fisher_yates(pool, rng);

  Partition out;
  out.alpha = alpha;
  out.class_prior.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    out.class_prior[c] = static_cast<double>(pools[c].size()) / static_cast<double>(n);
  }
  out.client_indices.resize(m);

  std::vector<double> q(num_classes), w(num_classes);
  for (std::size_t client = 0; client < m; ++client) {
    // q ~ Dirichlet(alpha * prior) via normalized gamma draws
    double qsum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double shape = alpha * out.class_prior[c];
      q[c] = shape > 0.0 ? std::gamma_distribution<double>(shape, 1.0)(rng) : 0.0;
      qsum += q[c];
    }
    if (qsum > 0.0 && std::isfinite(qsum)) {
      for (double& v : q) v /= qsum;
    } else {
      // every gamma draw underflowed: the small-alpha limit is one-hot
      std::fill(q.begin(), q.end(), 0.0);
      q[draw_weighted(out.class_prior, 1.0, rng)] = 1.0;
    }

    // per-class counts: largest-remainder rounding of q * quota
    auto& mine = out.client_indices[client];
    mine.reserve(quota[client]);
    const double want = static_cast<double>(quota[client]);
    std::vector<std::size_t> take(num_classes);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      const double exact = q[c] * want;
      take[c] = static_cast<std::size_t>(std::floor(exact));
      assigned += take[c];
      remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < quota[client] && k < remainders.size(); ++k, ++assigned) {
      ++take[remainders[k].second];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
      for (std::size_t k = 0; k < take[c] && !pools[c].empty() && mine.size() < quota[client]; ++k) {
        mine.push_back(pools[c].back());
        pools[c].pop_back();
      }
    }
    // classes that ran dry: draw the shortfall from what is left
    while (mine.size() < quota[client]) {
      double total = 0.0;
      for (std::size_t c = 0; c < num_classes; ++c) {
        w[c] = pools[c].empty() ? 0.0 : q[c];
        total += w[c];
      }
      if (!(total > 0.0)) {
        total = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
          w[c] = static_cast<double>(pools[c].size());
          total += w[c];
        }
      }
      const std::size_t c = draw_weighted(w, total, rng);
      mine.push_back(pools[c].back());
      pools[c].pop_back();
    }
  }
  return out;
}

std::vector<std::size_t> unequal_partition_sizes(std::size_t m, std::size_t n_min,
                                                 std::size_t n_max, std::size_t dataset_size,
                                                 SeededRng& rng) {
  if (n_min > n_max) throw ConfigError("unequal sizes: n_min > n_max");
  if (n_min == 0) throw ConfigError("unequal sizes: n_min must be >= 1");
  std::vector<std::size_t> out(m);
  std::size_t total = 0;
  for (auto& c : out) {
    c = n_min + rng.below(n_max - n_min + 1);
    total += c;
  }
  if (total > dataset_size) {
    throw ConfigError("unequal sizes: " + std::to_string(total) + " samples requested, dataset has " +
                      std::to_string(dataset_size));
  }
  return out;
}

std::vector<std::size_t> label_histogram(std::span<const int> labels,
                                         std::span<const std::size_t> indices,
                                         std::size_t num_classes) {
  std::vector<std::size_t> h(num_classes, 0);
  for (std::size_t i : indices) ++h.at(static_cast<std::size_t>(labels[i]));
  return h;
}

double histogram_entropy(std::span<const std::size_t> histogram) {
  const double total =
      static_cast<double>(std::accumulate(histogram.begin(), histogram.end(), std::size_t{0}));
  if (total == 0.0) return 0.0;
  double e = 0.0;
  for (std::size_t k : histogram) {
    if (k == 0) continue;
    const double p = static_cast<double>(k) / total;
    e -= p * std::log(p);
  }
  return e;
}

double mean_label_entropy(const Partition& p, std::span<const int> labels, std::size_t num_classes) {
  double s = 0.0;
  for (const auto& idx : p.client_indices) {
    s += histogram_entropy(label_histogram(labels, idx, num_classes));
  }
  return s / static_cast<double>(p.num_clients());
}

std::vector<std::size_t> distinct_class_counts(const Partition& p, std::span<const int> labels,
                                               std::size_t num_classes) {
  std::vector<std::size_t> out;
  for (const auto& idx : p.client_indices) {
    const auto h = label_histogram(labels, idx, num_classes);
    out.push_back(static_cast<std::size_t>(std::count_if(h.begin(), h.end(), [](std::size_t k) { return k > 0; })));
  }
  return out;
}

}  // namespace dsgd

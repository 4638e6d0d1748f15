#pragma once

// Hand-rolled generators for the property tests.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dsgd/core/param_vector.hpp"
#include "dsgd/core/rng.hpp"
#include "dsgd/models/dataset.hpp"

namespace testing {

inline dsgd::ParamVector random_vector(dsgd::SeededRng& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  dsgd::ParamVector v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

inline dsgd::Dataset random_dataset(dsgd::SeededRng& rng, std::size_t n, std::size_t features,
                                    std::size_t classes, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  dsgd::Dataset d;
  d.feature_dim = features;
  d.num_classes = classes;
  std::vector<double> row(features);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : row) x = normal(rng);
    d.push_back(row, static_cast<int>(rng.below(classes)));
  }
  return d;
}

// Regression data with real-valued targets.
inline dsgd::Dataset random_regression(dsgd::SeededRng& rng, std::size_t n, std::size_t features) {
  dsgd::Dataset d = random_dataset(rng, n, features, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) d.targets.push_back(normal(rng));
  return d;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("dsgd_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_file(const std::filesystem::path& p);

}  // namespace testing

#include <fstream>
#include <sstream>

inline std::string testing::read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

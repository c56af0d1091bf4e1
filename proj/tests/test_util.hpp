#pragma once

#include <cstddef>
#include <algorithm>
#include <random>
#include <vector>

#include "knnshap/dataset.hpp"

namespace knnshap::testing {

// Random points in [0,1]^dim with class labels in 0..classes-1 or real labels
// in [-2, 2].
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                              Task task, int classes = 3) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> real_label(-2.0, 2.0);
  std::uniform_int_distribution<int> class_label(0, classes - 1);
  std::vector<double> x(n * dim);
  for (double& v : x) v = unit(rng);
  std::vector<double> y(n);
  for (double& v : y) {
    v = task == Task::classification ? class_label(rng) : real_label(rng);
  }
  return Dataset(std::move(x), dim, std::move(y), task);
}

inline Dataset random_queries(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                              Task task, int classes = 3) {
  return random_dataset(rng, n, dim, task, classes);
}

// 1-D points at 1, 2, ..., n so rank r is point r-1 for a query at 0.
inline Dataset line_dataset(std::vector<double> labels, Task task) {
  std::vector<double> x(labels.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
  return Dataset(std::move(x), 1, std::move(labels), task);
}

inline QuerySet origin_query(double label, Task task, std::size_t dim = 1) {
  return QuerySet(std::vector<double>(dim, 0.0), dim, {label}, task);
}

// Owner ids with every seller used at least once.
inline std::vector<std::size_t> random_owners(std::mt19937_64& rng, std::size_t n,
                                              std::size_t sellers) {
  std::vector<std::size_t> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[i] = i < sellers ? i : rng() % sellers;
  std::shuffle(owner.begin(), owner.end(), rng);
  return owner;
}

}  // namespace knnshap::testing

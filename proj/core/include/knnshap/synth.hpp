#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "knnshap/dataset.hpp"

namespace knnshap {

struct SynthConfig {
  Task task = Task::classification;
  std::size_t n = 1000;
  std::size_t d = 32;
  std::size_t classes = 2;
  std::size_t clusters = 0;  // 0: 8 per class
  double contrast = 1.0;     // scales the spread of cluster centres
  double label_noise = 0.1;  // regression noise sd
  std::uint64_t seed = 0;

  void validate() const;
};

// Gaussian mixture: unit-variance clusters around centres drawn with standard
// deviation `contrast`. Classification labels follow the cluster (cluster c
// belongs to class c mod classes); regression labels are a random linear map
// plus Gaussian noise.
Dataset synthesize(const SynthConfig& config);

// Training set of config.n points and `test_n` queries from the same mixture.
std::pair<Dataset, QuerySet> synthesize_split(const SynthConfig& config, std::size_t test_n);

}  // namespace knnshap

#include "knnshap/dataset.hpp"

#include <cmath>
#include <string>

#include "knnshap/errors.hpp"

namespace knnshap {

Dataset::Dataset(std::vector<double> features, std::size_t dim,
                 std::vector<double> labels, Task task)
    : features_(std::move(features)),
      dim_(dim),
      labels_(std::move(labels)),
      task_(task) {
  if (labels_.empty()) throw DataError("dataset must contain at least one row");
  if (dim_ == 0) throw DataError("feature dimension must be positive");
  if (features_.size() != labels_.size() * dim_) {
    throw DataError("feature matrix has " + std::to_string(features_.size()) +
                    " values, expected " + std::to_string(labels_.size()) +
                    " rows of dimension " + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!std::isfinite(features_[i])) {
      throw DataError("non-finite feature in row " + std::to_string(i / dim_));
    }
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!std::isfinite(labels_[i])) {
      throw DataError("non-finite label in row " + std::to_string(i));
    }
    if (task_ == Task::classification && labels_[i] != std::round(labels_[i])) {
      throw DataError("class label in row " + std::to_string(i) +
                      " is not an integer");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> features;
  std::vector<double> labels;
  features.reserve(rows.size() * dim_);
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    auto x = row(r);
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(labels_[r]);
  }
  return Dataset(std::move(features), dim_, std::move(labels), task_);
}

SellerMap::SellerMap(std::vector<std::size_t> owner) : owner_(std::move(owner)) {
  std::size_t sellers = 0;
  for (std::size_t s : owner_) sellers = std::max(sellers, s + 1);
  points_.resize(sellers);
  for (std::size_t i = 0; i < owner_.size(); ++i) points_[owner_[i]].push_back(i);
  for (std::size_t s = 0; s < sellers; ++s) {
    if (points_[s].empty()) {
      throw DataError("seller " + std::to_string(s + 1) + " owns no points");
    }
  }
}

}  // namespace knnshap

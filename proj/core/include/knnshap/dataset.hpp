#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace knnshap {

enum class Task { classification, regression };

// Row-major feature matrix plus one label per row. Class labels are stored as
// doubles holding integral ids and compared exactly.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> features, std::size_t dim,
          std::vector<double> labels, Task task);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  Task task() const { return task_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  double label(std::size_t i) const { return labels_[i]; }

  const std::vector<double>& features() const { return features_; }
  const std::vector<double>& labels() const { return labels_; }

  // Rows at the given indices, in that order.
  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<double> features_;
  std::size_t dim_ = 0;
  std::vector<double> labels_;
  Task task_ = Task::classification;
};

// Test points share the training-set layout.
using QuerySet = Dataset;

struct Query {
  std::span<const double> x;
  double y = 0.0;
};

inline Query query_at(const QuerySet& queries, std::size_t j) {
  return {queries.row(j), queries.label(j)};
}

// Owner of every training point. Sellers are 0-based internally; file formats
// use 1..M.
class SellerMap {
 public:
  SellerMap() = default;
  explicit SellerMap(std::vector<std::size_t> owner);

  std::size_t seller_count() const { return points_.size(); }
  std::size_t point_count() const { return owner_.size(); }
  std::size_t owner(std::size_t point) const { return owner_[point]; }
  const std::vector<std::size_t>& points_of(std::size_t seller) const {
    return points_[seller];
  }
  const std::vector<std::size_t>& owners() const { return owner_; }

 private:
  std::vector<std::size_t> owner_;
  std::vector<std::vector<std::size_t>> points_;
};

}  // namespace knnshap

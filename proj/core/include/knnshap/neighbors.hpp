#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "knnshap/dataset.hpp"

namespace knnshap {

// Squared l2 distance. Rankings compare squared distances so that no two
// distinct squared values collapse after a square root.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Orders (squared distance, index) pairs: nearer first, lower index on ties.
struct Neighbor {
  double dist2 = 0.0;
  std::size_t index = 0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// All training points sorted by distance to one query.
struct RankedNeighbors {
  std::vector<std::size_t> order;  // order[r] = point with rank r (0-based)
  std::vector<double> distances;   // l2 distance of order[r]
};

// Throws DataError when the query dimension differs from the dataset's.
RankedNeighbors rank_by_distance(const Dataset& dataset,
                                 std::span<const double> query);

// Same ordering restricted to `candidates`, truncated to `limit` entries.
RankedNeighbors rank_candidates(const Dataset& dataset,
                                std::span<const double> query,
                                std::span<const std::size_t> candidates,
                                std::size_t limit);

}  // namespace knnshap

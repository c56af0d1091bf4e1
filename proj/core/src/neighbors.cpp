#include "knnshap/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "knnshap/errors.hpp"

namespace knnshap {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

namespace {

void check_dim(const Dataset& dataset, std::span<const double> query) {
  if (query.size() != dataset.dim()) {
    throw DataError("query has dimension " + std::to_string(query.size()) +
                    ", dataset has " + std::to_string(dataset.dim()));
  }
}

RankedNeighbors unpack(const std::vector<Neighbor>& sorted) {
  RankedNeighbors out;
  out.order.reserve(sorted.size());
  out.distances.reserve(sorted.size());
  for (const Neighbor& nb : sorted) {
    out.order.push_back(nb.index);
    out.distances.push_back(std::sqrt(nb.dist2));
  }
  return out;
}

}  // namespace

RankedNeighbors rank_by_distance(const Dataset& dataset,
                                 std::span<const double> query) {
  check_dim(dataset, query);
  std::vector<Neighbor> all(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    all[i] = {squared_distance(dataset.row(i), query), i};
  }
  std::sort(all.begin(), all.end());
  return unpack(all);
}

RankedNeighbors rank_candidates(const Dataset& dataset,
                                std::span<const double> query,
                                std::span<const std::size_t> candidates,
                                std::size_t limit) {
  check_dim(dataset, query);
  std::vector<Neighbor> found(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    found[c] = {squared_distance(dataset.row(candidates[c]), query),
                candidates[c]};
  }
  const std::size_t keep = std::min(limit, found.size());
  std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(keep),
                    found.end());
  found.resize(keep);
  return unpack(found);
}

}  // namespace knnshap

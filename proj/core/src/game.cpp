#include "knnshap/game.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "knnshap/errors.hpp"

namespace knnshap {

void UniformWeights::weights(std::span<const double> distances, std::size_t k,
                             std::span<double> out) const {
  for (std::size_t i = 0; i < distances.size(); ++i) {
    out[i] = 1.0 / static_cast<double>(k);
  }
}

void InverseDistanceWeights::weights(std::span<const double> distances,
                                     std::size_t /*k*/,
                                     std::span<double> out) const {
  const auto zeros = static_cast<std::size_t>(
      std::count(distances.begin(), distances.end(), 0.0));
  if (zeros > 0) {
    for (std::size_t i = 0; i < distances.size(); ++i) {
      out[i] = distances[i] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
    }
    return;
  }
  double total = 0.0;
  for (double d : distances) total += 1.0 / d;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    out[i] = (1.0 / distances[i]) / total;
  }
}

std::shared_ptr<const WeightRule> make_weight_rule(const std::string& name) {
  if (name == "inverse") return std::make_shared<InverseDistanceWeights>();
  if (name == "uniform") return std::make_shared<UniformWeights>();
  throw UsageError("unknown weight rule '" + name +
                   "' (expected inverse or uniform)");
}

void GameSpec::validate(std::size_t n) const {
  if (k < 1) throw UsageError("K must be at least 1");
  if (k > n) {
    throw UsageError("K=" + std::to_string(k) + " exceeds dataset size " +
                     std::to_string(n));
  }
  if (sellers && sellers->point_count() != n) {
    throw UsageError("seller map covers " +
                     std::to_string(sellers->point_count()) +
                     " points, dataset has " + std::to_string(n));
  }
}

namespace {

// Utility of the selected neighbours, nearest first, at most K of them.
double evaluate(Task task, std::size_t k, const WeightRule* rule,
                std::span<const double> labels,
                std::span<const double> distances, double target) {
  const std::size_t n = labels.size();
  if (n == 0) return 0.0;
  if (rule == nullptr) {
    const double inv_k = 1.0 / static_cast<double>(k);
    if (task == Task::classification) {
      std::size_t hits = 0;
      for (double y : labels) hits += (y == target) ? 1 : 0;
      return static_cast<double>(hits) * inv_k;
    }
    double sum = 0.0;
    for (double y : labels) sum += y;
    const double err = sum * inv_k - target;
    return -err * err;
  }
  // K is small; the stack buffer covers every practical case.
  std::array<double, 64> small{};
  std::vector<double> large;
  std::span<double> w;
  if (n <= small.size()) {
    w = std::span<double>(small.data(), n);
  } else {
    large.resize(n);
    w = large;
  }
  rule->weights(distances, k, w);
  if (task == Task::classification) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += labels[i] == target ? w[i] : 0.0;
    return sum;
  }
  double pred = 0.0;
  for (std::size_t i = 0; i < n; ++i) pred += w[i] * labels[i];
  const double err = pred - target;
  return -err * err;
}

}  // namespace

RankedGame::RankedGame(const Dataset& dataset, const Query& query,
                       const GameSpec& spec)
    : RankedGame(dataset, query, spec, rank_by_distance(dataset, query.x)) {}

RankedGame::RankedGame(const Dataset& dataset, const Query& query,
                       const GameSpec& spec, RankedNeighbors ranking)
    : ranking_(std::move(ranking)),
      target_(query.y),
      task_(spec.task),
      k_(spec.k),
      weights_(spec.weights.get()) {
  labels_.reserve(ranking_.order.size());
  for (std::size_t idx : ranking_.order) labels_.push_back(dataset.label(idx));
}

double RankedGame::value(std::span<const std::size_t> ranks) const {
  const std::size_t n = std::min(k_, ranks.size());
  std::array<double, 64> ys{};
  std::array<double, 64> ds{};
  std::vector<double> ys_large;
  std::vector<double> ds_large;
  std::span<double> y;
  std::span<double> d;
  if (n <= ys.size()) {
    y = std::span<double>(ys.data(), n);
    d = std::span<double>(ds.data(), n);
  } else {
    ys_large.resize(n);
    ds_large.resize(n);
    y = ys_large;
    d = ds_large;
  }
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels_[ranks[i]];
    d[i] = ranking_.distances[ranks[i]];
  }
  return evaluate(task_, k_, weights_, y, d, target_);
}

std::vector<double> RankedGame::to_points(std::span<const double> by_rank) const {
  std::vector<double> out(ranking_.order.size(), 0.0);
  for (std::size_t r = 0; r < by_rank.size(); ++r) {
    out[ranking_.order[r]] = by_rank[r];
  }
  return out;
}

double utility(const Dataset& dataset, std::span<const std::size_t> subset,
               const Query& query, const GameSpec& spec) {
  if (subset.empty()) return 0.0;
  std::vector<Neighbor> members;
  members.reserve(subset.size());
  for (std::size_t i : subset) {
    if (i >= dataset.size()) {
      throw UsageError("point index " + std::to_string(i) + " out of range");
    }
    members.push_back({squared_distance(dataset.row(i), query.x), i});
  }
  const std::size_t n = std::min(spec.k, members.size());
  std::partial_sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n),
                    members.end());
  std::vector<double> labels(n);
  std::vector<double> distances(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = dataset.label(members[i].index);
    distances[i] = std::sqrt(members[i].dist2);
  }
  return evaluate(spec.task, spec.k, spec.weights.get(), labels, distances,
                  query.y);
}

double seller_utility(const Dataset& dataset, const Query& query,
                      const GameSpec& spec,
                      std::span<const std::size_t> sellers) {
  if (!spec.sellers) throw UsageError("seller utility needs a seller map");
  std::vector<std::size_t> points;
  for (std::size_t s : sellers) {
    const auto& owned = spec.sellers->points_of(s);
    points.insert(points.end(), owned.begin(), owned.end());
  }
  return utility(dataset, points, query, spec);
}

double composite_utility(const Dataset& dataset, const Query& query,
                         const GameSpec& spec, const Coalition& coalition) {
  if (!coalition.analyst || coalition.members.empty()) return 0.0;
  if (spec.sellers) return seller_utility(dataset, query, spec, coalition.members);
  return utility(dataset, coalition.members, query, spec);
}

std::vector<double> aggregate_over_queries(
    std::span<const std::vector<double>> per_query) {
  if (per_query.empty()) throw UsageError("no per-query values to aggregate");
  std::vector<double> mean(per_query.front().size(), 0.0);
  for (const auto& row : per_query) {
    if (row.size() != mean.size()) {
      throw UsageError("per-query value rows differ in length");
    }
    for (std::size_t i = 0; i < row.size(); ++i) mean[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(per_query.size());
  for (double& v : mean) v *= inv;
  return mean;
}

}  // namespace knnshap

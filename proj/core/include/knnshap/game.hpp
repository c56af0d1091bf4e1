#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knnshap/dataset.hpp"
#include "knnshap/neighbors.hpp"

namespace knnshap {

// Maps the distances of the selected neighbours (nearest first, at most K of
// them) to one weight each.
class WeightRule {
 public:
  virtual ~WeightRule() = default;
  virtual void weights(std::span<const double> distances, std::size_t k,
                       std::span<double> out) const = 0;
  virtual std::string name() const = 0;
};

// w_k = 1/K regardless of distance; turns the weighted utilities back into
// the unweighted ones.
class UniformWeights final : public WeightRule {
 public:
  void weights(std::span<const double> distances, std::size_t k,
               std::span<double> out) const override;
  std::string name() const override { return "uniform"; }
};

// w_k proportional to 1/d_k over the selected neighbours. Neighbours at
// distance zero share the whole weight equally.
class InverseDistanceWeights final : public WeightRule {
 public:
  void weights(std::span<const double> distances, std::size_t k,
               std::span<double> out) const override;
  std::string name() const override { return "inverse"; }
};

std::shared_ptr<const WeightRule> make_weight_rule(const std::string& name);

struct GameSpec {
  Task task = Task::classification;
  std::size_t k = 1;
  std::shared_ptr<const WeightRule> weights;  // null: unweighted KNN
  bool composite = false;                     // add the analyst as a player
  std::optional<SellerMap> sellers;           // value sellers instead of points

  bool weighted() const { return weights != nullptr; }

  // Data players: points, or sellers when a seller map is present.
  std::size_t data_players(std::size_t points) const {
    return sellers ? sellers->seller_count() : points;
  }

  // Throws UsageError if K or the seller map do not fit a dataset of n points.
  void validate(std::size_t n) const;
};

// Utility of one query evaluated on sets of ranks. Rank r is the r-th nearest
// training point (0-based). Only the first min(K, |S|) ranks of a sorted set
// matter.
class RankedGame {
 public:
  RankedGame(const Dataset& dataset, const Query& query, const GameSpec& spec);
  RankedGame(const Dataset& dataset, const Query& query, const GameSpec& spec,
             RankedNeighbors ranking);

  std::size_t size() const { return labels_.size(); }
  std::size_t k() const { return k_; }
  Task task() const { return task_; }
  bool weighted() const { return weights_ != nullptr; }
  const RankedNeighbors& ranking() const { return ranking_; }
  double label(std::size_t rank) const { return labels_[rank]; }
  double target() const { return target_; }
  bool matches(std::size_t rank) const { return labels_[rank] == target_; }

  // `ranks` must be ascending; entries beyond the K-th are ignored.
  double value(std::span<const std::size_t> ranks) const;

  // Values indexed by rank scattered back to original point indices.
  std::vector<double> to_points(std::span<const double> by_rank) const;

 private:
  RankedNeighbors ranking_;
  std::vector<double> labels_;
  double target_;
  Task task_;
  std::size_t k_;
  const WeightRule* weights_;
};

// KNN utility of the points `subset` (any order) for one query. The empty set
// has utility 0 for every variant.
double utility(const Dataset& dataset, std::span<const std::size_t> subset,
               const Query& query, const GameSpec& spec);

// Data-player coalition plus the analyst flag of the composite game.
struct Coalition {
  std::vector<std::size_t> members;  // points, or sellers with a seller map
  bool analyst = false;
};

// Zero unless the analyst and at least one data player are present; otherwise
// the utility of all points held by the members.
double composite_utility(const Dataset& dataset, const Query& query,
                         const GameSpec& spec, const Coalition& coalition);

// Utility of the points owned by the given sellers.
double seller_utility(const Dataset& dataset, const Query& query,
                      const GameSpec& spec, std::span<const std::size_t> sellers);

// Column-wise mean of per-query value rows.
std::vector<double> aggregate_over_queries(
    std::span<const std::vector<double>> per_query);

struct Guarantee {
  double epsilon = 0.0;
  double delta = 0.0;
};

struct Diagnostics {
  double runtime_ms = 0.0;
  std::optional<std::size_t> permutations;
  std::optional<std::size_t> tables;
  std::optional<double> candidates_mean;
  bool incomplete = false;
  std::vector<std::string> warnings;
  std::map<std::string, double> extra;
};

struct ValuationResult {
  std::vector<double> values;  // one per data player
  std::optional<double> analyst_value;
  std::string method;
  std::optional<Guarantee> guarantee;
  Diagnostics diagnostics;
};

}  // namespace knnshap

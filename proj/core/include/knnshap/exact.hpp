#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "knnshap/dataset.hpp"
#include "knnshap/game.hpp"

namespace knnshap {

struct TruncationConfig {
  double epsilon = 0.1;

  // K* = max(K, ceil(1/epsilon)).
  std::size_t k_star(std::size_t k) const;
};

// Caps subset enumeration in the O(N^K) / O(M^K) algorithms.
struct WorkBudget {
  double max_subsets = 1e7;         // weighted point games, per recursion step
  double max_seller_subsets = 1e6;  // seller games, seller coalitions of size <= K
  bool override_budget = false;
};

// Values of the data players and, for composite games, of the analyst.
struct GameValues {
  std::vector<double> values;
  std::optional<double> analyst;
};

struct CompositeValues {
  std::vector<double> values;
  double analyst_value = 0.0;
};

// Rank-space recursions. Element r refers to the (r+1)-th nearest point.
std::vector<double> classification_by_rank(std::span<const std::uint8_t> match,
                                           std::size_t k);
std::vector<double> regression_by_rank(std::span<const double> labels,
                                       double target, std::size_t k);
std::vector<double> composite_classification_by_rank(
    std::span<const std::uint8_t> match, std::size_t k);
std::vector<double> composite_regression_by_rank(std::span<const double> labels,
                                                 double target, std::size_t k);

// Truncated recursion over the first match.size() ranks of a dataset with
// `total` points: zero from rank K* on, the exact recursion below it. When
// every point is known and K* >= total no truncation happens. A list shorter
// than K* truncates at its own length.
std::vector<double> truncated_by_rank(std::span<const std::uint8_t> match,
                                      std::size_t k, std::size_t k_star,
                                      std::size_t total);

// Enumeration over neighbour sets of size < K, weighted by the number of
// coalitions sharing each set. Works for any utility in `game`.
std::vector<double> enumerated_by_rank(const RankedGame& game, bool composite,
                                       const WorkBudget& budget);

// Subsets visited per recursion step of the weighted algorithm.
double weighted_work_estimate(std::size_t n, std::size_t k);

// Single-query valuations, values indexed by original point.
std::vector<double> shapley_unweighted_classification(const Dataset& dataset,
                                                      const Query& query,
                                                      std::size_t k);
std::vector<double> shapley_unweighted_regression(const Dataset& dataset,
                                                  const Query& query,
                                                  std::size_t k);
std::vector<double> shapley_truncated(const Dataset& dataset, const Query& query,
                                      std::size_t k,
                                      const TruncationConfig& config);
std::vector<double> shapley_weighted(const Dataset& dataset, const Query& query,
                                     const GameSpec& spec,
                                     const WorkBudget& budget = {});
CompositeValues shapley_composite(const Dataset& dataset, const Query& query,
                                  const GameSpec& spec,
                                  const WorkBudget& budget = {});

// Dispatches a single query to the algorithm matching `spec`.
GameValues value_query(const Dataset& dataset, const Query& query,
                       const GameSpec& spec, const WorkBudget& budget = {});

struct ExactOptions {
  WorkBudget budget;
  std::size_t threads = 0;  // 0: all cores
};

// Averages per-query values over the query set. Queries are evaluated
// concurrently and merged in query order, so the thread count never changes
// the output.
ValuationResult value_exact(const Dataset& dataset, const QuerySet& queries,
                            const GameSpec& spec, const ExactOptions& options = {});

ValuationResult value_truncated(const Dataset& dataset, const QuerySet& queries,
                                std::size_t k, const TruncationConfig& config,
                                std::size_t threads = 0);

}  // namespace knnshap

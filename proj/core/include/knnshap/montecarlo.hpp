#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knnshap/dataset.hpp"
#include "knnshap/game.hpp"

namespace knnshap {

enum class Bound { hoeffding, bennett, bennett_approx, heuristic };

Bound parse_bound(const std::string& name);
std::string bound_name(Bound bound);

struct McConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  // Bound r on |phi|, so marginal contributions lie in [-r, r]. Unset: the
  // default for the game (see default_range).
  std::optional<double> range;
  Bound bound = Bound::bennett;
  std::size_t max_permutations = 1'000'000;
  std::uint64_t seed = 0;
  double heuristic_divisor = 50.0;  // stop once the largest change is < eps / divisor
  std::size_t heuristic_floor = 100;
  std::size_t threads = 0;

  void validate() const;
};

// ceil(width^2 / (2 eps^2) * ln(2n / delta)) for variables spanning `width`.
std::size_t hoeffding_count(double width, double epsilon, double delta, std::size_t n);

// Hoeffding count for phi in [-r, r], i.e. width 2r.
std::size_t hoeffding_permutations(std::size_t n, const McConfig& config);

// q_i = 0 for i <= K, (i - K) / i otherwise (1-based i).
std::vector<double> bennett_q(std::size_t n, std::size_t k);

// h(u) = (1 + u) ln(1 + u) - u.
double bennett_h(double u);

// sum_i exp(-T (1 - q_i^2) h(eps / ((1 - q_i^2) r))).
double bennett_lhs(double t, std::size_t n, std::size_t k, const McConfig& config);

// Smallest T with bennett_lhs(T) <= delta / 2, by bisection.
std::size_t bennett_permutations(std::size_t n, std::size_t k, const McConfig& config);

// ceil(ln(2K / delta) / h(eps / r)).
std::size_t bennett_approx_permutations(std::size_t k, const McConfig& config);

// Range used when the config leaves it unset: 1/K for unweighted point
// classification, 1 for other classification games, and twice the largest
// utility magnitude reachable from the label extremes for regression.
double default_range(const Dataset& dataset, const QuerySet& queries,
                     const GameSpec& spec);

// K nearest members of a growing point set, kept in a bounded max-heap on
// rank, with the prefix utility updated on every change.
class PermutationState {
 public:
  explicit PermutationState(const RankedGame& game);

  void reset();
  // Adds the point of rank `rank`. Returns true if the K-nearest set changed.
  bool insert(std::size_t rank);
  double value() const { return value_; }
  // Current K-nearest ranks, ascending.
  std::vector<std::size_t> nearest() const;

 private:
  void refresh();

  const RankedGame* game_;
  std::vector<std::size_t> heap_;
  std::vector<std::size_t> sorted_;
  bool incremental_;
  double sum_ = 0.0;
  double value_ = 0.0;
};

// Permutation-sampling estimate. The permuted players are points, sellers, or
// data players plus the analyst, following `spec`.
ValuationResult estimate_shapley_mc(const Dataset& dataset, const QuerySet& queries,
                                    const GameSpec& spec, const McConfig& config);

// Same estimator averaged over every ordering of the players (at most 8).
ValuationResult shapley_all_permutations(const Dataset& dataset, const QuerySet& queries,
                                         const GameSpec& spec);

// Permutation count the configured bound asks for; 0 in heuristic mode.
std::size_t planned_permutations(std::size_t players, const GameSpec& spec,
                                 const McConfig& config);

}  // namespace knnshap

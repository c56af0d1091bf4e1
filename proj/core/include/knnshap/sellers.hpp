#pragma once

#include <cstddef>
#include <vector>

#include "knnshap/dataset.hpp"
#include "knnshap/exact.hpp"
#include "knnshap/game.hpp"

namespace knnshap {

// Seller coalitions of size <= K that the enumeration visits.
double seller_work_estimate(std::size_t sellers, std::size_t k);

// Exact Shapley value of each seller for one query. `spec` supplies K, the
// task, the weight rule and the seller map. Seller subsets with at most K
// members are enumerated, so the cost is O(M^K).
std::vector<double> shapley_per_seller(const Dataset& dataset, const Query& query,
                                       const GameSpec& spec,
                                       const WorkBudget& budget = {});

// Same game with the analyst added as one more player.
CompositeValues shapley_per_seller_composite(const Dataset& dataset,
                                             const Query& query,
                                             const GameSpec& spec,
                                             const WorkBudget& budget = {});

}  // namespace knnshap

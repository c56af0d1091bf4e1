#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "knnshap/dataset.hpp"
#include "knnshap/game.hpp"

namespace knnshap::oracle {

// Utility of a coalition given as ascending player ids.
using CoalitionUtility = std::function<double(std::span<const std::size_t>)>;

inline constexpr std::size_t kSubsetCap = 20;
inline constexpr std::size_t kPermutationCap = 8;
inline constexpr std::size_t kLemmaCap = 12;

// Binomial-weighted sum of marginal contributions over all 2^n coalitions.
std::vector<double> shapley_bruteforce_subsets(std::size_t players,
                                               const CoalitionUtility& utility);

// Average marginal contribution over all n! join orders.
std::vector<double> shapley_bruteforce_permutations(std::size_t players,
                                                    const CoalitionUtility& utility);

// |(s_i - s_j) - (1/(n-1)) sum_S [v(S+i) - v(S+j)] / C(n-2, |S|)| with both
// sides enumerated. Requires i != j and n >= 2.
double check_difference_lemma(std::size_t players, const CoalitionUtility& utility,
                              std::size_t i, std::size_t j);

// The right-hand side of the difference identity alone.
double difference_lemma_rhs(std::size_t players, const CoalitionUtility& utility,
                            std::size_t i, std::size_t j);

// Players are training points.
CoalitionUtility point_game(const Dataset& dataset, const Query& query,
                            const GameSpec& spec);

// Players are the sellers of spec.sellers.
CoalitionUtility seller_game(const Dataset& dataset, const Query& query,
                             const GameSpec& spec);

// Data players (points or sellers) followed by the analyst as the last player.
CoalitionUtility composite_game(const Dataset& dataset, const Query& query,
                                const GameSpec& spec);

// Player count and game matching `spec` (composite and seller flags honoured).
std::size_t player_count(const Dataset& dataset, const GameSpec& spec);
CoalitionUtility game_for(const Dataset& dataset, const Query& query,
                          const GameSpec& spec);

// Brute-force values for every query, averaged. The analyst, when present, is
// the last entry.
std::vector<double> value_bruteforce(const Dataset& dataset, const QuerySet& queries,
                                     const GameSpec& spec);

}  // namespace knnshap::oracle

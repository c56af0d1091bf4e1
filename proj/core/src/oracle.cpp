#include "knnshap/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "knnshap/errors.hpp"

namespace knnshap::oracle {
namespace {

void check_cap(std::size_t players, std::size_t cap, const char* what) {
  if (players > cap) {
    throw UsageError(std::string(what) + " supports at most " + std::to_string(cap) +
                     " players, got " + std::to_string(players));
  }
  if (players == 0) throw UsageError(std::string(what) + " needs at least one player");
}

std::vector<std::size_t> members_of(std::uint64_t mask, std::size_t players) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < players; ++p) {
    if (mask & (std::uint64_t{1} << p)) out.push_back(p);
  }
  return out;
}

// Utility of every coalition, indexed by bit mask.
std::vector<double> tabulate(std::size_t players, const CoalitionUtility& utility) {
  const std::uint64_t count = std::uint64_t{1} << players;
  std::vector<double> table(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    table[mask] = utility(members_of(mask, players));
  }
  return table;
}

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

double binomial(std::size_t n, std::size_t k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace

std::vector<double> shapley_bruteforce_subsets(std::size_t players,
                                               const CoalitionUtility& utility) {
  check_cap(players, kSubsetCap, "subset enumeration");
  const std::vector<double> table = tabulate(players, utility);
  std::vector<double> weight(players);
  for (std::size_t size = 0; size < players; ++size) {
    weight[size] = factorial(size) * factorial(players - size - 1) / factorial(players);
  }
  std::vector<double> values(players, 0.0);
  for (std::uint64_t mask = 0; mask < table.size(); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t p = 0; p < players; ++p) {
      const std::uint64_t bit = std::uint64_t{1} << p;
      if (mask & bit) continue;
      values[p] += weight[size] * (table[mask | bit] - table[mask]);
    }
  }
  return values;
}

std::vector<double> shapley_bruteforce_permutations(std::size_t players,
                                                    const CoalitionUtility& utility) {
  check_cap(players, kPermutationCap, "permutation enumeration");
  const std::vector<double> table = tabulate(players, utility);
  std::vector<std::size_t> order(players);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> values(players, 0.0);
  std::size_t count = 0;
  do {
    std::uint64_t mask = 0;
    for (std::size_t p : order) {
      const std::uint64_t next = mask | (std::uint64_t{1} << p);
      values[p] += table[next] - table[mask];
      mask = next;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : values) v /= static_cast<double>(count);
  return values;
}

double difference_lemma_rhs(std::size_t players, const CoalitionUtility& utility,
                            std::size_t i, std::size_t j) {
  check_cap(players, kLemmaCap, "difference check");
  if (players < 2 || i == j || i >= players || j >= players) {
    throw UsageError("difference check needs two distinct players");
  }
  const std::vector<double> table = tabulate(players, utility);
  const std::uint64_t bi = std::uint64_t{1} << i;
  const std::uint64_t bj = std::uint64_t{1} << j;
  double sum = 0.0;
  for (std::uint64_t mask = 0; mask < table.size(); ++mask) {
    if (mask & (bi | bj)) continue;
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    sum += (table[mask | bi] - table[mask | bj]) / binomial(players - 2, size);
  }
  return sum / static_cast<double>(players - 1);
}

double check_difference_lemma(std::size_t players, const CoalitionUtility& utility,
                              std::size_t i, std::size_t j) {
  const double rhs = difference_lemma_rhs(players, utility, i, j);
  const std::vector<double> s = shapley_bruteforce_subsets(players, utility);
  return std::abs((s[i] - s[j]) - rhs);
}

CoalitionUtility point_game(const Dataset& dataset, const Query& query,
                            const GameSpec& spec) {
  return [&dataset, query, spec](std::span<const std::size_t> members) {
    return utility(dataset, members, query, spec);
  };
}

CoalitionUtility seller_game(const Dataset& dataset, const Query& query,
                             const GameSpec& spec) {
  if (!spec.sellers) throw UsageError("seller game needs a seller map");
  return [&dataset, query, spec](std::span<const std::size_t> members) {
    return seller_utility(dataset, query, spec, members);
  };
}

CoalitionUtility composite_game(const Dataset& dataset, const Query& query,
                                const GameSpec& spec) {
  const std::size_t analyst = spec.data_players(dataset.size());
  return [&dataset, query, spec, analyst](std::span<const std::size_t> members) {
    Coalition c;
    for (std::size_t p : members) {
      if (p == analyst) {
        c.analyst = true;
      } else {
        c.members.push_back(p);
      }
    }
    return composite_utility(dataset, query, spec, c);
  };
}

std::size_t player_count(const Dataset& dataset, const GameSpec& spec) {
  return spec.data_players(dataset.size()) + (spec.composite ? 1 : 0);
}

CoalitionUtility game_for(const Dataset& dataset, const Query& query,
                          const GameSpec& spec) {
  if (spec.composite) return composite_game(dataset, query, spec);
  if (spec.sellers) return seller_game(dataset, query, spec);
  return point_game(dataset, query, spec);
}

std::vector<double> value_bruteforce(const Dataset& dataset, const QuerySet& queries,
                                     const GameSpec& spec) {
  spec.validate(dataset.size());
  const std::size_t players = player_count(dataset, spec);
  std::vector<std::vector<double>> rows;
  rows.reserve(queries.size());
  for (std::size_t j = 0; j < queries.size(); ++j) {
    rows.push_back(
        shapley_bruteforce_subsets(players, game_for(dataset, query_at(queries, j), spec)));
  }
  return aggregate_over_queries(rows);
}

}  // namespace knnshap::oracle

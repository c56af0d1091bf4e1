#include "knnshap/sellers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "knnshap/combinatorics.hpp"
#include "knnshap/errors.hpp"

namespace knnshap {

double seller_work_estimate(std::size_t sellers, std::size_t k) {
  double count = 0.0;
  for (std::size_t t = 0; t <= std::min(k, sellers); ++t) {
    count += choose(static_cast<long long>(sellers), static_cast<long long>(t));
  }
  return count;
}

namespace {

// Per-seller ranks (ascending) inside the ranking of one query.
struct SellerRanks {
  std::vector<std::vector<std::size_t>> ranks;  // first K ranks of each seller
  std::vector<std::size_t> owner_of_rank;
  std::vector<std::size_t> nearest;  // best rank of each seller
};

SellerRanks seller_ranks(const RankedGame& game, const SellerMap& map,
                         std::size_t k) {
  SellerRanks out;
  const std::size_t m = map.seller_count();
  out.ranks.resize(m);
  out.owner_of_rank.resize(game.size());
  for (std::size_t r = 0; r < game.size(); ++r) {
    const std::size_t owner = map.owner(game.ranking().order[r]);
    out.owner_of_rank[r] = owner;
    if (out.ranks[owner].size() < k) out.ranks[owner].push_back(r);
  }
  out.nearest.resize(m);
  for (std::size_t s = 0; s < m; ++s) out.nearest[s] = out.ranks[s].front();
  return out;
}

// Smallest k ranks of the union of ascending lists.
void merge_top(std::span<const std::size_t> a, std::span<const std::size_t> b,
               std::size_t k, std::vector<std::size_t>& out) {
  out.clear();
  std::size_t i = 0;
  std::size_t j = 0;
  while (out.size() < k && (i < a.size() || j < b.size())) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) {
      out.push_back(a[i++]);
    } else {
      out.push_back(b[j++]);
    }
  }
}

template <typename Fn>
void for_each_combination(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(std::span<const std::size_t>(idx));
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
}

// Total Shapley weight of the coalitions h(S) plus any g' of the g sellers that
// leave the top-K set unchanged.
class CoalitionWeights {
 public:
  CoalitionWeights(std::size_t sellers, std::size_t k, bool composite)
      : m_(sellers), composite_(composite), table_((k + 1) * (sellers + 1), kUnset) {}

  double operator()(std::size_t size, std::size_t g) {
    double& slot = table_[size * (m_ + 1) + g];
    if (std::isnan(slot)) slot = compute(size, g);
    return slot;
  }

 private:
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  double compute(std::size_t size, std::size_t g) const {
    const auto M = static_cast<long long>(m_);
    double sum = 0.0;
    for (std::size_t extra = 0; extra <= g; ++extra) {
      const auto t = static_cast<long long>(size + extra);
      if (composite_) {
        sum += choose_ratio(static_cast<long long>(g), static_cast<long long>(extra), M,
                            t + 1);
      } else {
        sum += choose_ratio(static_cast<long long>(g), static_cast<long long>(extra),
                            M - 1, t);
      }
    }
    return sum / static_cast<double>(composite_ ? m_ + 1 : m_);
  }

  std::size_t m_;
  bool composite_;
  std::vector<double> table_;
};

std::vector<double> seller_values(const Dataset& dataset, const Query& query,
                                  const GameSpec& spec, const WorkBudget& budget,
                                  bool composite) {
  if (!spec.sellers) throw UsageError("seller valuation needs a seller map");
  spec.validate(dataset.size());
  const SellerMap& map = *spec.sellers;
  const std::size_t m = map.seller_count();
  const std::size_t k = spec.k;

  const double work = seller_work_estimate(m, k);
  if (work > budget.max_seller_subsets && !budget.override_budget) {
    throw BudgetExceeded("exact seller valuation would enumerate about " +
                             std::to_string(static_cast<long long>(work)) +
                             " seller coalitions (budget " +
                             std::to_string(static_cast<long long>(
                                 budget.max_seller_subsets)) +
                             "); pass the budget override to proceed",
                         work, budget.max_seller_subsets);
  }

  RankedGame game(dataset, query, spec);
  const SellerRanks sr = seller_ranks(game, map, k);

  // With one neighbour only each seller's nearest point matters, which is the
  // one-point-per-seller game over those points.
  if (k == 1 && !spec.weighted()) {
    std::vector<std::size_t> by_nearest(m);
    for (std::size_t s = 0; s < m; ++s) by_nearest[s] = s;
    std::sort(by_nearest.begin(), by_nearest.end(),
              [&](std::size_t a, std::size_t b) { return sr.nearest[a] < sr.nearest[b]; });
    std::vector<double> by_rank;
    if (spec.task == Task::classification) {
      std::vector<std::uint8_t> match(m);
      for (std::size_t r = 0; r < m; ++r) match[r] = game.matches(sr.nearest[by_nearest[r]]);
      by_rank = composite ? composite_classification_by_rank(match, 1)
                          : classification_by_rank(match, 1);
    } else {
      std::vector<double> labels(m);
      for (std::size_t r = 0; r < m; ++r) labels[r] = game.label(sr.nearest[by_nearest[r]]);
      by_rank = composite ? composite_regression_by_rank(labels, query.y, 1)
                          : regression_by_rank(labels, query.y, 1);
    }
    std::vector<double> values(m);
    for (std::size_t r = 0; r < m; ++r) values[by_nearest[r]] = by_rank[r];
    return values;
  }

  CoalitionWeights weight(m, k, composite);
  std::vector<double> values(m, 0.0);
  std::vector<std::size_t> top;
  std::vector<std::size_t> merged;
  std::vector<std::size_t> with_j;
  std::vector<std::uint8_t> in_coalition(m, 0);

  for (std::size_t size = 0; size <= std::min(k, m); ++size) {
    for_each_combination(m, size, [&](std::span<const std::size_t> coalition) {
      // Top-K ranks of the coalition's points.
      top.clear();
      for (std::size_t s : coalition) {
        merge_top(top, sr.ranks[s], k, merged);
        top.swap(merged);
      }
      // Keep one representative per distinct top-K set: every member must
      // contribute a point to it.
      for (std::size_t s : coalition) {
        if (std::none_of(top.begin(), top.end(),
                         [&](std::size_t r) { return sr.owner_of_rank[r] == s; })) {
          return;
        }
      }
      for (std::size_t s : coalition) in_coalition[s] = 1;
      const double base = game.value(top);
      const bool full = top.size() == k;
      const std::size_t far = full ? top.back() : 0;
      std::size_t inert = 0;
      if (full) {
        for (std::size_t s = 0; s < m; ++s) {
          if (!in_coalition[s] && sr.nearest[s] > far) ++inert;
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (in_coalition[j]) continue;
        merge_top(top, sr.ranks[j], k, with_j);
        const std::size_t g = inert - ((full && sr.nearest[j] > far) ? 1 : 0);
        values[j] += weight(size, g) * (game.value(with_j) - base);
      }
      for (std::size_t s : coalition) in_coalition[s] = 0;
    });
  }
  return values;
}

}  // namespace

std::vector<double> shapley_per_seller(const Dataset& dataset, const Query& query,
                                       const GameSpec& spec,
                                       const WorkBudget& budget) {
  return seller_values(dataset, query, spec, budget, false);
}

CompositeValues shapley_per_seller_composite(const Dataset& dataset,
                                             const Query& query,
                                             const GameSpec& spec,
                                             const WorkBudget& budget) {
  CompositeValues out;
  out.values = seller_values(dataset, query, spec, budget, true);
  RankedGame game(dataset, query, spec);
  std::vector<std::size_t> top(std::min(spec.k, game.size()));
  for (std::size_t r = 0; r < top.size(); ++r) top[r] = r;
  double total = 0.0;
  for (double v : out.values) total += v;
  out.analyst_value = game.value(top) - total;
  return out;
}

}  // namespace knnshap

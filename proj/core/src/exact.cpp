#include "knnshap/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "knnshap/combinatorics.hpp"
#include "knnshap/errors.hpp"
#include "knnshap/parallel.hpp"
#include "knnshap/sellers.hpp"

namespace knnshap {

std::size_t TruncationConfig::k_star(std::size_t k) const {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  const double inv = std::ceil(1.0 / epsilon);
  const double cap = static_cast<double>(std::numeric_limits<std::size_t>::max() / 2);
  const auto from_eps = static_cast<std::size_t>(std::min(inv, cap));
  return std::max(k, from_eps);
}

namespace {

double kd(std::size_t v) { return static_cast<double>(v); }

std::vector<std::uint8_t> match_by_rank(const RankedGame& game) {
  std::vector<std::uint8_t> match(game.size());
  for (std::size_t r = 0; r < game.size(); ++r) match[r] = game.matches(r) ? 1 : 0;
  return match;
}

std::vector<double> labels_by_rank(const RankedGame& game) {
  std::vector<double> y(game.size());
  for (std::size_t r = 0; r < game.size(); ++r) y[r] = game.label(r);
  return y;
}

// Visits every k-subset of {0..n-1} in lexicographic order.
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

}  // namespace

std::vector<double> classification_by_rank(std::span<const std::uint8_t> match,
                                           std::size_t k) {
  const std::size_t n = match.size();
  std::vector<double> s(n, 0.0);
  if (n == 0) return s;
  s[n - 1] = match[n - 1] / kd(n);
  for (std::size_t i = n - 1; i >= 1; --i) {
    // 1-based rank i sits at s[i - 1].
    const double diff = (double(match[i - 1]) - double(match[i])) / kd(k);
    s[i - 1] = s[i] + diff * kd(std::min(k, i)) / kd(i);
  }
  return s;
}

std::vector<double> truncated_by_rank(std::span<const std::uint8_t> match,
                                      std::size_t k, std::size_t k_star,
                                      std::size_t total) {
  const std::size_t known = match.size();
  if (known == total && k_star >= total) return classification_by_rank(match, k);
  std::vector<double> s(known, 0.0);
  // Ranks >= cut (1-based) are zero.
  const std::size_t cut = std::min(k_star, known);
  for (std::size_t i = cut > 0 ? cut - 1 : 0; i >= 1; --i) {
    const double diff = (double(match[i - 1]) - double(match[i])) / kd(k);
    s[i - 1] = s[i] + diff * kd(std::min(k, i)) / kd(i);
  }
  return s;
}

std::vector<double> regression_by_rank(std::span<const double> y, double target,
                                       std::size_t k) {
  const std::size_t n = y.size();
  std::vector<double> s(n, 0.0);
  if (n == 0) return s;
  const double K = kd(k);
  double total = 0.0;
  for (double v : y) total += v;

  // 1-based helpers.
  auto Y = [&](std::size_t l) { return y[l - 1]; };
  const double y_last = Y(n);
  const double rest = total - y_last;
  const double fit = y_last / K - target;
  double base = -fit * fit / kd(n);
  if (k > 1) {
    base -= (K - 1.0) / (kd(n) * K) * y_last *
            (y_last / K - 2.0 * target + rest / kd(n - 1));
  }
  s[n - 1] = base;

  // prefix[i] = sum_{l < i} y_l, tail[i] = sum_{l >= i} y_l c_l with
  // c_l = min(K, l-1) min(K-1, l-2) / ((l-1)(l-2)) for l >= 3.
  std::vector<double> prefix(n + 2, 0.0);
  for (std::size_t i = 2; i <= n + 1; ++i) prefix[i] = prefix[i - 1] + Y(i - 1);
  std::vector<double> tail(n + 3, 0.0);
  for (std::size_t l = n; l >= 3; --l) {
    const double c = kd(std::min(k, l - 1)) * kd(std::min(k - 1, l - 2)) /
                     (kd(l - 1) * kd(l - 2));
    tail[l] = tail[l + 1] + Y(l) * c;
  }

  for (std::size_t i = n - 1; i >= 1; --i) {
    const double mk = kd(std::min(k, i));
    double weighted = Y(i) + Y(i + 1);
    if (i > 1) weighted += prefix[i] * kd(std::min(k - 1, i - 1)) / kd(i - 1);
    weighted += tail[i + 2] * kd(i) / mk;
    const double fit_term = weighted / K - 2.0 * target;
    s[i - 1] = s[i] + (Y(i + 1) - Y(i)) / K * (mk / kd(i)) * fit_term;
  }
  return s;
}

std::vector<double> composite_classification_by_rank(
    std::span<const std::uint8_t> match, std::size_t k) {
  const std::size_t n = match.size();
  std::vector<double> s(n, 0.0);
  if (n == 0) return s;
  s[n - 1] = kd(std::min(k, n) + 1) / (2.0 * kd(n + 1) * kd(n)) * match[n - 1];
  for (std::size_t i = n - 1; i >= 1; --i) {
    const double m = kd(std::min(i, k));
    const double diff = (double(match[i - 1]) - double(match[i])) / kd(k);
    s[i - 1] = s[i] + diff * m * (m + 1.0) / (2.0 * kd(i) * kd(i + 1));
  }
  return s;
}

std::vector<double> composite_regression_by_rank(std::span<const double> y,
                                                 double target, std::size_t k) {
  const std::size_t n = y.size();
  std::vector<double> s(n, 0.0);
  if (n == 0) return s;
  const double K = kd(k);
  const double N = kd(n);
  double total = 0.0;
  for (double v : y) total += v;
  auto Y = [&](std::size_t l) { return y[l - 1]; };

  const double y_last = Y(n);
  const double fit = y_last / K - target;
  double inner = (K + 2.0) * (K - 1.0) / (2.0 * N) * (y_last / K - 2.0 * target);
  if (n > 1) {
    inner += 2.0 * (K - 1.0) * (K + 1.0) / (3.0 * N * (N - 1.0)) * (total - y_last);
  }
  s[n - 1] = -y_last * inner / (K * (N + 1.0)) - fit * fit / (N * (N + 1.0));

  std::vector<double> prefix(n + 2, 0.0);
  for (std::size_t i = 2; i <= n + 1; ++i) prefix[i] = prefix[i - 1] + Y(i - 1);
  // tail[l] = sum_{j >= l} y_j 2 min(K+1, j) min(K, j-1) min(K-1, j-2) / (3 j (j-1) (j-2))
  std::vector<double> tail(n + 3, 0.0);
  for (std::size_t l = n; l >= 3; --l) {
    const double c = 2.0 * kd(std::min(k + 1, l)) * kd(std::min(k, l - 1)) *
                     kd(std::min(k - 1, l - 2)) / (3.0 * kd(l) * kd(l - 1) * kd(l - 2));
    tail[l] = tail[l + 1] + Y(l) * c;
  }

  for (std::size_t i = n - 1; i >= 1; --i) {
    const double I = kd(i);
    const double a = kd(std::min(k + 1, i + 1));
    const double b = kd(std::min(k, i));
    double term = ((Y(i + 1) + Y(i)) / K - 2.0 * target) * a * b / (2.0 * I * (I + 1.0));
    if (i > 1) {
      const double c = kd(std::min(k - 1, i - 1));
      term += prefix[i] / K * 2.0 * a * b * c / (3.0 * (I - 1.0) * I * (I + 1.0));
    }
    term += tail[i + 2] / K;
    s[i - 1] = s[i] + (Y(i + 1) - Y(i)) / K * term;
  }
  return s;
}

double weighted_work_estimate(std::size_t n, std::size_t k) {
  if (n < 2) return 1.0;
  double count = 0.0;
  for (std::size_t j = 0; j < k; ++j) count += choose(static_cast<long long>(n - 2),
                                                      static_cast<long long>(j));
  return count;
}

std::vector<double> enumerated_by_rank(const RankedGame& game, bool composite,
                                       const WorkBudget& budget) {
  const std::size_t n = game.size();
  const std::size_t k = std::min(game.k(), n);
  const double work = weighted_work_estimate(n, k);
  if (work > budget.max_subsets && !budget.override_budget) {
    throw BudgetExceeded("exact weighted valuation would enumerate about " +
                             std::to_string(static_cast<long long>(work)) +
                             " subsets per rank (budget " +
                             std::to_string(static_cast<long long>(budget.max_subsets)) +
                             "); pass the budget override to proceed",
                         work, budget.max_subsets);
  }
  const auto N = static_cast<long long>(n);
  const auto K = static_cast<long long>(k);

  // Coalition weights of the farthest point (base) and of adjacent pairs.
  auto base_weight = [&](long long size) {
    return composite ? 1.0 / (kd(n + 1) * choose(N, size + 1))
                     : 1.0 / (kd(n) * choose(N - 1, size));
  };
  auto pair_weight = [&](long long size) {
    return composite ? 1.0 / (kd(n) * choose(N - 1, size + 1))
                     : 1.0 / (kd(n - 1) * choose(N - 2, size));
  };
  // tail_weight[r]: total weight of the coalitions that extend a (K-1)-set
  // whose farthest member, together with the pair, has 1-based rank r.
  std::vector<double> tail_weight(n + 1, 0.0);
  if (n >= 2) {
    for (long long r = 1; r <= N; ++r) {
      double sum = 0.0;
      for (long long size = K - 1; size <= N - 2; ++size) {
        const long long extra = size - K + 1;
        if (extra > N - r) break;
        if (composite) {
          sum += choose_ratio(N - r, extra, N - 1, size + 1) / kd(n);
        } else {
          sum += choose_ratio(N - r, extra, N - 2, size) / kd(n - 1);
        }
      }
      tail_weight[static_cast<std::size_t>(r)] = sum;
    }
  }

  std::vector<double> s(n, 0.0);
  std::vector<std::size_t> with_a;
  std::vector<std::size_t> with_b;
  std::vector<std::size_t> members;

  // Farthest point: only coalitions of size < K see it.
  {
    const std::size_t last = n - 1;
    double total = 0.0;
    for (std::size_t size = 0; size < k; ++size) {
      double part = 0.0;
      for_each_combination(n - 1, size, [&](std::span<const std::size_t> idx) {
        members.assign(idx.begin(), idx.end());
        const double without = game.value(members);
        members.push_back(last);
        part += game.value(members) - without;
      });
      total += part * base_weight(static_cast<long long>(size));
    }
    s[last] = total;
  }

  std::vector<std::size_t> others;
  others.reserve(n);
  for (std::size_t i = n - 1; i >= 1; --i) {
    // Pair (a, b) = 0-based ranks (i-1, i).
    const std::size_t a = i - 1;
    const std::size_t b = i;
    others.clear();
    for (std::size_t r = 0; r < n; ++r) {
      if (r != a && r != b) others.push_back(r);
    }
    double diff = 0.0;
    for (std::size_t size = 0; size < k; ++size) {
      for_each_combination(others.size(), size, [&](std::span<const std::size_t> idx) {
        members.clear();
        for (std::size_t j : idx) members.push_back(others[j]);
        with_a = members;
        with_a.insert(std::upper_bound(with_a.begin(), with_a.end(), a), a);
        with_b = members;
        with_b.insert(std::upper_bound(with_b.begin(), with_b.end(), b), b);
        const double delta = game.value(with_a) - game.value(with_b);
        if (size + 1 < k) {
          diff += pair_weight(static_cast<long long>(size)) * delta;
        } else {
          const std::size_t far = std::max(members.empty() ? 0 : members.back() + 1, b + 1);
          diff += tail_weight[far] * delta;
        }
      });
    }
    s[a] = s[b] + diff;
  }
  return s;
}

std::vector<double> shapley_unweighted_classification(const Dataset& dataset,
                                                      const Query& query,
                                                      std::size_t k) {
  GameSpec spec;
  spec.k = k;
  spec.validate(dataset.size());
  RankedGame game(dataset, query, spec);
  return game.to_points(classification_by_rank(match_by_rank(game), k));
}

std::vector<double> shapley_unweighted_regression(const Dataset& dataset,
                                                  const Query& query,
                                                  std::size_t k) {
  GameSpec spec;
  spec.task = Task::regression;
  spec.k = k;
  spec.validate(dataset.size());
  RankedGame game(dataset, query, spec);
  return game.to_points(regression_by_rank(labels_by_rank(game), query.y, k));
}

std::vector<double> shapley_truncated(const Dataset& dataset, const Query& query,
                                      std::size_t k,
                                      const TruncationConfig& config) {
  GameSpec spec;
  spec.k = k;
  spec.validate(dataset.size());
  RankedGame game(dataset, query, spec);
  return game.to_points(
      truncated_by_rank(match_by_rank(game), k, config.k_star(k), dataset.size()));
}

std::vector<double> shapley_weighted(const Dataset& dataset, const Query& query,
                                     const GameSpec& spec,
                                     const WorkBudget& budget) {
  spec.validate(dataset.size());
  RankedGame game(dataset, query, spec);
  return game.to_points(enumerated_by_rank(game, false, budget));
}

namespace {

double full_value(const RankedGame& game) {
  std::vector<std::size_t> top(std::min(game.k(), game.size()));
  for (std::size_t r = 0; r < top.size(); ++r) top[r] = r;
  return game.value(top);
}

}  // namespace

CompositeValues shapley_composite(const Dataset& dataset, const Query& query,
                                  const GameSpec& spec, const WorkBudget& budget) {
  spec.validate(dataset.size());
  if (spec.sellers) return shapley_per_seller_composite(dataset, query, spec, budget);
  RankedGame game(dataset, query, spec);
  std::vector<double> by_rank;
  if (spec.weighted()) {
    by_rank = enumerated_by_rank(game, true, budget);
  } else if (spec.task == Task::classification) {
    by_rank = composite_classification_by_rank(match_by_rank(game), spec.k);
  } else {
    by_rank = composite_regression_by_rank(labels_by_rank(game), query.y, spec.k);
  }
  CompositeValues out;
  double total = 0.0;
  for (double v : by_rank) total += v;
  out.analyst_value = full_value(game) - total;
  out.values = game.to_points(by_rank);
  return out;
}

GameValues value_query(const Dataset& dataset, const Query& query,
                       const GameSpec& spec, const WorkBudget& budget) {
  spec.validate(dataset.size());
  if (spec.composite) {
    CompositeValues c = shapley_composite(dataset, query, spec, budget);
    return {std::move(c.values), c.analyst_value};
  }
  if (spec.sellers) return {shapley_per_seller(dataset, query, spec, budget), {}};
  if (spec.weighted()) return {shapley_weighted(dataset, query, spec, budget), {}};
  if (spec.task == Task::regression) {
    return {shapley_unweighted_regression(dataset, query, spec.k), {}};
  }
  return {shapley_unweighted_classification(dataset, query, spec.k), {}};
}

namespace {

std::string exact_method(const GameSpec& spec) {
  if (spec.composite) return "composite";
  if (spec.sellers) return "seller";
  if (spec.weighted()) return "weighted";
  return "exact";
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

}  // namespace

ValuationResult value_exact(const Dataset& dataset, const QuerySet& queries,
                            const GameSpec& spec, const ExactOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate(dataset.size());
  if (queries.dim() != dataset.dim()) {
    throw DataError("query dimension differs from training dimension");
  }
  std::vector<GameValues> per_query(queries.size());
  parallel_for(queries.size(), options.threads, [&](std::size_t j) {
    per_query[j] = value_query(dataset, query_at(queries, j), spec, options.budget);
  });
  std::vector<std::vector<double>> rows;
  rows.reserve(per_query.size());
  double analyst = 0.0;
  for (auto& pq : per_query) {
    rows.push_back(std::move(pq.values));
    if (pq.analyst) analyst += *pq.analyst;
  }
  ValuationResult result;
  result.values = aggregate_over_queries(rows);
  if (spec.composite) result.analyst_value = analyst / kd(queries.size());
  result.method = exact_method(spec);
  result.diagnostics.runtime_ms = elapsed_ms(start);
  return result;
}

ValuationResult value_truncated(const Dataset& dataset, const QuerySet& queries,
                                std::size_t k, const TruncationConfig& config,
                                std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  if (dataset.task() != Task::classification) {
    throw UsageError("truncated valuation supports classification only");
  }
  std::vector<std::vector<double>> rows(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t j) {
    rows[j] = shapley_truncated(dataset, query_at(queries, j), k, config);
  });
  ValuationResult result;
  result.values = aggregate_over_queries(rows);
  result.method = "truncated";
  result.guarantee = Guarantee{config.epsilon, 0.0};
  result.diagnostics.extra["k_star"] = kd(config.k_star(k));
  result.diagnostics.runtime_ms = elapsed_ms(start);
  return result;
}

}  // namespace knnshap

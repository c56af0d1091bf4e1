#include "knnshap/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "knnshap/errors.hpp"
#include "knnshap/parallel.hpp"
#include "knnshap/random.hpp"

namespace knnshap {

Bound parse_bound(const std::string& name) {
  if (name == "hoeffding") return Bound::hoeffding;
  if (name == "bennett") return Bound::bennett;
  if (name == "bennett_approx" || name == "bennett-approx") return Bound::bennett_approx;
  if (name == "heuristic") return Bound::heuristic;
  throw UsageError("unknown bound '" + name +
                   "' (expected hoeffding, bennett, bennett_approx or heuristic)");
}

std::string bound_name(Bound bound) {
  switch (bound) {
    case Bound::hoeffding:
      return "hoeffding";
    case Bound::bennett:
      return "bennett";
    case Bound::bennett_approx:
      return "bennett_approx";
    case Bound::heuristic:
      return "heuristic";
  }
  return "unknown";
}

void McConfig::validate() const {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  if (range && !(*range > 0.0)) throw UsageError("range must be positive");
  if (max_permutations == 0) throw UsageError("max_permutations must be positive");
  if (!(heuristic_divisor > 0.0)) throw UsageError("heuristic divisor must be positive");
}

std::size_t hoeffding_count(double width, double epsilon, double delta, std::size_t n) {
  const double t = width * width / (2.0 * epsilon * epsilon) *
                   std::log(2.0 * static_cast<double>(n) / delta);
  return static_cast<std::size_t>(std::ceil(t));
}

namespace {

double required_range(const McConfig& config) {
  if (!config.range) throw UsageError("utility-difference range is not set");
  return *config.range;
}

}  // namespace

std::size_t hoeffding_permutations(std::size_t n, const McConfig& config) {
  config.validate();
  return hoeffding_count(2.0 * required_range(config), config.epsilon, config.delta, n);
}

std::vector<double> bennett_q(std::size_t n, std::size_t k) {
  std::vector<double> q(n, 0.0);
  for (std::size_t i = k + 1; i <= n; ++i) {
    q[i - 1] = static_cast<double>(i - k) / static_cast<double>(i);
  }
  return q;
}

double bennett_h(double u) { return (1.0 + u) * std::log1p(u) - u; }

double bennett_lhs(double t, std::size_t n, std::size_t k, const McConfig& config) {
  const double r = required_range(config);
  double sum = 0.0;
  // Players i > K differ only through q_i, so the loop runs over all of them.
  for (std::size_t i = 1; i <= n; ++i) {
    const double q = i <= k ? 0.0 : static_cast<double>(i - k) / static_cast<double>(i);
    const double v = 1.0 - q * q;
    sum += std::exp(-t * v * bennett_h(config.epsilon / (v * r)));
  }
  return sum;
}

std::size_t bennett_permutations(std::size_t n, std::size_t k, const McConfig& config) {
  config.validate();
  const double target = config.delta / 2.0;
  std::size_t lo = 1;
  std::size_t hi = 10 * std::max<std::size_t>(1, hoeffding_permutations(n, config));
  if (bennett_lhs(static_cast<double>(lo), n, k, config) <= target) return lo;
  if (bennett_lhs(static_cast<double>(hi), n, k, config) > target) {
    throw std::runtime_error("Bennett bracket exhausted at T=" + std::to_string(hi));
  }
  // Invariant: lhs(lo) > target >= lhs(hi).
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (bennett_lhs(static_cast<double>(mid), n, k, config) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::size_t bennett_approx_permutations(std::size_t k, const McConfig& config) {
  config.validate();
  const double r = required_range(config);
  const double t = std::log(2.0 * static_cast<double>(k) / config.delta) /
                   bennett_h(config.epsilon / r);
  return static_cast<std::size_t>(std::ceil(t));
}

double default_range(const Dataset& dataset, const QuerySet& queries,
                     const GameSpec& spec) {
  if (spec.task == Task::classification) {
    const bool point_game = !spec.sellers && !spec.composite;
    if (point_game && !spec.weighted()) return 1.0 / static_cast<double>(spec.k);
    return 1.0;
  }
  const auto [lo, hi] = std::minmax_element(dataset.labels().begin(), dataset.labels().end());
  double spread = 0.0;
  for (double y : queries.labels()) {
    spread = std::max({spread, (*lo - y) * (*lo - y), (*hi - y) * (*hi - y)});
  }
  // A constant-label game has no spread; keep the range positive.
  return spread > 0.0 ? 2.0 * spread : 1.0;
}

std::size_t planned_permutations(std::size_t players, const GameSpec& spec,
                                 const McConfig& config) {
  switch (config.bound) {
    case Bound::hoeffding:
      return hoeffding_permutations(players, config);
    case Bound::bennett:
      return bennett_permutations(players, spec.k, config);
    case Bound::bennett_approx:
      return bennett_approx_permutations(spec.k, config);
    case Bound::heuristic:
      return 0;
  }
  return 0;
}

PermutationState::PermutationState(const RankedGame& game)
    : game_(&game), incremental_(!game.weighted()) {
  heap_.reserve(game.k());
  sorted_.reserve(game.k());
}

void PermutationState::reset() {
  heap_.clear();
  sum_ = 0.0;
  value_ = 0.0;
}

bool PermutationState::insert(std::size_t rank) {
  const std::size_t k = game_->k();
  std::size_t evicted = rank;
  if (heap_.size() < k) {
    heap_.push_back(rank);
    std::push_heap(heap_.begin(), heap_.end());
    evicted = game_->size();
  } else if (rank < heap_.front()) {
    std::pop_heap(heap_.begin(), heap_.end());
    evicted = heap_.back();
    heap_.back() = rank;
    std::push_heap(heap_.begin(), heap_.end());
  } else {
    return false;
  }
  if (incremental_) {
    const bool classification = game_->task() == Task::classification;
    auto term = [&](std::size_t r) {
      return classification ? (game_->matches(r) ? 1.0 : 0.0) : game_->label(r);
    };
    sum_ += term(rank);
    if (evicted < game_->size()) sum_ -= term(evicted);
    const double inv_k = 1.0 / static_cast<double>(k);
    if (classification) {
      value_ = sum_ * inv_k;
    } else {
      const double err = sum_ * inv_k - game_->target();
      value_ = -err * err;
    }
  } else {
    refresh();
  }
  return true;
}

void PermutationState::refresh() {
  sorted_.assign(heap_.begin(), heap_.end());
  std::sort(sorted_.begin(), sorted_.end());
  value_ = game_->value(sorted_);
}

std::vector<std::size_t> PermutationState::nearest() const {
  std::vector<std::size_t> out(heap_.begin(), heap_.end());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Everything one query needs to replay a permutation.
struct QueryContext {
  RankedGame game;
  // Ranks each data player inserts (its own rank, or a seller's first K),
  // player p owning ranks[offsets[p] .. offsets[p + 1]).
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> ranks;
};

class PermutationEngine {
 public:
  PermutationEngine(const Dataset& dataset, const QuerySet& queries, const GameSpec& spec,
                    std::size_t threads)
      : spec_(spec) {
    spec.validate(dataset.size());
    data_players_ = spec.data_players(dataset.size());
    players_ = data_players_ + (spec.composite ? 1 : 0);
    contexts_.resize(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t j) {
      RankedGame game(dataset, query_at(queries, j), spec_);
      std::vector<std::vector<std::uint32_t>> lists(data_players_);
      for (std::size_t r = 0; r < game.size(); ++r) {
        const std::size_t point = game.ranking().order[r];
        const std::size_t player = spec_.sellers ? spec_.sellers->owner(point) : point;
        if (lists[player].size() < spec_.k) lists[player].push_back(static_cast<std::uint32_t>(r));
      }
      std::vector<std::uint32_t> offsets(data_players_ + 1, 0);
      std::vector<std::uint32_t> ranks;
      ranks.reserve(game.size());
      for (std::size_t p = 0; p < data_players_; ++p) {
        ranks.insert(ranks.end(), lists[p].begin(), lists[p].end());
        offsets[p + 1] = static_cast<std::uint32_t>(ranks.size());
      }
      contexts_[j].emplace(QueryContext{std::move(game), std::move(offsets), std::move(ranks)});
    });
  }

  std::size_t players() const { return players_; }

  // Adds the marginal contributions of `order`, averaged over queries, to
  // `sums`. `states` holds one state per query.
  void accumulate(std::span<const std::size_t> order,
                  std::vector<PermutationState>& states, std::span<double> sums) const {
    const double scale = 1.0 / static_cast<double>(contexts_.size());
    for (std::size_t j = 0; j < contexts_.size(); ++j) {
      const QueryContext& ctx = *contexts_[j];
      PermutationState& state = states[j];
      state.reset();
      bool analyst_in = !spec_.composite;
      double prev = 0.0;
      for (std::size_t player : order) {
        if (player == data_players_) {
          analyst_in = true;
          sums[player] += state.value() * scale;
          prev = state.value();
          continue;
        }
        bool changed = false;
        for (std::uint32_t i = ctx.offsets[player]; i < ctx.offsets[player + 1]; ++i) {
          changed |= state.insert(ctx.ranks[i]);
        }
        if (changed && analyst_in) {
          sums[player] += (state.value() - prev) * scale;
          prev = state.value();
        }
      }
    }
  }

  std::vector<PermutationState> make_states() const {
    std::vector<PermutationState> states;
    states.reserve(contexts_.size());
    for (const auto& ctx : contexts_) states.emplace_back(ctx->game);
    return states;
  }

 private:
  const GameSpec& spec_;
  std::size_t data_players_ = 0;
  std::size_t players_ = 0;
  std::vector<std::optional<QueryContext>> contexts_;
};

void random_order(std::uint64_t seed, std::uint64_t t, std::vector<std::size_t>& order) {
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(mix_seed(seed, t));
  fisher_yates(std::span<std::size_t>(order), gen);
}

ValuationResult finish(std::vector<double> sums, std::size_t count, const GameSpec& spec,
                       std::size_t data_players) {
  ValuationResult result;
  for (double& v : sums) v /= static_cast<double>(count);
  if (spec.composite) {
    result.analyst_value = sums[data_players];
    sums.resize(data_players);
  }
  result.values = std::move(sums);
  result.diagnostics.permutations = count;
  return result;
}

constexpr std::size_t kChunk = 16;

}  // namespace

ValuationResult estimate_shapley_mc(const Dataset& dataset, const QuerySet& queries,
                                    const GameSpec& spec, const McConfig& input) {
  const auto start = std::chrono::steady_clock::now();
  McConfig config = input;
  config.validate();
  if (!config.range) config.range = default_range(dataset, queries, spec);

  PermutationEngine engine(dataset, queries, spec, config.threads);
  const std::size_t players = engine.players();
  const std::size_t data_players = spec.data_players(dataset.size());
  std::vector<double> sums(players, 0.0);
  std::size_t done = 0;
  bool incomplete = false;
  std::vector<std::string> warnings;

  if (config.bound == Bound::heuristic) {
    auto states = engine.make_states();
    std::vector<std::size_t> order(players);
    std::vector<double> previous(players, 0.0);
    const double threshold = config.epsilon / config.heuristic_divisor;
    bool converged = false;
    while (done < config.max_permutations) {
      random_order(config.seed, done, order);
      engine.accumulate(order, states, sums);
      ++done;
      double change = 0.0;
      for (std::size_t i = 0; i < players; ++i) {
        const double mean = sums[i] / static_cast<double>(done);
        change = std::max(change, std::abs(mean - previous[i]));
        previous[i] = mean;
      }
      if (done >= config.heuristic_floor && change < threshold) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      incomplete = true;
      warnings.push_back("heuristic stop not reached within " +
                         std::to_string(config.max_permutations) + " permutations");
    }
  } else {
    std::size_t target = planned_permutations(players, spec, config);
    if (target > config.max_permutations) {
      incomplete = true;
      warnings.push_back("bound asks for " + std::to_string(target) +
                         " permutations; capped at " +
                         std::to_string(config.max_permutations));
      target = config.max_permutations;
    }
    const std::size_t chunks = (target + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> partial(chunks);
    parallel_for(chunks, config.threads, [&](std::size_t c) {
      auto states = engine.make_states();
      std::vector<std::size_t> order(players);
      std::vector<double> local(players, 0.0);
      const std::size_t end = std::min(target, (c + 1) * kChunk);
      for (std::size_t t = c * kChunk; t < end; ++t) {
        random_order(config.seed, t, order);
        engine.accumulate(order, states, local);
      }
      partial[c] = std::move(local);
    });
    for (const auto& local : partial) {
      for (std::size_t i = 0; i < players; ++i) sums[i] += local[i];
    }
    done = target;
  }

  ValuationResult result = finish(std::move(sums), done, spec, data_players);
  result.method = "mc";
  if (config.bound != Bound::heuristic && !incomplete) {
    result.guarantee = Guarantee{config.epsilon, config.delta};
  }
  result.diagnostics.incomplete = incomplete;
  result.diagnostics.warnings = std::move(warnings);
  result.diagnostics.extra["range"] = *config.range;
  result.diagnostics.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

ValuationResult shapley_all_permutations(const Dataset& dataset, const QuerySet& queries,
                                         const GameSpec& spec) {
  PermutationEngine engine(dataset, queries, spec, 1);
  const std::size_t players = engine.players();
  if (players > 8) {
    throw UsageError("exhaustive permutation averaging supports at most 8 players");
  }
  auto states = engine.make_states();
  std::vector<std::size_t> order(players);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sums(players, 0.0);
  std::size_t count = 0;
  do {
    engine.accumulate(order, states, sums);
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  ValuationResult result = finish(std::move(sums), count, spec, spec.data_players(dataset.size()));
  result.method = "mc-exhaustive";
  return result;
}

}  // namespace knnshap

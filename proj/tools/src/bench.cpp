#include "knnshap_tools/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "knnshap/errors.hpp"
#include "knnshap/exact.hpp"
#include "knnshap/montecarlo.hpp"
#include "knnshap/synth.hpp"
#include "knnshap_tools/report.hpp"

namespace knnshap::tools {

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double timed(Fn&& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fastest of `repeats` runs; wall clock on a shared machine only ever adds noise.
template <typename Fn>
double timed_min(std::size_t repeats, Fn&& fn) {
  double best = timed(fn);
  for (std::size_t i = 1; i < repeats; ++i) best = std::min(best, timed(fn));
  return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<std::size_t> or_default(const std::vector<std::size_t>& given,
                                    std::vector<std::size_t> fallback) {
  return given.empty() ? fallback : given;
}

}  // namespace

std::vector<BenchRow> bench_exact_vs_baseline(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  GameSpec spec;
  for (std::size_t n : or_default(options.sizes, {1000, 10000, 100000})) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.d = options.dim;
    cfg.seed = options.seed;
    const auto [train, test] = synthesize_split(cfg, options.queries);

    ExactOptions eo;
    eo.threads = options.threads;
    ValuationResult exact;
    const double exact_s =
        timed_min(options.repeats, [&] { exact = value_exact(train, test, spec, eo); });
    rows.push_back({"exact", n, 1, exact_s, 0.0, std::nullopt, false, std::nullopt});

    McConfig mc;
    mc.epsilon = options.epsilon;
    mc.delta = options.delta;
    mc.bound = Bound::hoeffding;
    mc.range = 1.0;
    mc.seed = options.seed;
    mc.threads = options.threads;
    const std::size_t total = hoeffding_permutations(n, mc);

    // Two short runs separate the fixed setup cost from the per-permutation cost.
    const std::size_t small = std::max<std::size_t>(options.sample_permutations / 2, 16);
    const std::size_t large = small + options.sample_permutations;
    mc.max_permutations = small;
    const double small_s =
        timed_min(options.repeats, [&] { estimate_shapley_mc(train, test, spec, mc); });
    mc.max_permutations = large;
    const double large_s =
        timed_min(options.repeats, [&] { estimate_shapley_mc(train, test, spec, mc); });
    const double per = std::max(large_s - small_s, 0.0) / static_cast<double>(large - small);
    const double setup = std::max(small_s - per * static_cast<double>(small), 0.0);
    const double projected = setup + per * static_cast<double>(total);

    BenchRow baseline{"baseline-hoeffding", n, 1, projected, std::nullopt, total, true,
                      std::nullopt};
    if (projected <= options.baseline_budget_s) {
      mc.max_permutations = total;
      ValuationResult approx;
      baseline.runtime_s = timed([&] { approx = estimate_shapley_mc(train, test, spec, mc); });
      double spent = baseline.runtime_s;
      for (std::size_t i = 1; i < options.repeats && spent + baseline.runtime_s <=
                                                        options.baseline_budget_s;
           ++i) {
        const double again = timed([&] { estimate_shapley_mc(train, test, spec, mc); });
        spent += again;
        baseline.runtime_s = std::min(baseline.runtime_s, again);
      }
      baseline.max_error = max_abs_diff(approx.values, exact.values);
      baseline.projected = false;
    }
    baseline.speedup = baseline.runtime_s / std::max(exact_s, 1e-9);
    rows.push_back(baseline);
  }
  return rows;
}

std::vector<BenchRow> bench_bennett_vs_hoeffding(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  McConfig mc;
  mc.epsilon = options.epsilon;
  mc.delta = options.delta;
  mc.range = 1.0;
  for (std::size_t n : or_default(options.sizes, {100, 1000, 10000, 100000})) {
    std::size_t h = 0;
    std::size_t b = 0;
    std::size_t a = 0;
    const double h_s = timed([&] { h = hoeffding_permutations(n, mc); });
    const double b_s = timed([&] { b = bennett_permutations(n, 1, mc); });
    const double a_s = timed([&] { a = bennett_approx_permutations(1, mc); });
    rows.push_back({"hoeffding", n, 1, h_s, std::nullopt, h, false, std::nullopt});
    rows.push_back({"bennett", n, 1, b_s, std::nullopt, b, false, std::nullopt});
    rows.push_back({"bennett-approx", n, 1, a_s, std::nullopt, a, false, std::nullopt});
  }
  return rows;
}

std::vector<BenchRow> bench_weighted_exact_vs_mc(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  const std::size_t n = options.sizes.empty() ? 100 : options.sizes.front();
  const std::size_t queries = std::min<std::size_t>(options.queries, 10);
  SynthConfig cfg;
  cfg.n = n;
  cfg.d = options.dim;
  cfg.seed = options.seed;
  const auto [train, test] = synthesize_split(cfg, queries);
  for (std::size_t k : or_default(options.k_values, {1, 2, 3, 4})) {
    GameSpec spec;
    spec.k = k;
    spec.weights = make_weight_rule("inverse");

    ExactOptions eo;
    eo.threads = options.threads;
    eo.budget.override_budget = true;
    ValuationResult exact;
    const double exact_s = timed([&] { exact = value_exact(train, test, spec, eo); });
    rows.push_back({"weighted-exact", n, k, exact_s, 0.0, std::nullopt, false, std::nullopt});

    McConfig mc;
    mc.epsilon = options.epsilon;
    mc.delta = options.delta;
    mc.bound = Bound::bennett_approx;
    mc.seed = options.seed;
    mc.threads = options.threads;
    ValuationResult approx;
    const double mc_s = timed([&] { approx = estimate_shapley_mc(train, test, spec, mc); });
    rows.push_back({"weighted-mc", n, k, mc_s, max_abs_diff(approx.values, exact.values),
                    approx.diagnostics.permutations, false, std::nullopt});
  }
  return rows;
}

std::vector<std::string> bench_scenarios() {
  return {"exact-vs-baseline", "bennett-vs-hoeffding", "weighted-exact-vs-mc"};
}

std::vector<BenchRow> run_bench(const std::string& scenario, const BenchOptions& options) {
  if (scenario == "exact-vs-baseline") return bench_exact_vs_baseline(options);
  if (scenario == "bennett-vs-hoeffding") return bench_bennett_vs_hoeffding(options);
  if (scenario == "weighted-exact-vs-mc") return bench_weighted_exact_vs_mc(options);
  throw UsageError("unknown bench scenario '" + scenario +
                   "' (expected exact-vs-baseline, bennett-vs-hoeffding or "
                   "weighted-exact-vs-mc)");
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "method,n,k,runtime_s,max_error,permutations,projected,speedup\n";
  for (const BenchRow& r : rows) {
    out << r.method << ',' << r.n << ',' << r.k << ',' << format_double(r.runtime_s) << ',';
    if (r.max_error) out << format_double(*r.max_error);
    out << ',';
    if (r.permutations) out << *r.permutations;
    out << ',' << (r.projected ? 1 : 0) << ',';
    if (r.speedup) out << format_double(*r.speedup);
    out << '\n';
  }
}

}  // namespace knnshap::tools

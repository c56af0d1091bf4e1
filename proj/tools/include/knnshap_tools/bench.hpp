#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace knnshap::tools {

struct BenchRow {
  std::string method;
  std::size_t n = 0;
  std::size_t k = 1;
  double runtime_s = 0.0;
  std::optional<double> max_error;
  std::optional<std::size_t> permutations;
  bool projected = false;  // runtime extrapolated from a sample of permutations
  std::optional<double> speedup;
};

struct BenchOptions {
  std::vector<std::size_t> sizes;    // empty: scenario default
  std::vector<std::size_t> k_values; // empty: scenario default
  std::size_t queries = 100;
  std::size_t dim = 32;
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 11;
  std::size_t threads = 1;
  // Baselines expected to take longer than this are timed on a sample of
  // permutations and projected to the full count.
  double baseline_budget_s = 60.0;
  std::size_t sample_permutations = 32;
  std::size_t repeats = 3;  // timings keep the fastest repeat
};

// exact-vs-baseline: exact recursion against Hoeffding-sized permutation
// sampling on synthetic classification data, one pair of rows per size.
std::vector<BenchRow> bench_exact_vs_baseline(const BenchOptions& options);

// bennett-vs-hoeffding: permutation counts of each bound, K=1, r=1.
std::vector<BenchRow> bench_bennett_vs_hoeffding(const BenchOptions& options);

// weighted-exact-vs-mc: weighted exact algorithm against the approximate
// Bennett estimate across K at N=100.
std::vector<BenchRow> bench_weighted_exact_vs_mc(const BenchOptions& options);

std::vector<std::string> bench_scenarios();
std::vector<BenchRow> run_bench(const std::string& scenario, const BenchOptions& options);

// Header: method,n,k,runtime_s,max_error,permutations,projected,speedup.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace knnshap::tools

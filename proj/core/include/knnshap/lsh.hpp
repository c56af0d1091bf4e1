#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "knnshap/dataset.hpp"
#include "knnshap/game.hpp"
#include "knnshap/neighbors.hpp"

namespace knnshap {

// Probability that two points at distance c share one p-stable hash
// floor((w.x + b) / width) with Gaussian w. Returns 1 at c = 0.
double collision_probability(double c, double width);

// log f(1/contrast) / log f(1) at the given width, in units where the mean
// distance is 1.
double g_exponent(double contrast, double width);

struct ContrastEstimate {
  double d_mean = 0.0;
  double d_k = 0.0;
  double contrast = 0.0;    // d_mean / d_k
  double g_exponent = 0.0;  // at the width passed to estimate_contrast
};

// d_mean from `sample_size` random (point, query) pairs; d_k as the exact
// k-th neighbour distance averaged over up to `sample_size` queries.
ContrastEstimate estimate_contrast(const Dataset& dataset, const QuerySet& queries,
                                   std::size_t k, std::size_t sample_size,
                                   std::uint64_t seed = 0, double width = 4.0);

struct LshParams {
  std::size_t m = 1;   // projections per table
  std::size_t l = 1;   // tables
  double width = 1.0;  // bucket width in data units
  std::uint64_t seed = 0;

  void validate() const;
};

struct LshSelection {
  LshParams params;
  ContrastEstimate contrast;
  double alpha = 1.0;
  double normalized_width = 1.0;  // width / d_mean
  std::vector<std::string> warnings;
};

struct SelectOptions {
  std::vector<double> width_grid{0.5, 1.0, 1.5, 2.0, 3.0, 4.0};  // in units of d_mean
  std::vector<double> alpha_grid{0.5, 1.0, 1.5, 2.0};
  std::size_t sample_size = 1000;
  std::size_t max_tables = 5000;
  std::uint64_t seed = 0;
};

// Picks the width minimising g(C_K*), then the alpha with the lowest
// l * (m + N^(1 - alpha)) cost, with m = ceil(alpha ln N / ln(1 / f(1))) and
// l = ceil(N^(alpha g) ln(K* / delta')), delta' = delta / query_count.
LshSelection select_params(const Dataset& dataset, const QuerySet& queries,
                           std::size_t k_star, double delta, std::size_t query_count,
                           const SelectOptions& options = {});

class LshIndex {
 public:
  static LshIndex build(const Dataset& dataset, const LshParams& params,
                        std::size_t threads = 0);

  // Distinct point ids sharing a bucket with `query` in any table, ascending.
  std::vector<std::size_t> candidates(std::span<const double> query) const;

  const LshParams& params() const { return params_; }
  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  void save(const std::filesystem::path& path) const;
  static LshIndex load(const std::filesystem::path& path);

  friend bool operator==(const LshIndex& a, const LshIndex& b);

 private:
  struct CodeHash {
    std::size_t operator()(const std::vector<std::int64_t>& code) const;
  };
  using Buckets =
      std::unordered_map<std::vector<std::int64_t>, std::vector<std::uint32_t>, CodeHash>;
  struct Table {
    std::vector<double> projections;  // m x d, row-major
    std::vector<double> offsets;      // m, in [0, width)
    Buckets buckets;
  };

  void hash(const Table& table, std::span<const double> x,
            std::vector<std::int64_t>& code) const;

  LshParams params_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<Table> tables_;
};

struct RetrievedNeighbors {
  RankedNeighbors ranked;  // at most K* entries, exact order among candidates
  std::size_t candidates = 0;
  bool short_list = false;  // fewer than K* candidates found
};

RetrievedNeighbors retrieve_approx_knn(const LshIndex& index, const Dataset& dataset,
                                       std::span<const double> query, std::size_t k_star);

// Truncated recursion over the retrieved neighbours of each query, zero for
// every other point, averaged over queries. Classification only.
ValuationResult shapley_lsh(const Dataset& dataset, const QuerySet& queries, std::size_t k,
                            double epsilon, double delta, const LshIndex& index,
                            std::size_t threads = 0);

}  // namespace knnshap

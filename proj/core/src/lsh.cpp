#include "knnshap/lsh.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "knnshap/errors.hpp"
#include "knnshap/exact.hpp"
#include "knnshap/parallel.hpp"
#include "knnshap/random.hpp"

namespace knnshap {

double collision_probability(double c, double width) {
  if (!(width > 0.0)) throw UsageError("LSH width must be positive");
  if (c < 0.0) throw UsageError("distance must be non-negative");
  if (c == 0.0) return 1.0;
  const double t = width / c;
  const double tail = 0.5 * std::erfc(t / std::numbers::sqrt2);  // Phi(-t)
  return 1.0 - 2.0 * tail -
         2.0 / (std::sqrt(2.0 * std::numbers::pi) * t) * (-std::expm1(-t * t / 2.0));
}

double g_exponent(double contrast, double width) {
  if (!(contrast > 0.0)) throw UsageError("relative contrast must be positive");
  if (std::isinf(contrast)) return 0.0;
  return std::log(collision_probability(1.0 / contrast, width)) /
         std::log(collision_probability(1.0, width));
}

ContrastEstimate estimate_contrast(const Dataset& dataset, const QuerySet& queries,
                                   std::size_t k, std::size_t sample_size,
                                   std::uint64_t seed, double width) {
  if (sample_size == 0) throw UsageError("contrast sample size must be at least 1");
  if (k == 0 || k > dataset.size()) {
    throw UsageError("contrast rank k=" + std::to_string(k) + " outside 1.." +
                     std::to_string(dataset.size()));
  }
  if (queries.size() == 0) throw UsageError("contrast estimation needs queries");
  if (queries.dim() != dataset.dim()) throw DataError("query dimension mismatch");
  std::mt19937_64 gen(mix_seed(seed, 0));
  ContrastEstimate est;
  double total = 0.0;
  for (std::size_t s = 0; s < sample_size; ++s) {
    const auto i = static_cast<std::size_t>(uniform_below(gen, dataset.size()));
    const auto j = static_cast<std::size_t>(uniform_below(gen, queries.size()));
    total += std::sqrt(squared_distance(dataset.row(i), queries.row(j)));
  }
  est.d_mean = total / static_cast<double>(sample_size);

  // Every query when there are few, otherwise a seeded sample.
  std::vector<std::size_t> picked(queries.size());
  for (std::size_t j = 0; j < picked.size(); ++j) picked[j] = j;
  if (picked.size() > sample_size) {
    std::mt19937_64 pick_gen(mix_seed(seed, 1));
    fisher_yates(std::span<std::size_t>(picked), pick_gen);
    picked.resize(sample_size);
    std::sort(picked.begin(), picked.end());
  }
  std::vector<double> dist(dataset.size());
  double kth_total = 0.0;
  for (std::size_t j : picked) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      dist[i] = squared_distance(dataset.row(i), queries.row(j));
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     dist.end());
    kth_total += std::sqrt(dist[k - 1]);
  }
  est.d_k = kth_total / static_cast<double>(picked.size());
  if (est.d_mean == 0.0 && est.d_k == 0.0) {
    est.contrast = 1.0;  // every point coincides with every query
  } else if (est.d_k == 0.0) {
    est.contrast = std::numeric_limits<double>::infinity();
  } else {
    est.contrast = est.d_mean / est.d_k;
  }
  est.g_exponent = g_exponent(est.contrast, width);
  return est;
}

void LshParams::validate() const {
  if (m < 1) throw UsageError("LSH needs at least one projection per table");
  if (l < 1) throw UsageError("LSH needs at least one table");
  if (!(width > 0.0) || !std::isfinite(width)) throw UsageError("LSH width must be positive");
}

LshSelection select_params(const Dataset& dataset, const QuerySet& queries,
                           std::size_t k_star, double delta, std::size_t query_count,
                           const SelectOptions& options) {
  if (options.width_grid.empty() || options.alpha_grid.empty()) {
    throw UsageError("LSH parameter grids must be nonempty");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  const std::size_t n = dataset.size();
  k_star = std::min(k_star, n);
  LshSelection sel;
  sel.contrast = estimate_contrast(dataset, queries, k_star, options.sample_size,
                                   options.seed, options.width_grid.front());

  double best_g = std::numeric_limits<double>::infinity();
  for (double w : options.width_grid) {
    const double g = g_exponent(sel.contrast.contrast, w);
    if (g < best_g) {
      best_g = g;
      sel.normalized_width = w;
    }
  }
  sel.contrast.g_exponent = best_g;
  if (best_g >= 1.0) {
    sel.warnings.push_back(
        "g(C_K*) = " + std::to_string(best_g) +
        " >= 1 for every width; LSH retrieval is not expected to beat exact search");
  }

  const double nn = static_cast<double>(n);
  const double per_query_delta = delta / static_cast<double>(std::max<std::size_t>(1, query_count));
  const double log_term = std::log(static_cast<double>(k_star) / per_query_delta);
  const double p_rand = collision_probability(1.0, sel.normalized_width);
  double best_cost = std::numeric_limits<double>::infinity();
  bool capped = false;
  for (double alpha : options.alpha_grid) {
    const double m_real = alpha * std::log(nn) / std::log(1.0 / p_rand);
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(m_real)));
    double l_real = std::ceil(std::pow(nn, alpha * best_g) * log_term);
    bool this_capped = false;
    if (!(l_real <= static_cast<double>(options.max_tables))) {
      l_real = static_cast<double>(options.max_tables);
      this_capped = true;
    }
    const auto l = std::max<std::size_t>(1, static_cast<std::size_t>(l_real));
    const double cost = static_cast<double>(l) * (static_cast<double>(m) + std::pow(nn, 1.0 - alpha));
    if (cost < best_cost) {
      best_cost = cost;
      sel.alpha = alpha;
      sel.params.m = m;
      sel.params.l = l;
      capped = this_capped;
    }
  }
  if (capped) {
    sel.warnings.push_back("table count capped at " + std::to_string(options.max_tables));
  }
  sel.params.width = sel.normalized_width * (sel.contrast.d_mean > 0.0 ? sel.contrast.d_mean : 1.0);
  sel.params.seed = options.seed;
  return sel;
}

std::size_t LshIndex::CodeHash::operator()(const std::vector<std::int64_t>& code) const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int64_t c : code) h = mix_seed(h, static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

void LshIndex::hash(const Table& table, std::span<const double> x,
                    std::vector<std::int64_t>& code) const {
  code.resize(params_.m);
  for (std::size_t b = 0; b < params_.m; ++b) {
    const double* w = table.projections.data() + b * d_;
    double dot = table.offsets[b];
    for (std::size_t i = 0; i < d_; ++i) dot += w[i] * x[i];
    code[b] = static_cast<std::int64_t>(std::floor(dot / params_.width));
  }
}

LshIndex LshIndex::build(const Dataset& dataset, const LshParams& params,
                         std::size_t threads) {
  params.validate();
  if (dataset.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("LSH index supports at most 2^32 - 1 points");
  }
  LshIndex index;
  index.params_ = params;
  index.n_ = dataset.size();
  index.d_ = dataset.dim();
  index.tables_.resize(params.l);
  parallel_for(params.l, threads, [&](std::size_t t) {
    Table& table = index.tables_[t];
    std::mt19937_64 gen(mix_seed(params.seed, t));
    NormalSampler normal;
    table.projections.resize(params.m * index.d_);
    for (double& v : table.projections) v = normal(gen);
    table.offsets.resize(params.m);
    for (double& v : table.offsets) v = uniform_unit(gen) * params.width;
    std::vector<std::int64_t> code;
    for (std::size_t i = 0; i < index.n_; ++i) {
      index.hash(table, dataset.row(i), code);
      table.buckets[code].push_back(static_cast<std::uint32_t>(i));
    }
  });
  return index;
}

std::vector<std::size_t> LshIndex::candidates(std::span<const double> query) const {
  if (query.size() != d_) throw DataError("query dimension differs from the index");
  std::vector<std::uint8_t> seen(n_, 0);
  std::vector<std::size_t> out;
  std::vector<std::int64_t> code;
  for (const Table& table : tables_) {
    hash(table, query, code);
    auto it = table.buckets.find(code);
    if (it == table.buckets.end()) continue;
    for (std::uint32_t id : it->second) {
      if (!seen[id]) {
        seen[id] = 1;
        out.push_back(id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const LshIndex& a, const LshIndex& b) {
  if (a.n_ != b.n_ || a.d_ != b.d_ || a.params_.m != b.params_.m ||
      a.params_.l != b.params_.l || a.params_.width != b.params_.width ||
      a.params_.seed != b.params_.seed || a.tables_.size() != b.tables_.size()) {
    return false;
  }
  for (std::size_t t = 0; t < a.tables_.size(); ++t) {
    const auto& x = a.tables_[t];
    const auto& y = b.tables_[t];
    if (x.projections != y.projections || x.offsets != y.offsets || x.buckets != y.buckets) {
      return false;
    }
  }
  return true;
}

namespace {

constexpr std::array<char, 8> kMagic{'K', 'N', 'N', 'L', 'S', 'H', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open " + path.string() + " for writing");
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void finish() {
    out_.flush();
    if (!out_) throw DataError("write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw DataError("cannot open " + path.string());
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw DataError("truncated index file " + path_.string());
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace

void LshIndex::save(const std::filesystem::path& path) const {
  Writer w(path);
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u64(n_);
  w.u64(d_);
  w.u64(params_.m);
  w.u64(params_.l);
  w.f64(params_.width);
  w.u64(params_.seed);
  for (const Table& table : tables_) {
    for (double v : table.projections) w.f64(v);
    for (double v : table.offsets) w.f64(v);
    std::vector<const Buckets::value_type*> sorted;
    sorted.reserve(table.buckets.size());
    for (const auto& entry : table.buckets) sorted.push_back(&entry);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->first < b->first; });
    w.u64(sorted.size());
    for (const auto* entry : sorted) {
      for (std::int64_t c : entry->first) w.i64(c);
      w.u64(entry->second.size());
      for (std::uint32_t id : entry->second) w.u64(id);
    }
  }
  w.finish();
}

LshIndex LshIndex::load(const std::filesystem::path& path) {
  Reader r(path);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw DataError(path.string() + " is not an LSH index file");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError("unsupported LSH index version " + std::to_string(version));
  }
  LshIndex index;
  index.n_ = r.u64();
  index.d_ = r.u64();
  index.params_.m = r.u64();
  index.params_.l = r.u64();
  index.params_.width = r.f64();
  index.params_.seed = r.u64();
  index.params_.validate();
  index.tables_.resize(index.params_.l);
  for (Table& table : index.tables_) {
    table.projections.resize(index.params_.m * index.d_);
    for (double& v : table.projections) v = r.f64();
    table.offsets.resize(index.params_.m);
    for (double& v : table.offsets) v = r.f64();
    const std::uint64_t buckets = r.u64();
    for (std::uint64_t b = 0; b < buckets; ++b) {
      std::vector<std::int64_t> code(index.params_.m);
      for (auto& c : code) c = r.i64();
      const std::uint64_t count = r.u64();
      std::vector<std::uint32_t> ids(count);
      for (auto& id : ids) {
        const std::uint64_t v = r.u64();
        if (v >= index.n_) throw DataError("corrupt LSH index: point id out of range");
        id = static_cast<std::uint32_t>(v);
      }
      table.buckets.emplace(std::move(code), std::move(ids));
    }
  }
  return index;
}

RetrievedNeighbors retrieve_approx_knn(const LshIndex& index, const Dataset& dataset,
                                       std::span<const double> query, std::size_t k_star) {
  if (index.size() != dataset.size() || index.dim() != dataset.dim()) {
    throw DataError("LSH index was built for a different dataset shape");
  }
  RetrievedNeighbors out;
  const std::vector<std::size_t> cand = index.candidates(query);
  out.candidates = cand.size();
  out.ranked = rank_candidates(dataset, query, cand, k_star);
  out.short_list = cand.size() < k_star;
  return out;
}

ValuationResult shapley_lsh(const Dataset& dataset, const QuerySet& queries, std::size_t k,
                            double epsilon, double delta, const LshIndex& index,
                            std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  if (dataset.task() != Task::classification) {
    throw UsageError("LSH valuation supports classification only; use exact for regression");
  }
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  GameSpec spec;
  spec.k = k;
  spec.validate(dataset.size());
  const std::size_t k_star = TruncationConfig{epsilon}.k_star(k);
  std::vector<std::vector<double>> rows(queries.size());
  std::vector<std::size_t> found(queries.size());
  std::vector<std::uint8_t> shorts(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t j) {
    const Query q = query_at(queries, j);
    RetrievedNeighbors got = retrieve_approx_knn(index, dataset, q.x, k_star);
    std::vector<std::uint8_t> match(got.ranked.order.size());
    for (std::size_t r = 0; r < match.size(); ++r) {
      match[r] = dataset.label(got.ranked.order[r]) == q.y;
    }
    const auto by_rank = truncated_by_rank(match, k, k_star, dataset.size());
    std::vector<double> row(dataset.size(), 0.0);
    for (std::size_t r = 0; r < by_rank.size(); ++r) row[got.ranked.order[r]] = by_rank[r];
    rows[j] = std::move(row);
    found[j] = got.candidates;
    shorts[j] = got.short_list;
  });
  ValuationResult result;
  result.values = aggregate_over_queries(rows);
  result.method = "lsh";
  result.guarantee = Guarantee{epsilon, delta};
  result.diagnostics.tables = index.params().l;
  double mean = 0.0;
  std::size_t short_count = 0;
  for (std::size_t j = 0; j < found.size(); ++j) {
    mean += static_cast<double>(found[j]);
    short_count += shorts[j];
  }
  result.diagnostics.candidates_mean = mean / static_cast<double>(found.size());
  result.diagnostics.extra["k_star"] = static_cast<double>(k_star);
  result.diagnostics.extra["short_queries"] = static_cast<double>(short_count);
  result.diagnostics.extra["m"] = static_cast<double>(index.params().m);
  result.diagnostics.extra["width"] = index.params().width;
  if (short_count > 0) {
    result.diagnostics.warnings.push_back(std::to_string(short_count) +
                                          " queries retrieved fewer than K* candidates");
  }
  result.diagnostics.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace knnshap

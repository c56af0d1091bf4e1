#include "knnshap_tools/cli.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "knnshap/errors.hpp"
#include "knnshap/exact.hpp"
#include "knnshap/io.hpp"
#include "knnshap/lsh.hpp"
#include "knnshap/montecarlo.hpp"
#include "knnshap/oracle.hpp"
#include "knnshap/sellers.hpp"
#include "knnshap/synth.hpp"
#include "knnshap_tools/bench.hpp"
#include "knnshap_tools/report.hpp"

namespace knnshap::tools {

namespace {

Task parse_task(const std::string& name) {
  if (name == "classification") return Task::classification;
  if (name == "regression") return Task::regression;
  throw UsageError("unknown task '" + name + "'");
}

std::string task_name(Task task) {
  return task == Task::classification ? "classification" : "regression";
}

// Writes through `fn` to `path`, or to `fallback` when no path is given.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path + " for writing");
  fn(file);
  if (!file) throw DataError("write to " + path + " failed");
}

void save_dataset(const std::string& path, const Dataset& data, const std::string& dtype) {
  if (guess_format(path) == DataFormat::csv) {
    write_csv(path, data);
  } else {
    write_binary(path, data, dtype == "f32" ? BinaryType::f32 : BinaryType::f64);
  }
}

struct IngestArgs {
  std::string input;
  std::string label = "y";
  std::string task = "classification";
  std::string seller_column;
  std::string out;
  std::string dtype = "f64";
};

void run_ingest(const IngestArgs& a, std::ostream& out) {
  CsvOptions opts;
  opts.label_column = a.label;
  opts.task = parse_task(a.task);
  if (!a.seller_column.empty()) opts.seller_column = a.seller_column;
  const LoadedData loaded = load_data(a.input, opts);
  if (!a.out.empty()) save_dataset(a.out, loaded.dataset, a.dtype);
  out << "{\"n\": " << loaded.dataset.size() << ", \"d\": " << loaded.dataset.dim()
      << ", \"task\": \"" << task_name(loaded.dataset.task()) << "\"";
  if (loaded.sellers) out << ", \"sellers\": " << loaded.sellers->seller_count();
  out << "}\n";
}

struct SynthArgs {
  std::string kind = "classification";
  std::size_t n = 1000;
  std::size_t d = 32;
  std::size_t classes = 2;
  std::size_t clusters = 0;
  double contrast = 1.0;
  double label_noise = 0.1;
  std::uint64_t seed = 0;
  std::size_t test_n = 0;
  std::string out;
  std::string test_out;
  std::string dtype = "f64";
};

void run_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg;
  cfg.task = parse_task(a.kind);
  cfg.n = a.n;
  cfg.d = a.d;
  cfg.classes = a.classes;
  cfg.clusters = a.clusters;
  cfg.contrast = a.contrast;
  cfg.label_noise = a.label_noise;
  cfg.seed = a.seed;
  if (a.test_n > 0 && a.test_out.empty()) throw UsageError("--test-n needs --test-out");
  if (a.test_n == 0 && !a.test_out.empty()) throw UsageError("--test-out needs --test-n");
  if (a.test_n == 0) {
    const Dataset train = synthesize(cfg);
    save_dataset(a.out, train, a.dtype);
    out << "{\"train\": " << train.size() << ", \"test\": 0, \"d\": " << train.dim()
        << "}\n";
    return;
  }
  const auto [train, test] = synthesize_split(cfg, a.test_n);
  save_dataset(a.out, train, a.dtype);
  save_dataset(a.test_out, test, a.dtype);
  out << "{\"train\": " << train.size() << ", \"test\": " << test.size()
      << ", \"d\": " << train.dim() << "}\n";
}

struct ValueArgs {
  std::string method;
  std::string train;
  std::string test;
  std::string label = "y";
  std::string task = "classification";
  std::size_t k = 1;
  double epsilon = 0.1;
  double delta = 0.1;
  std::string bound = "bennett";
  std::uint64_t seed = 0;
  std::string sellers;
  std::string seller_column;
  std::string weights;
  bool composite = false;
  bool budget_override = false;
  std::optional<double> range;
  std::size_t max_permutations = 1'000'000;
  std::size_t threads = 0;
  std::string index;
  std::string save_index;
  std::string out;
  std::string format = "json";
};

void require_plain(const ValueArgs& a, const GameSpec& spec, const std::string& what) {
  if (spec.task != Task::classification) {
    throw UsageError(what + " valuation supports classification only; use exact for regression");
  }
  if (spec.weighted() || spec.sellers || spec.composite) {
    throw UsageError(what + " valuation covers the unweighted per-point game only; "
                            "drop --weights, --sellers and --composite");
  }
  (void)a;
}

ValuationResult oracle_result(const Dataset& train, const QuerySet& test, const GameSpec& spec) {
  std::vector<double> all = oracle::value_bruteforce(train, test, spec);
  ValuationResult result;
  result.method = "oracle";
  if (spec.composite) {
    result.analyst_value = all.back();
    all.pop_back();
  }
  result.values = std::move(all);
  return result;
}

void run_value(const ValueArgs& a, std::ostream& out, std::ostream& err) {
  CsvOptions opts;
  opts.label_column = a.label;
  opts.task = parse_task(a.task);
  if (!a.seller_column.empty()) opts.seller_column = a.seller_column;
  LoadedData train = load_data(a.train, opts);
  CsvOptions test_opts = opts;
  test_opts.seller_column.reset();
  const Dataset test = load_data(a.test, test_opts).dataset;
  if (test.dim() != train.dataset.dim()) {
    throw DataError("test set has " + std::to_string(test.dim()) + " features, training set " +
                    std::to_string(train.dataset.dim()));
  }
  if (test.size() == 0) throw DataError("test set is empty");

  GameSpec spec;
  spec.task = train.dataset.task();
  spec.k = a.k;
  spec.composite = a.composite || a.method == "composite";
  if (!a.weights.empty()) {
    spec.weights = make_weight_rule(a.weights);
  } else if (a.method == "weighted") {
    spec.weights = make_weight_rule("inverse");
  }
  if (!a.sellers.empty() && train.sellers) {
    throw UsageError("give sellers either with --sellers or with --seller-column");
  }
  if (!a.sellers.empty()) {
    spec.sellers = read_seller_csv(a.sellers, train.dataset.size());
  } else if (train.sellers) {
    spec.sellers = std::move(train.sellers);
  }
  if (a.method == "seller" && !spec.sellers) {
    throw UsageError("seller valuation needs --sellers or --seller-column");
  }
  spec.validate(train.dataset.size());

  RunConfig config{{"k", static_cast<long long>(a.k)},
                   {"task", task_name(spec.task)},
                   {"train", a.train},
                   {"test", a.test},
                   {"queries", static_cast<long long>(test.size())},
                   {"weights", spec.weighted() ? spec.weights->name() : std::string("none")},
                   {"composite", spec.composite},
                   {"sellers", static_cast<long long>(spec.sellers ? spec.sellers->seller_count()
                                                                   : 0)}};

  ExactOptions exact_opts;
  exact_opts.threads = a.threads;
  exact_opts.budget.override_budget = a.budget_override;

  const auto start = std::chrono::steady_clock::now();
  ValuationResult result;
  if (a.method == "exact" || a.method == "weighted" || a.method == "seller" ||
      a.method == "composite") {
    result = value_exact(train.dataset, test, spec, exact_opts);
  } else if (a.method == "truncated") {
    require_plain(a, spec, "truncated");
    config.emplace_back("epsilon", a.epsilon);
    result = value_truncated(train.dataset, test, a.k, TruncationConfig{a.epsilon}, a.threads);
  } else if (a.method == "lsh") {
    require_plain(a, spec, "LSH");
    config.emplace_back("epsilon", a.epsilon);
    config.emplace_back("delta", a.delta);
    config.emplace_back("seed", static_cast<long long>(a.seed));
    std::vector<std::string> warnings;
    LshIndex index;
    if (!a.index.empty()) {
      index = LshIndex::load(a.index);
      if (index.size() != train.dataset.size() || index.dim() != train.dataset.dim()) {
        throw DataError("LSH index " + a.index + " does not match the training set shape");
      }
    } else {
      SelectOptions sel;
      sel.seed = a.seed;
      const std::size_t k_star = TruncationConfig{a.epsilon}.k_star(a.k);
      if (k_star > train.dataset.size()) {
        throw UsageError("K*=" + std::to_string(k_star) + " exceeds the training set size; "
                         "raise --epsilon or use exact");
      }
      const LshSelection selection =
          select_params(train.dataset, test, k_star, a.delta, test.size(), sel);
      warnings = selection.warnings;
      LshParams params = selection.params;
      params.seed = a.seed;
      index = LshIndex::build(train.dataset, params, a.threads);
    }
    if (!a.save_index.empty()) index.save(a.save_index);
    result = shapley_lsh(train.dataset, test, a.k, a.epsilon, a.delta, index, a.threads);
    result.diagnostics.warnings.insert(result.diagnostics.warnings.begin(), warnings.begin(),
                                       warnings.end());
  } else if (a.method == "mc") {
    McConfig mc;
    mc.epsilon = a.epsilon;
    mc.delta = a.delta;
    mc.bound = parse_bound(a.bound);
    mc.seed = a.seed;
    mc.range = a.range;
    mc.max_permutations = a.max_permutations;
    mc.threads = a.threads;
    config.emplace_back("epsilon", a.epsilon);
    config.emplace_back("delta", a.delta);
    config.emplace_back("bound", bound_name(mc.bound));
    config.emplace_back("seed", static_cast<long long>(a.seed));
    config.emplace_back("range", a.range ? *a.range : default_range(train.dataset, test, spec));
    config.emplace_back("max_permutations", static_cast<long long>(a.max_permutations));
    result = estimate_shapley_mc(train.dataset, test, spec, mc);
  } else {
    result = oracle_result(train.dataset, test, spec);
  }
  result.diagnostics.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  for (const std::string& w : result.diagnostics.warnings) err << "warning: " << w << '\n';
  emit(a.out, out, [&](std::ostream& os) {
    if (a.format == "csv") {
      write_result_csv(os, result);
    } else {
      write_result_json(os, result, config);
    }
  });
}

struct BenchArgs {
  std::string scenario;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> k_values;
  BenchOptions options;
  std::string out;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shapley values of training data under K-nearest-neighbour utilities",
               "knnshap"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a dataset and optionally convert it");
  ingest_cmd->add_option("--in", ingest.input, "CSV or binary dataset")->required();
  ingest_cmd->add_option("--label", ingest.label, "Label column of a CSV file");
  ingest_cmd->add_option("--task", ingest.task, "classification or regression")
      ->check(CLI::IsMember({"classification", "regression"}));
  ingest_cmd->add_option("--seller-column", ingest.seller_column, "Seller id column (1..M)");
  ingest_cmd->add_option("--out", ingest.out, "Converted copy (.csv or binary)");
  ingest_cmd->add_option("--dtype", ingest.dtype, "Binary element type")
      ->check(CLI::IsMember({"f32", "f64"}));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a Gaussian-mixture dataset");
  synth_cmd->add_option("--kind", synth.kind, "classification or regression")
      ->check(CLI::IsMember({"classification", "regression"}));
  synth_cmd->add_option("--n", synth.n, "Training points");
  synth_cmd->add_option("--d", synth.d, "Features");
  synth_cmd->add_option("--classes", synth.classes, "Classes");
  synth_cmd->add_option("--clusters", synth.clusters, "Mixture components (0: 8 per class)");
  synth_cmd->add_option("--contrast", synth.contrast, "Spread of cluster centres");
  synth_cmd->add_option("--label-noise", synth.label_noise, "Regression noise sd");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--test-n", synth.test_n, "Test points drawn from the same mixture");
  synth_cmd->add_option("--out", synth.out, "Training file (.csv or binary)")->required();
  synth_cmd->add_option("--test-out", synth.test_out, "Test file");
  synth_cmd->add_option("--dtype", synth.dtype, "Binary element type")
      ->check(CLI::IsMember({"f32", "f64"}));

  ValueArgs value;
  auto* value_cmd = app.add_subcommand("value", "Compute Shapley values");
  value_cmd->add_option("method", value.method, "Valuation method")
      ->required()
      ->check(CLI::IsMember(
          {"exact", "truncated", "lsh", "mc", "weighted", "seller", "composite", "oracle"}));
  value_cmd->add_option("--train", value.train, "Training set")->required();
  value_cmd->add_option("--test", value.test, "Test set (queries)")->required();
  value_cmd->add_option("--label", value.label, "Label column of CSV files");
  value_cmd->add_option("--task", value.task, "classification or regression")
      ->check(CLI::IsMember({"classification", "regression"}));
  value_cmd->add_option("--k", value.k, "Neighbours K");
  value_cmd->add_option("--epsilon", value.epsilon, "Error bound");
  value_cmd->add_option("--delta", value.delta, "Failure probability");
  value_cmd->add_option("--bound", value.bound, "Permutation count rule")
      ->check(CLI::IsMember({"hoeffding", "bennett", "bennett-approx", "heuristic"}));
  value_cmd->add_option("--seed", value.seed, "Random seed");
  value_cmd->add_option("--sellers", value.sellers, "CSV of point_id,seller_id");
  value_cmd->add_option("--seller-column", value.seller_column, "Seller id column in --train");
  value_cmd->add_option("--weights", value.weights, "Weight rule")
      ->check(CLI::IsMember({"inverse", "uniform"}));
  value_cmd->add_flag("--composite", value.composite, "Add the analyst as a player");
  value_cmd->add_flag("--budget-override", value.budget_override,
                      "Run enumerations beyond the work budget");
  value_cmd->add_option("--range", value.range, "Bound r on marginal contributions");
  value_cmd->add_option("--max-permutations", value.max_permutations, "Permutation cap");
  value_cmd->add_option("--threads", value.threads, "Worker threads (0: all cores)");
  value_cmd->add_option("--index", value.index, "Load a saved LSH index");
  value_cmd->add_option("--save-index", value.save_index, "Save the LSH index");
  value_cmd->add_option("--out", value.out, "Result file (default stdout)");
  value_cmd->add_option("--format", value.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a timing scenario and print CSV");
  bench_cmd->add_option("scenario", bench.scenario, "Scenario")
      ->required()
      ->check(CLI::IsMember(bench_scenarios()));
  bench_cmd->add_option("--sizes", bench.options.sizes, "Comma-separated sizes")
      ->delimiter(',');
  bench_cmd->add_option("--k-values", bench.options.k_values, "Comma-separated K values")
      ->delimiter(',');
  bench_cmd->add_option("--queries", bench.options.queries, "Queries per size");
  bench_cmd->add_option("--dim", bench.options.dim, "Features");
  bench_cmd->add_option("--epsilon", bench.options.epsilon, "Error bound");
  bench_cmd->add_option("--delta", bench.options.delta, "Failure probability");
  bench_cmd->add_option("--seed", bench.options.seed, "Random seed");
  bench_cmd->add_option("--threads", bench.options.threads, "Worker threads (0: all cores)");
  bench_cmd->add_option("--baseline-budget", bench.options.baseline_budget_s,
                        "Seconds a baseline may run before it is projected instead");
  bench_cmd->add_option("--repeats", bench.options.repeats, "Timing repeats (fastest kept)");
  bench_cmd->add_option("--out", bench.out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream x;
    const int code = app.exit(e, o, x);
    out << o.str();
    err << x.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest_cmd) {
      run_ingest(ingest, out);
    } else if (*synth_cmd) {
      run_synth(synth, out);
    } else if (*value_cmd) {
      run_value(value, out, err);
    } else if (*bench_cmd) {
      const auto rows = run_bench(bench.scenario, bench.options);
      emit(bench.out, out, [&](std::ostream& os) { write_bench_csv(os, rows); });
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const BudgetExceeded& e) {
    err << "budget refused: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace knnshap::tools

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "knnshap_tools/bench.hpp"
#include "knnshap_tools/cli.hpp"

namespace fs = std::filesystem;
using knnshap::tools::run_cli;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("knnshap_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "knnshap");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  // The pattern fixture: match, mismatch, match at distances 1, 2, 3.
  void write_pattern() const {
    write("train.csv", "x,y\n1,1\n2,0\n3,1\n");
    write("test.csv", "x,y\n0,1\n");
  }

  void write_small_random() {
    ASSERT_EQ(run({"synth", "--n", "9", "--d", "3", "--classes", "3", "--seed", "4",
                   "--test-n", "4", "--out", path("train.csv"), "--test-out",
                   path("test.csv")}),
              0)
        << err_.str();
  }

  static std::string strip_runtime(const std::string& json) {
    return std::regex_replace(json, std::regex("\"runtime_ms\": [^,}]*"), "\"runtime_ms\": 0");
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, ExactPatternFixture) {
  write_pattern();
  ASSERT_EQ(run({"value", "exact", "--k", "1", "--train", path("train.csv"), "--test",
                 path("test.csv")}),
            0)
      << err_.str();
  const auto doc = nlohmann::json::parse(out_.str());
  EXPECT_EQ(doc["schema"], 1);
  EXPECT_EQ(doc["method"], "exact");
  ASSERT_EQ(doc["values"].size(), 3u);
  EXPECT_NEAR(doc["values"][0].get<double>(), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(doc["values"][1].get<double>(), -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(doc["values"][2].get<double>(), 1.0 / 3.0, 1e-15);
}

TEST_F(CliTest, OracleMatchesExactThroughFiles) {
  write_small_random();
  for (const std::string k : {"1", "2", "3"}) {
    ASSERT_EQ(run({"value", "exact", "--k", k, "--train", path("train.csv"), "--test",
                   path("test.csv"), "--out", path("exact.json")}),
              0);
    ASSERT_EQ(run({"value", "oracle", "--k", k, "--train", path("train.csv"), "--test",
                   path("test.csv"), "--out", path("oracle.json")}),
              0);
    const auto a = nlohmann::json::parse(std::ifstream(path("exact.json")));
    const auto b = nlohmann::json::parse(std::ifstream(path("oracle.json")));
    ASSERT_EQ(a["values"].size(), b["values"].size());
    for (std::size_t i = 0; i < a["values"].size(); ++i) {
      EXPECT_NEAR(a["values"][i].get<double>(), b["values"][i].get<double>(), 1e-10);
    }
  }
}

TEST_F(CliTest, CompositeSellersAgreeWithOracle) {
  write_small_random();
  write("owners.csv", "point_id,seller_id\n0,1\n1,2\n2,3\n3,1\n4,2\n5,3\n6,4\n7,4\n8,1\n");
  for (const std::string method : {"seller", "composite"}) {
    std::vector<std::string> common{"--k", "2", "--train", path("train.csv"), "--test",
                                    path("test.csv"), "--sellers", path("owners.csv")};
    std::vector<std::string> exact{"value", method};
    exact.insert(exact.end(), common.begin(), common.end());
    ASSERT_EQ(run(exact), 0) << err_.str();
    const auto a = nlohmann::json::parse(out_.str());
    std::vector<std::string> oracle{"value", "oracle"};
    oracle.insert(oracle.end(), common.begin(), common.end());
    if (method == "composite") oracle.push_back("--composite");
    ASSERT_EQ(run(oracle), 0) << err_.str();
    const auto b = nlohmann::json::parse(out_.str());
    ASSERT_EQ(a["values"].size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(a["values"][i].get<double>(), b["values"][i].get<double>(), 1e-10);
    }
    EXPECT_EQ(a.contains("analyst_value"), method == "composite");
    if (method == "composite") {
      EXPECT_NEAR(a["analyst_value"].get<double>(), b["analyst_value"].get<double>(), 1e-10);
    }
  }
}

TEST_F(CliTest, ResultFollowsSchema) {
  write_small_random();
  for (const std::string method : {"exact", "truncated", "mc", "weighted", "oracle"}) {
    ASSERT_EQ(run({"value", method, "--k", "2", "--train", path("train.csv"), "--test",
                   path("test.csv")}),
              0)
        << method << ": " << err_.str();
    const auto doc = nlohmann::json::parse(out_.str());
    EXPECT_EQ(doc["schema"], 1);
    EXPECT_TRUE(doc["method"].is_string());
    EXPECT_TRUE(doc["config"].is_object());
    EXPECT_TRUE(doc["guarantee"].is_null() || doc["guarantee"].is_object());
    ASSERT_TRUE(doc["values"].is_array());
    EXPECT_EQ(doc["values"].size(), 9u) << method;
    for (const auto& v : doc["values"]) EXPECT_TRUE(v.is_number());
    ASSERT_TRUE(doc["diagnostics"].is_object());
    EXPECT_TRUE(doc["diagnostics"]["runtime_ms"].is_number());
    EXPECT_TRUE(doc["diagnostics"]["warnings"].is_array());
  }
}

TEST_F(CliTest, IdenticalCommandsGiveIdenticalOutput) {
  write_small_random();
  for (const std::string method : {"exact", "mc"}) {
    std::vector<std::string> args{"value", method, "--k", "2", "--seed", "9", "--train",
                                  path("train.csv"), "--test", path("test.csv")};
    ASSERT_EQ(run(args), 0);
    const std::string first = strip_runtime(out_.str());
    ASSERT_EQ(run(args), 0);
    EXPECT_EQ(first, strip_runtime(out_.str()));
    args.insert(args.end(), {"--threads", "3"});
    ASSERT_EQ(run(args), 0);
    EXPECT_EQ(first, strip_runtime(out_.str())) << "thread count changed " << method;
  }
}

TEST_F(CliTest, SynthIsByteIdenticalPerSeed) {
  for (const std::string name : {"a.csv", "b.csv"}) {
    ASSERT_EQ(run({"synth", "--n", "1000", "--d", "32", "--classes", "2", "--seed", "7",
                   "--out", path(name)}),
              0);
  }
  std::ifstream a(path("a.csv"));
  std::ifstream b(path("b.csv"));
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
}

TEST_F(CliTest, IngestConvertsToBinaryAndBack) {
  write_small_random();
  ASSERT_EQ(run({"ingest", "--in", path("train.csv"), "--out", path("train.bin")}), 0);
  EXPECT_NE(out_.str().find("\"n\": 9"), std::string::npos);
  ASSERT_EQ(run({"value", "exact", "--k", "2", "--train", path("train.csv"), "--test",
                 path("test.csv")}),
            0);
  const std::string from_csv = strip_runtime(out_.str());
  ASSERT_EQ(run({"value", "exact", "--k", "2", "--train", path("train.bin"), "--test",
                 path("test.csv")}),
            0);
  const auto a = nlohmann::json::parse(from_csv);
  const auto b = nlohmann::json::parse(out_.str());
  EXPECT_EQ(a["values"], b["values"]);
}

TEST_F(CliTest, ExitCodes) {
  write_pattern();
  EXPECT_EQ(run({"value", "bogus", "--train", path("train.csv"), "--test", path("test.csv")}),
            2);
  EXPECT_EQ(run({"value", "exact", "--test", path("test.csv")}), 2);
  EXPECT_EQ(run({"value", "lsh", "--task", "regression", "--train", path("train.csv"), "--test",
                 path("test.csv")}),
            2);
  EXPECT_NE(err_.str().find("classification only"), std::string::npos);
  EXPECT_EQ(run({"value", "truncated", "--weights", "inverse", "--train", path("train.csv"),
                 "--test", path("test.csv")}),
            2);
  EXPECT_EQ(run({"value", "exact", "--k", "5", "--train", path("train.csv"), "--test",
                 path("test.csv")}),
            2);
  EXPECT_EQ(run({"value", "exact", "--train", path("missing.csv"), "--test", path("test.csv")}),
            3);
  write("bad.csv", "x,y\n1,1\nfoo,0\n");
  EXPECT_EQ(run({"value", "exact", "--train", path("bad.csv"), "--test", path("test.csv")}), 3);
  EXPECT_NE(err_.str().find("3"), std::string::npos);
  EXPECT_EQ(run({"synth", "--n", "0", "--out", path("z.csv")}), 2);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, BudgetRefusal) {
  ASSERT_EQ(run({"synth", "--n", "300", "--d", "4", "--seed", "2", "--test-n", "1", "--out",
                 path("train.csv"), "--test-out", path("test.csv")}),
            0);
  std::vector<std::string> args{"value", "weighted", "--k", "5", "--train", path("train.csv"),
                                "--test", path("test.csv")};
  EXPECT_EQ(run(args), 4);
  EXPECT_NE(err_.str().find("budget"), std::string::npos);
}

TEST_F(CliTest, LshWarnsOnLowContrast) {
  ASSERT_EQ(run({"synth", "--n", "2000", "--d", "32", "--contrast", "0.05", "--seed", "3",
                 "--test-n", "5", "--out", path("train.csv"), "--test-out", path("test.csv")}),
            0);
  ASSERT_EQ(run({"value", "lsh", "--epsilon", "0.001", "--train", path("train.csv"), "--test",
                 path("test.csv")}),
            0)
      << err_.str();
  const auto doc = nlohmann::json::parse(out_.str());
  bool warned = false;
  for (const auto& w : doc["diagnostics"]["warnings"]) {
    warned = warned || w.get<std::string>().find("g") != std::string::npos;
  }
  EXPECT_TRUE(warned) << out_.str();
  EXPECT_NE(err_.str().find("warning"), std::string::npos);
}

TEST_F(CliTest, LshIndexRoundTrip) {
  ASSERT_EQ(run({"synth", "--n", "500", "--d", "8", "--contrast", "3", "--seed", "3",
                 "--test-n", "5", "--out", path("train.csv"), "--test-out", path("test.csv")}),
            0);
  std::vector<std::string> args{"value", "lsh", "--seed", "1", "--train", path("train.csv"),
                                "--test", path("test.csv")};
  auto save = args;
  save.insert(save.end(), {"--save-index", path("idx.bin")});
  ASSERT_EQ(run(save), 0) << err_.str();
  const auto built = nlohmann::json::parse(out_.str());
  auto load = args;
  load.insert(load.end(), {"--index", path("idx.bin")});
  ASSERT_EQ(run(load), 0) << err_.str();
  const auto loaded = nlohmann::json::parse(out_.str());
  EXPECT_EQ(built["values"], loaded["values"]);
}

TEST(BenchTest, BennettBelowHoeffdingAndFlat) {
  knnshap::tools::BenchOptions opts;
  const auto rows = knnshap::tools::bench_bennett_vs_hoeffding(opts);
  std::optional<std::size_t> first_bennett;
  for (std::size_t i = 0; i + 2 < rows.size(); i += 3) {
    ASSERT_EQ(rows[i].method, "hoeffding");
    ASSERT_EQ(rows[i + 1].method, "bennett");
    if (rows[i].n >= 1000) EXPECT_LT(*rows[i + 1].permutations, *rows[i].permutations);
    if (!first_bennett) first_bennett = rows[i + 1].permutations;
    EXPECT_EQ(rows[i + 1].permutations, first_bennett);
  }
  std::ostringstream csv;
  knnshap::tools::write_bench_csv(csv, rows);
  EXPECT_EQ(csv.str().rfind("method,n,k,runtime_s,max_error", 0), 0u);
}

TEST(BenchTest, WeightedSweepRowsPerK) {
  knnshap::tools::BenchOptions opts;
  opts.k_values = {1, 2};
  opts.queries = 2;
  opts.dim = 4;
  const auto rows = knnshap::tools::bench_weighted_exact_vs_mc(opts);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].method, "weighted-exact");
  EXPECT_EQ(rows[1].method, "weighted-mc");
  EXPECT_TRUE(rows[1].max_error.has_value());
}

}  // namespace

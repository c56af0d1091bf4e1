#include <filesystem>
#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "knnshap/errors.hpp"
#include "knnshap/io.hpp"
#include "knnshap/lsh.hpp"
#include "knnshap/synth.hpp"
#include "test_util.hpp"

namespace knnshap {
namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("knnshap_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  void write(const std::string& name, const std::string& body) {
    std::ofstream(dir_ / name) << body;
  }
  std::filesystem::path dir_;
};

TEST_F(TempDir, CsvThreeRows) {
  write("a.csv", "f1,y,f2\n1,0,2\n3,1,4\n5,0,6\n");
  auto got = read_csv(dir_ / "a.csv", CsvOptions{});
  EXPECT_EQ(got.dataset.size(), 3u);
  EXPECT_EQ(got.dataset.dim(), 2u);
  EXPECT_EQ(got.dataset.row(1)[1], 4.0);
  EXPECT_EQ(got.dataset.label(1), 1.0);
}

TEST_F(TempDir, CsvErrorsNameTheLine) {
  write("bad.csv", "x,y\n1,0\nabc,1\n");
  try {
    read_csv(dir_ / "bad.csv", CsvOptions{});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  write("nan.csv", "x,y\nnan,0\n");
  EXPECT_THROW(read_csv(dir_ / "nan.csv", CsvOptions{}), DataError);
  write("ragged.csv", "x,z,y\n1,2,0\n1,0\n");
  EXPECT_THROW(read_csv(dir_ / "ragged.csv", CsvOptions{}), DataError);
  write("nolabel.csv", "x,z\n1,2\n");
  EXPECT_THROW(read_csv(dir_ / "nolabel.csv", CsvOptions{}), DataError);
}

TEST_F(TempDir, CsvSellerColumn) {
  write("s.csv", "x,owner,y\n1,1,0\n2,2,1\n3,1,0\n");
  CsvOptions opts;
  opts.seller_column = "owner";
  auto got = read_csv(dir_ / "s.csv", opts);
  ASSERT_TRUE(got.sellers);
  EXPECT_EQ(got.dataset.dim(), 1u);
  EXPECT_EQ(got.sellers->seller_count(), 2u);
  EXPECT_EQ(got.sellers->owner(2), 0u);
}

TEST_F(TempDir, SellerCsv) {
  write("m.csv", "point_id,seller_id\n0,2\n1,1\n2,2\n");
  auto map = read_seller_csv(dir_ / "m.csv", 3);
  EXPECT_EQ(map.owner(0), 1u);
  EXPECT_EQ(map.seller_count(), 2u);
  write("gap.csv", "0,1\n1,3\n");
  EXPECT_THROW(read_seller_csv(dir_ / "gap.csv", 2), DataError);
  write("missing.csv", "0,1\n");
  EXPECT_THROW(read_seller_csv(dir_ / "missing.csv", 2), DataError);
}

TEST_F(TempDir, BinaryRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (Task task : {Task::classification, Task::regression}) {
    auto ds = testing::random_dataset(rng, 17, 5, task);
    write_binary(dir_ / "d.bin", ds);
    EXPECT_TRUE(read_binary(dir_ / "d.bin") == ds);
  }
}

TEST_F(TempDir, BinaryF32) {
  Dataset ds({1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}, 2, {0, 1, 0, 1, 1},
             Task::classification);
  write_binary(dir_ / "f.bin", ds, BinaryType::f32);
  auto got = read_binary(dir_ / "f.bin");
  EXPECT_EQ(got.size(), 5u);
  EXPECT_EQ(got.dim(), 2u);
  EXPECT_TRUE(got == ds);
  EXPECT_EQ(std::filesystem::file_size(dir_ / "f.bin"), 5u * 3u * 4u);
}

TEST_F(TempDir, BinarySizeMismatch) {
  Dataset ds({1.0, 2.0}, 1, {0, 1}, Task::classification);
  write_binary(dir_ / "x.bin", ds);
  write("x.bin.json", R"({"n": 3, "d": 1, "dtype": "f64", "label": "class"})");
  EXPECT_THROW(read_binary(dir_ / "x.bin"), DataError);
  std::filesystem::remove(dir_ / "x.bin.json");
  EXPECT_THROW(read_binary(dir_ / "x.bin"), DataError);
}

TEST_F(TempDir, CsvRoundTrip) {
  std::mt19937_64 rng(2);
  auto ds = testing::random_dataset(rng, 9, 3, Task::regression);
  write_csv(dir_ / "r.csv", ds);
  CsvOptions opts;
  opts.task = Task::regression;
  EXPECT_TRUE(read_csv(dir_ / "r.csv", opts).dataset == ds);
}

TEST(SynthTest, Deterministic) {
  SynthConfig cfg;
  cfg.n = 1000;
  cfg.d = 32;
  cfg.seed = 7;
  EXPECT_TRUE(synthesize(cfg) == synthesize(cfg));
  cfg.seed = 8;
  auto other = synthesize(cfg);
  cfg.seed = 7;
  EXPECT_FALSE(synthesize(cfg) == other);
}

TEST(SynthTest, ContrastKnobRaisesContrast) {
  SynthConfig cfg;
  cfg.n = 2000;
  cfg.d = 16;
  cfg.seed = 7;
  cfg.contrast = 0.3;
  auto [lo_train, lo_test] = synthesize_split(cfg, 50);
  cfg.contrast = 3.0;
  auto [hi_train, hi_test] = synthesize_split(cfg, 50);
  EXPECT_GT(estimate_contrast(hi_train, hi_test, 5, 1000).contrast,
            estimate_contrast(lo_train, lo_test, 5, 1000).contrast);
}

TEST(SynthTest, RejectsEmpty) {
  SynthConfig cfg;
  cfg.n = 0;
  EXPECT_THROW(synthesize(cfg), UsageError);
}

TEST(SynthTest, Regression) {
  SynthConfig cfg;
  cfg.task = Task::regression;
  cfg.n = 50;
  auto ds = synthesize(cfg);
  EXPECT_EQ(ds.task(), Task::regression);
  EXPECT_EQ(ds.size(), 50u);
}

}  // namespace
}  // namespace knnshap

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "knnshap/dataset.hpp"

namespace knnshap {

enum class DataFormat { csv, binary };

// Picks csv for a .csv extension, binary otherwise.
DataFormat guess_format(const std::filesystem::path& path);

struct CsvOptions {
  std::string label_column = "y";
  std::optional<std::string> seller_column;  // ids 1..M, excluded from features
  Task task = Task::classification;
};

struct LoadedData {
  Dataset dataset;
  std::optional<SellerMap> sellers;
};

// Header row, numeric cells only. Errors name the 1-based line number.
LoadedData read_csv(const std::filesystem::path& path, const CsvOptions& options);
void write_csv(const std::filesystem::path& path, const Dataset& dataset,
               const std::string& label_column = "y");

enum class BinaryType { f32, f64 };

// Row-major little-endian payload, each row the d features followed by the
// label, described by a JSON sidecar at <path>.json:
// {"n": N, "d": d, "dtype": "f32"|"f64", "label": "class"|"real"}.
Dataset read_binary(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, const Dataset& dataset,
                  BinaryType dtype = BinaryType::f64);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

// Two columns point_id (0-based row) and seller_id (1..M); a header line is
// optional.
SellerMap read_seller_csv(const std::filesystem::path& path, std::size_t points);

LoadedData load_data(const std::filesystem::path& path, const CsvOptions& options);

}  // namespace knnshap

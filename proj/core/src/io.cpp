#include "knnshap/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "knnshap/errors.hpp"

namespace knnshap {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    return std::nullopt;
  }
  return v;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
  throw DataError(path.string() + ": line " + std::to_string(line) + ": " + what);
}

}  // namespace

DataFormat guess_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? DataFormat::csv : DataFormat::binary;
}

LoadedData read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  ++line_no;
  const auto header = split_commas(line);
  std::optional<std::size_t> label_col;
  std::optional<std::size_t> seller_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name == options.label_column) label_col = c;
    if (options.seller_column && name == *options.seller_column) seller_col = c;
  }
  if (!label_col) fail(path, 1, "no label column named '" + options.label_column + "'");
  if (options.seller_column && !seller_col) {
    fail(path, 1, "no seller column named '" + *options.seller_column + "'");
  }
  const std::size_t width = header.size();
  const std::size_t dim = width - 1 - (seller_col ? 1 : 0);
  if (dim == 0) fail(path, 1, "no feature columns");

  std::vector<double> features;
  std::vector<double> labels;
  std::vector<std::size_t> owners;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != width) {
      fail(path, line_no, "expected " + std::to_string(width) + " cells, found " +
                              std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) fail(path, line_no, "non-numeric cell '" + std::string(trim(cells[c])) + "'");
      if (!std::isfinite(*v)) fail(path, line_no, "non-finite value");
      if (c == *label_col) {
        if (options.task == Task::classification && *v != std::floor(*v)) {
          fail(path, line_no, "class label must be an integer");
        }
        labels.push_back(*v);
      } else if (seller_col && c == *seller_col) {
        if (*v < 1 || *v != std::floor(*v)) fail(path, line_no, "seller id must be an integer >= 1");
        owners.push_back(static_cast<std::size_t>(*v) - 1);
      } else {
        features.push_back(*v);
      }
    }
  }
  if (labels.empty()) throw DataError(path.string() + ": no data rows");
  LoadedData out{Dataset(std::move(features), dim, std::move(labels), options.task), std::nullopt};
  if (seller_col) out.sellers = SellerMap(std::move(owners));
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& dataset,
               const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < dataset.dim(); ++j) out << 'x' << j << ',';
  out << label_column << '\n';
  char buf[64];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.row(i)) {
      put(v);
      out << ',';
    }
    put(dataset.label(i));
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

namespace {

void put_le(std::ofstream& out, const void* value, std::size_t size) {
  unsigned char bytes[8];
  std::memcpy(bytes, value, size);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + size);
  out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(size));
}

void get_le(std::ifstream& in, void* value, std::size_t size) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), static_cast<std::streamsize>(size));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + size);
  std::memcpy(value, bytes, size);
}

}  // namespace

void write_binary(const std::filesystem::path& path, const Dataset& dataset, BinaryType dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  auto put = [&](double v) {
    if (dtype == BinaryType::f32) {
      const auto f = static_cast<float>(v);
      put_le(out, &f, 4);
    } else {
      put_le(out, &v, 8);
    }
  };
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.row(i)) put(v);
    put(dataset.label(i));
  }
  if (!out) throw DataError("write failed for " + path.string());
  nlohmann::json meta{{"n", dataset.size()},
                      {"d", dataset.dim()},
                      {"dtype", dtype == BinaryType::f32 ? "f32" : "f64"},
                      {"label", dataset.task() == Task::classification ? "class" : "real"}};
  std::ofstream side(sidecar_path(path));
  side << meta.dump(2) << '\n';
  if (!side) throw DataError("write failed for " + sidecar_path(path).string());
}

Dataset read_binary(const std::filesystem::path& path) {
  const auto side_path = sidecar_path(path);
  std::ifstream side(side_path);
  if (!side) throw DataError("missing sidecar " + side_path.string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(side_path.string() + ": " + e.what());
  }
  std::size_t n = 0;
  std::size_t d = 0;
  std::string dtype;
  std::string label;
  try {
    n = meta.at("n").get<std::size_t>();
    d = meta.at("d").get<std::size_t>();
    dtype = meta.at("dtype").get<std::string>();
    label = meta.at("label").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(side_path.string() + ": " + e.what());
  }
  if (dtype != "f32" && dtype != "f64") throw DataError("dtype must be f32 or f64");
  if (label != "class" && label != "real") throw DataError("label must be class or real");
  const std::size_t width = dtype == "f32" ? 4 : 8;
  const auto expected = n * (d + 1) * width;
  std::error_code ec;
  const auto actual = std::filesystem::file_size(path, ec);
  if (ec) throw DataError("cannot stat " + path.string());
  if (actual != expected) {
    throw DataError(path.string() + ": payload has " + std::to_string(actual) +
                    " bytes, sidecar implies " + std::to_string(expected));
  }
  std::ifstream in(path, std::ios::binary);
  std::vector<double> x;
  x.reserve(n * d);
  std::vector<double> y(n);
  const Task task = label == "class" ? Task::classification : Task::regression;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= d; ++j) {
      double v;
      if (width == 4) {
        float f;
        get_le(in, &f, 4);
        v = f;
      } else {
        get_le(in, &v, 8);
      }
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": row " + std::to_string(i + 1) + ": non-finite value");
      }
      if (j < d) {
        x.push_back(v);
      } else {
        if (task == Task::classification && v != std::floor(v)) {
          throw DataError(path.string() + ": row " + std::to_string(i + 1) +
                          ": class label must be an integer");
        }
        y[i] = v;
      }
    }
  }
  if (!in) throw DataError("truncated payload " + path.string());
  return Dataset(std::move(x), d, std::move(y), task);
}

SellerMap read_seller_csv(const std::filesystem::path& path, std::size_t points) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::size_t> owner(points, 0);
  std::vector<std::uint8_t> seen(points, 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 2) fail(path, line_no, "expected point_id,seller_id");
    const auto point = parse_number(cells[0]);
    const auto seller = parse_number(cells[1]);
    if (!point || !seller) {
      if (line_no == 1) continue;  // header
      fail(path, line_no, "non-numeric cell");
    }
    if (*point < 0 || *point != std::floor(*point) || *point >= static_cast<double>(points)) {
      fail(path, line_no, "point id outside 0.." + std::to_string(points - 1));
    }
    if (*seller < 1 || *seller != std::floor(*seller)) {
      fail(path, line_no, "seller id must be an integer >= 1");
    }
    const auto p = static_cast<std::size_t>(*point);
    if (seen[p]) fail(path, line_no, "point " + std::to_string(p) + " listed twice");
    seen[p] = 1;
    owner[p] = static_cast<std::size_t>(*seller) - 1;
  }
  for (std::size_t p = 0; p < points; ++p) {
    if (!seen[p]) throw DataError(path.string() + ": point " + std::to_string(p) + " has no seller");
  }
  return SellerMap(std::move(owner));
}

LoadedData load_data(const std::filesystem::path& path, const CsvOptions& options) {
  if (guess_format(path) == DataFormat::csv) return read_csv(path, options);
  return LoadedData{read_binary(path), std::nullopt};
}

}  // namespace knnshap

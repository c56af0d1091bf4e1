#include "knnshap_tools/report.hpp"

#include <cmath>

#include <fmt/format.h>

namespace knnshap::tools {

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e308" : "-1e308";
  return fmt::format("{:.17g}", v);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          out += fmt::format("\\u{:04x}", static_cast<int>(c));
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string render(const ConfigValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return quote(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else {
          return std::to_string(x);
        }
      },
      v);
}

}  // namespace

void write_result_json(std::ostream& out, const ValuationResult& result,
                       const RunConfig& config) {
  out << "{\n  \"schema\": 1,\n  \"method\": " << quote(result.method) << ",\n";
  out << "  \"config\": {";
  for (std::size_t i = 0; i < config.size(); ++i) {
    out << (i ? ", " : "") << quote(config[i].first) << ": " << render(config[i].second);
  }
  out << "},\n  \"guarantee\": ";
  if (result.guarantee) {
    out << "{\"epsilon\": " << format_double(result.guarantee->epsilon)
        << ", \"delta\": " << format_double(result.guarantee->delta) << "}";
  } else {
    out << "null";
  }
  out << ",\n  \"values\": [";
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    out << (i ? ", " : "") << format_double(result.values[i]);
  }
  out << "],\n";
  if (result.analyst_value) {
    out << "  \"analyst_value\": " << format_double(*result.analyst_value) << ",\n";
  }
  const Diagnostics& d = result.diagnostics;
  out << "  \"diagnostics\": {\"runtime_ms\": " << format_double(d.runtime_ms);
  if (d.permutations) out << ", \"permutations\": " << *d.permutations;
  if (d.tables) out << ", \"tables\": " << *d.tables;
  if (d.candidates_mean) out << ", \"candidates_mean\": " << format_double(*d.candidates_mean);
  out << ", \"incomplete\": " << (d.incomplete ? "true" : "false");
  out << ", \"warnings\": [";
  for (std::size_t i = 0; i < d.warnings.size(); ++i) {
    out << (i ? ", " : "") << quote(d.warnings[i]);
  }
  out << "]";
  for (const auto& [key, value] : d.extra) out << ", " << quote(key) << ": " << format_double(value);
  out << "}\n}\n";
}

void write_result_csv(std::ostream& out, const ValuationResult& result) {
  out << "player,value\n";
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    out << i << ',' << format_double(result.values[i]) << '\n';
  }
  if (result.analyst_value) out << "analyst," << format_double(*result.analyst_value) << '\n';
}

}  // namespace knnshap::tools

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "knnshap/game.hpp"

namespace knnshap::tools {

// Flat run configuration echoed into result files, in insertion order.
using ConfigValue = std::variant<std::string, double, long long, bool>;
using RunConfig = std::vector<std::pair<std::string, ConfigValue>>;

// Doubles use 17 significant digits so files can be compared value by value.
std::string format_double(double v);

// {"schema": 1, "method", "config", "guarantee", "values", "analyst_value"?,
//  "diagnostics"}.
void write_result_json(std::ostream& out, const ValuationResult& result,
                       const RunConfig& config);

// One "player,value" row per data player, then "analyst,<value>" if present.
void write_result_csv(std::ostream& out, const ValuationResult& result);

}  // namespace knnshap::tools

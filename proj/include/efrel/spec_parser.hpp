#pragma once

#include "efrel/func_expr.hpp"
#include "efrel/scenarios.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace efrel {

// Grammar:
//   spec   := [<c> '*'] term
//   term   := 'id^' <a> [('*' | '/') 'leta[' <e0> ',' ... ']'] [ '*table:' <path> ]
//           | 'table:' <path> | 'step:' <a> ',' <b> | 'trunc(' spec ')'
//           | 'fold(' spec ',' <c> ')'
// Table files hold "n value" lines for consecutive levels n = 0, 1, ...
// Soft warnings (alpha below 1) are appended to `warnings` when given.
FuncExpr parse_func_spec(std::string_view s, double log_base = std::numbers::e,
                         std::vector<std::string>* warnings = nullptr);

// Inverse of parse_func_spec up to equality of the parsed expression.
// Tables without a source path render as "table:<inline>" (not parseable).
std::string render_func_spec(const FuncExpr& f);

std::vector<double> read_table_file(const std::string& path);

// empty | all | evens | odds | finite:<k>,... | periodic:<p>:<r>,...[:<start>:<k>,...]
SubsetSpec parse_subset(std::string_view s);

// "[]", "[1,0.5]" or "1,0.5"
EtaVector parse_eta(std::string_view s);

// "17/16" or a decimal; must be finite.
double parse_rational(std::string_view s);

}  // namespace efrel

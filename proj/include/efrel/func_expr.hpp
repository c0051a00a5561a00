#pragma once

#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace efrel {

// x = mant * 2^exp2. Lets callers evaluate at 2^{-10000} and beyond.
struct ScaledReal {
  double mant = 0.0;
  std::int64_t exp2 = 0;

  static ScaledReal from_double(double x) { return {x, 0}; }
  static ScaledReal inverse_power(std::int64_t n) { return {1.0, -n}; }

  // Normalized copy with mant in [0.5, 1) (or 0).
  ScaledReal normalized() const;
  double to_double() const;
  double log() const;
  bool is_zero() const { return mant == 0.0; }
};

enum class FuncKind { power_log, tabulated, step, truncated, circle_fold };

// Π t_depth(x)^exponent
struct LogFactor {
  unsigned depth = 0;
  double exponent = 0.0;
  bool operator==(const LogFactor&) const = default;
};

enum class TableLayout {
  geometric,  // value[n] at x = 1/2^n, affine in x between consecutive knots
  uniform,    // value[i] at x = i/2^depth
};

struct FuncExpr {
  FuncKind kind = FuncKind::power_log;
  double scale = 1.0;
  // power part and log factors: power_log and tabulated kinds
  double alpha = 0.0;
  std::vector<LogFactor> factors;
  double log_base = std::numbers::e;

  TableLayout layout = TableLayout::geometric;
  unsigned table_depth = 0;  // uniform layout only
  std::vector<double> table;
  std::string table_source;  // file path when parsed from "table:<path>"

  // step: indicator of (step_lo, step_hi]
  double step_lo = 0.0;
  double step_hi = 1.0;

  // truncated: min(inner, 1); circle_fold: inner(c x) / inner(c (1-x))
  std::shared_ptr<const FuncExpr> inner;
  double fold_scale = 2.0;
};

bool operator==(const FuncExpr& a, const FuncExpr& b);

// Builders.
FuncExpr power(double alpha, double log_base = std::numbers::e);
FuncExpr power_log(double alpha, std::vector<LogFactor> factors,
                   double log_base = std::numbers::e);
FuncExpr step(double lo, double hi);
FuncExpr geometric_table(std::vector<double> values);
FuncExpr uniform_table(unsigned depth, std::vector<double> values);
FuncExpr truncate(const FuncExpr& f);
FuncExpr circle_fold(const FuncExpr& f, double c);
FuncExpr scaled(FuncExpr f, double c);

// Entries of η may be any sign; l_η = Π t_i^{η_i}.
struct EtaVector {
  std::vector<double> entries;
  bool operator==(const EtaVector&) const = default;
};

enum class Ordering { less, equal, greater };
Ordering lex_compare(const EtaVector& a, const EtaVector& b);
const char* to_string(Ordering o);

// l_η, 1/l_η and Id^α l_η^{sign}.
FuncExpr leta(const EtaVector& eta, double log_base = std::numbers::e);
FuncExpr inv_leta(const EtaVector& eta, double log_base = std::numbers::e);
FuncExpr id_leta(double alpha, const EtaVector& eta, int sign,
                 double log_base = std::numbers::e);

// Product of f with x^alpha Π t^e (f must be power_log or tabulated).
FuncExpr multiply_power_log(FuncExpr f, double alpha, const std::vector<LogFactor>& factors);

double eval_func(const FuncExpr& f, double x);
double eval_scaled(const FuncExpr& f, ScaledReal x);
inline double eval_at_level(const FuncExpr& f, std::int64_t n) {
  return eval_scaled(f, ScaledReal::inverse_power(n));
}
// ln f(x) without leaving the log domain (power_log); other kinds take the
// log of the value.
double log_eval_scaled(const FuncExpr& f, ScaledReal x);
// Straightforward nested evaluation; reference for the log-domain path.
double eval_direct(const FuncExpr& f, double x);

// t_m(x) for the given base, computed in the log domain.
double eval_t(unsigned m, ScaledReal x, double log_base = std::numbers::e);

// Analytic kinds: exact zero; tabulated: below 1e-300.
bool is_zero_value(const FuncExpr& f, double v);
bool is_analytic(const FuncExpr& f);

}  // namespace efrel

#include "efrel/func_expr.hpp"

#include "efrel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace efrel {

ScaledReal ScaledReal::normalized() const {
  if (mant == 0.0) return {0.0, 0};
  int e = 0;
  const double m = std::frexp(mant, &e);
  return {m, exp2 + e};
}

double ScaledReal::to_double() const {
  if (mant == 0.0) return 0.0;
  const ScaledReal n = normalized();
  if (n.exp2 < -1100) return 0.0;
  if (n.exp2 > 1100) return HUGE_VAL;
  return std::ldexp(n.mant, static_cast<int>(n.exp2));
}

double ScaledReal::log() const {
  if (mant == 0.0) return -HUGE_VAL;
  const ScaledReal n = normalized();
  return std::log(n.mant) + static_cast<double>(n.exp2) * std::numbers::ln2;
}

bool operator==(const FuncExpr& a, const FuncExpr& b) {
  if (a.kind != b.kind || a.scale != b.scale) return false;
  switch (a.kind) {
    case FuncKind::power_log:
      return a.alpha == b.alpha && a.factors == b.factors && a.log_base == b.log_base;
    case FuncKind::tabulated:
      return a.alpha == b.alpha && a.factors == b.factors && a.log_base == b.log_base &&
             a.layout == b.layout && a.table_depth == b.table_depth && a.table == b.table;
    case FuncKind::step:
      return a.step_lo == b.step_lo && a.step_hi == b.step_hi;
    case FuncKind::truncated:
      return a.inner && b.inner && *a.inner == *b.inner;
    case FuncKind::circle_fold:
      return a.fold_scale == b.fold_scale && a.inner && b.inner && *a.inner == *b.inner;
  }
  return false;
}

FuncExpr power(double alpha, double log_base) { return power_log(alpha, {}, log_base); }

FuncExpr power_log(double alpha, std::vector<LogFactor> factors, double log_base) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::range_error, "power exponent must be >= 0");
  if (!(log_base > 0.0) || log_base == 1.0) {
    throw Error(ErrorKind::range_error, "log base must be positive and != 1");
  }
  FuncExpr f;
  f.kind = FuncKind::power_log;
  f.alpha = alpha;
  std::erase_if(factors, [](const LogFactor& lf) { return lf.exponent == 0.0; });
  std::sort(factors.begin(), factors.end(),
            [](const LogFactor& a, const LogFactor& b) { return a.depth < b.depth; });
  f.factors = std::move(factors);
  f.log_base = log_base;
  return f;
}

FuncExpr step(double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw Error(ErrorKind::range_error, "step interval must satisfy 0 <= a < b <= 1");
  }
  FuncExpr f;
  f.kind = FuncKind::step;
  f.step_lo = lo;
  f.step_hi = hi;
  return f;
}

FuncExpr geometric_table(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::range_error, "empty table");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::range_error, "table values must be finite and >= 0");
    }
  }
  FuncExpr f;
  f.kind = FuncKind::tabulated;
  f.layout = TableLayout::geometric;
  f.table = std::move(values);
  return f;
}

FuncExpr uniform_table(unsigned depth, std::vector<double> values) {
  if (values.size() != (std::size_t{1} << depth) + 1) {
    throw Error(ErrorKind::range_error, "uniform table needs 2^depth + 1 values");
  }
  FuncExpr f = geometric_table(std::move(values));
  f.layout = TableLayout::uniform;
  f.table_depth = depth;
  return f;
}

FuncExpr truncate(const FuncExpr& f) {
  FuncExpr t;
  t.kind = FuncKind::truncated;
  t.inner = std::make_shared<const FuncExpr>(f);
  return t;
}

FuncExpr circle_fold(const FuncExpr& f, double c) {
  if (!(c > 0.0 && c <= 2.0)) throw Error(ErrorKind::range_error, "fold scale must be in (0, 2]");
  FuncExpr t;
  t.kind = FuncKind::circle_fold;
  t.fold_scale = c;
  t.inner = std::make_shared<const FuncExpr>(f);
  return t;
}

FuncExpr scaled(FuncExpr f, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorKind::range_error, "scale must be > 0");
  f.scale *= c;
  return f;
}

Ordering lex_compare(const EtaVector& a, const EtaVector& b) {
  const std::size_t n = std::max(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.entries.size() ? a.entries[i] : 0.0;
    const double y = i < b.entries.size() ? b.entries[i] : 0.0;
    if (x < y) return Ordering::less;
    if (x > y) return Ordering::greater;
  }
  return Ordering::equal;
}

const char* to_string(Ordering o) {
  switch (o) {
    case Ordering::less: return "less";
    case Ordering::equal: return "equal";
    case Ordering::greater: return "greater";
  }
  return "?";
}

FuncExpr id_leta(double alpha, const EtaVector& eta, int sign, double log_base) {
  std::vector<LogFactor> factors;
  for (std::size_t i = 0; i < eta.entries.size(); ++i) {
    factors.push_back({static_cast<unsigned>(i), sign * eta.entries[i]});
  }
  return power_log(alpha, std::move(factors), log_base);
}

FuncExpr leta(const EtaVector& eta, double log_base) { return id_leta(0.0, eta, +1, log_base); }
FuncExpr inv_leta(const EtaVector& eta, double log_base) { return id_leta(0.0, eta, -1, log_base); }

FuncExpr multiply_power_log(FuncExpr f, double alpha, const std::vector<LogFactor>& factors) {
  if (f.kind != FuncKind::power_log && f.kind != FuncKind::tabulated) {
    throw Error(ErrorKind::precondition_violated,
                "power-log multiplier needs a power-log or tabulated expression");
  }
  f.alpha += alpha;
  for (const LogFactor& lf : factors) {
    auto it = std::find_if(f.factors.begin(), f.factors.end(),
                           [&](const LogFactor& g) { return g.depth == lf.depth; });
    if (it == f.factors.end()) {
      f.factors.push_back(lf);
    } else {
      it->exponent += lf.exponent;
    }
  }
  std::erase_if(f.factors, [](const LogFactor& lf) { return lf.exponent == 0.0; });
  std::sort(f.factors.begin(), f.factors.end(),
            [](const LogFactor& a, const LogFactor& b) { return a.depth < b.depth; });
  return f;
}

bool is_analytic(const FuncExpr& f) {
  switch (f.kind) {
    case FuncKind::power_log:
    case FuncKind::step:
      return true;
    case FuncKind::tabulated:
      return false;
    case FuncKind::truncated:
    case FuncKind::circle_fold:
      return is_analytic(*f.inner);
  }
  return true;
}

bool is_zero_value(const FuncExpr& f, double v) {
  return is_analytic(f) ? v == 0.0 : std::fabs(v) < 1e-300;
}

namespace {

void check_range(const ScaledReal& x) {
  const ScaledReal n = x.normalized();
  if (n.mant < 0.0 || (n.mant > 0.0 && n.exp2 > 1) ||
      (n.exp2 == 1 && n.mant > 0.5 * (1.0 + 1e-12))) {
    throw Error(ErrorKind::range_error, "argument outside [0, 1]");
  }
}

// ln of Π t^e at x > 0; u holds the log-domain chain u_m = t_m - 1.
double log_factors(const FuncExpr& f, double lnx) {
  double acc = 0.0;
  if (f.factors.empty()) return acc;
  const double lnb = std::log(f.log_base);
  double u = std::max(0.0, -lnx / lnb);
  unsigned depth = 0;
  for (const LogFactor& lf : f.factors) {
    while (depth < lf.depth) {
      u = std::log1p(u) / lnb;
      ++depth;
    }
    acc += lf.exponent * std::log1p(u);
  }
  return acc;
}

double log_multiplier(const FuncExpr& f, double lnx) {
  return (f.alpha == 0.0 ? 0.0 : f.alpha * lnx) + log_factors(f, lnx);
}

// x^alpha for normalized x, exact when the result is a representable dyadic.
double power_part(double alpha, const ScaledReal& n) {
  if (alpha == 0.0) return 1.0;
  const double e = alpha * static_cast<double>(n.exp2);
  if (e == std::floor(e) && std::fabs(e) < 1e9) {
    return std::ldexp(std::pow(n.mant, alpha), static_cast<int>(e));
  }
  return std::exp(alpha * n.log());
}

// Value of the multiplier at x = 0, or throws when no limit exists.
double multiplier_at_zero(const FuncExpr& f) {
  if (f.alpha > 0.0) return 0.0;
  if (f.alpha < 0.0) throw Error(ErrorKind::non_representable, "negative power is unbounded at 0");
  bool negative = false;
  for (const LogFactor& lf : f.factors) {
    if (lf.exponent > 0.0) {
      throw Error(ErrorKind::non_representable,
                  "no finite value at 0: unbounded log factor without a power part");
    }
    negative = true;
  }
  return negative ? 0.0 : 1.0;
}

double table_value(const FuncExpr& f, const ScaledReal& x) {
  const auto& v = f.table;
  if (f.layout == TableLayout::uniform) {
    const double xd = std::min(1.0, x.to_double());
    const std::size_t last = v.size() - 1;
    const double pos = std::ldexp(xd, static_cast<int>(f.table_depth));
    const auto i = std::min(static_cast<std::size_t>(pos), last);
    if (i == last) return v[last];
    const double frac = pos - static_cast<double>(i);
    return v[i] + frac * (v[i + 1] - v[i]);
  }
  const std::int64_t last = static_cast<std::int64_t>(v.size()) - 1;
  if (x.is_zero()) return v[last];
  const ScaledReal n = x.normalized();
  const std::int64_t level = 1 - n.exp2;  // x in [2^-level, 2^{1-level})
  if (level <= 0) return v[0];
  if (level > last) return v[last];
  const double t = 2.0 * n.mant - 1.0;
  return v[level] + t * (v[level - 1] - v[level]);
}

double eval_impl(const FuncExpr& f, const ScaledReal& x) {
  switch (f.kind) {
    case FuncKind::power_log: {
      if (x.is_zero()) return f.scale * multiplier_at_zero(f);
      const double p = power_part(f.alpha, x);
      if (f.factors.empty()) return f.scale * p;
      return f.scale * p * std::exp(log_factors(f, x.log()));
    }
    case FuncKind::tabulated: {
      const double base = table_value(f, x);
      if (f.alpha == 0.0 && f.factors.empty()) return f.scale * base;
      if (x.is_zero()) return base == 0.0 ? 0.0 : f.scale * base * multiplier_at_zero(f);
      if (base == 0.0) return 0.0;
      return f.scale * std::exp(std::log(base) + log_multiplier(f, x.log()));
    }
    case FuncKind::step: {
      const double xd = x.to_double();
      const bool above_lo = x.is_zero() ? false : (xd == 0.0 ? f.step_lo == 0.0 : xd > f.step_lo);
      const bool below_hi = xd <= f.step_hi;
      return above_lo && below_hi ? f.scale : 0.0;
    }
    case FuncKind::truncated:
      return f.scale * std::min(eval_impl(*f.inner, x), 1.0);
    case FuncKind::circle_fold: {
      const double xd = x.to_double();
      if (xd < 0.5) return f.scale * eval_impl(*f.inner, {x.mant * f.fold_scale, x.exp2});
      const double y = std::max(0.0, f.fold_scale * (1.0 - xd));
      return f.scale * eval_impl(*f.inner, ScaledReal::from_double(std::min(1.0, y)));
    }
  }
  return 0.0;
}

}  // namespace

double eval_scaled(const FuncExpr& f, ScaledReal x) {
  check_range(x);
  const ScaledReal n = x.normalized();
  if (n.exp2 == 1) return eval_impl(f, {0.5, 1});  // clamp 1+tiny to 1
  return eval_impl(f, n);
}

double log_eval_scaled(const FuncExpr& f, ScaledReal x) {
  check_range(x);
  const ScaledReal n = x.normalized();
  if (f.kind == FuncKind::power_log && !n.is_zero()) {
    return std::log(f.scale) + log_multiplier(f, n.exp2 == 1 ? 0.0 : n.log());
  }
  return std::log(eval_scaled(f, x));
}

double eval_func(const FuncExpr& f, double x) {
  if (!(x >= 0.0)) throw Error(ErrorKind::range_error, "argument outside [0, 1]");
  return eval_scaled(f, ScaledReal::from_double(x));
}

double eval_direct(const FuncExpr& f, double x) {
  if (f.kind != FuncKind::power_log || x == 0.0) return eval_func(f, x);
  const double lnb = std::log(f.log_base);
  double value = f.scale * std::pow(x, f.alpha);
  double t = 1.0 - std::log(x) / lnb;
  unsigned depth = 0;
  for (const LogFactor& lf : f.factors) {
    while (depth < lf.depth) {
      t = 1.0 + std::log(t) / lnb;
      ++depth;
    }
    value *= std::pow(t, lf.exponent);
  }
  return value;
}

double eval_t(unsigned m, ScaledReal x, double log_base) {
  if (x.is_zero()) return HUGE_VAL;
  const double lnb = std::log(log_base);
  double u = std::max(0.0, -x.log() / lnb);
  for (unsigned k = 0; k < m; ++k) u = std::log1p(u) / lnb;
  return 1.0 + u;
}

}  // namespace efrel

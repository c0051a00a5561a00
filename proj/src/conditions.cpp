#include "efrel/conditions.hpp"

#include "efrel/errors.hpp"
#include "efrel/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace efrel {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds_on_grid: return "holds-on-grid";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not-applicable";
  }
  return "?";
}

const char* to_string(Direction d) {
  return d == Direction::increasing ? "increasing" : "decreasing";
}

std::optional<double> ConditionReport::detail(std::string_view key) const {
  for (const auto& [k, v] : details) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void ConditionReport::set_detail(std::string key, double value) {
  for (auto& [k, v] : details) {
    if (k == key) {
      v = value;
      return;
    }
  }
  details.emplace_back(std::move(key), value);
}

std::string dyadic_grid_label(unsigned depth) {
  return "dyadic i/2^" + std::to_string(depth);
}

double f_norm(const FuncExpr& f, std::span<const double> v) {
  CompensatedSum s;
  for (double x : v) {
    if (!(std::fabs(x) <= 1.0)) throw Error(ErrorKind::range_error, "f_norm entries must lie in [-1, 1]");
    s.add(eval_func(f, std::fabs(x)));
  }
  return s.value();
}

namespace {

std::vector<double> sample_grid(const FuncExpr& f, unsigned depth) {
  const std::size_t n = std::size_t{1} << depth;
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = eval_func(f, std::ldexp(static_cast<double>(i), -static_cast<int>(depth)));
  return v;
}

}  // namespace

ConditionReport check_equivalence_conditions(const FuncExpr& f, unsigned grid_depth) {
  if (grid_depth > 14) throw Error(ErrorKind::range_error, "equivalence grid depth capped at 14");
  ConditionReport r;
  r.name = "equivalence(R1,R2)";
  r.grid = dyadic_grid_label(grid_depth) + ", pairs i+j <= 2^" + std::to_string(grid_depth);
  const std::vector<double> v = sample_grid(f, grid_depth);
  const std::size_t n = v.size() - 1;
  const double h = std::ldexp(1.0, -static_cast<int>(grid_depth));
  auto zero = [&](double x) { return is_zero_value(f, x); };

  bool failed = false;
  if (!zero(v[0])) {
    failed = true;
    r.witness = {0.0};
    r.note = "R1: f(0) != 0";
  }
  double ca = 0.0;
  double cb = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; i + j <= n; ++j) {
      const double fx = v[i], fy = v[j], fs = v[i + j];
      // R2a: f(x+y) <= C (f(x) + f(y))
      const double da = fx + fy;
      if (zero(da)) {
        if (!zero(fs) && !failed) {
          failed = true;
          r.witness = {static_cast<double>(i) * h, static_cast<double>(j) * h};
          r.note = "R2a: f(x+y) > 0 = f(x) + f(y)";
        }
      } else {
        ca = std::max(ca, fs / da);
      }
      // R2b: f(x) <= C (f(x+y) + f(y))
      const double db = fs + fy;
      if (zero(db)) {
        if (!zero(fx) && !failed) {
          failed = true;
          r.witness = {static_cast<double>(i) * h, static_cast<double>(j) * h};
          r.note = "R2b: f(x) > 0 = f(x+y) + f(y)";
        }
      } else {
        cb = std::max(cb, fx / db);
      }
    }
  }
  r.verdict = failed ? Verdict::fails : Verdict::holds_on_grid;
  r.constant = std::max(ca, cb);
  r.set_detail("C_a", ca);
  r.set_detail("C_b", cb);
  return r;
}

TransitivityWitness build_transitivity_witness(const FuncExpr& f,
                                               std::span<const std::pair<double, double>> pairs,
                                               double bound, std::size_t truncation,
                                               Clause clause) {
  TransitivityWitness w;
  w.clause = clause;
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto [xi, eta] = pairs[n];
    if (!(xi >= 0.0 && eta >= 0.0 && xi + eta <= 1.0)) {
      throw Error(ErrorKind::invalid_witness, "pair must satisfy x, y >= 0, x + y <= 1",
                  static_cast<std::int64_t>(n));
    }
    const double fx = eval_func(f, xi), fy = eval_func(f, eta), fs = eval_func(f, xi + eta);
    const double scale = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(n, 1000)));
    const double big = clause == Clause::r2a ? fs : fx;
    const double small = clause == Clause::r2a ? fx + fy : fs + fy;
    if (!(big > scale * small)) {
      throw Error(ErrorKind::invalid_witness,
                  "pair " + std::to_string(n) + " does not violate the inequality at level n",
                  static_cast<std::int64_t>(n));
    }
    const double k = std::max(1.0, std::floor(1.0 / big));
    w.block_lengths.push_back(static_cast<std::size_t>(k));
  }
  if (bound < 0.0) throw Error(ErrorKind::invalid_witness, "bound must be >= sup f");

  CompensatedSum nx, ny, ns, nd;
  for (std::size_t n = 0; n < pairs.size() && w.x.size() < truncation; ++n) {
    const auto [xi, eta] = pairs[n];
    const double fx = eval_func(f, xi), fy = eval_func(f, eta), fs = eval_func(f, xi + eta);
    const std::size_t k = w.block_lengths[n];
    const std::size_t take = std::min(k, truncation - w.x.size());
    for (std::size_t m = 0; m < take; ++m) {
      w.x.push_back(xi);
      w.y.push_back(eta);
      nx.add(fx);
      ny.add(fy);
      ns.add(fs);
      nd.add(clause == Clause::r2a ? fs : fx);
    }
    if (take == k) ++w.complete_blocks;
  }
  w.norm_x = nx.value();
  w.norm_y = ny.value();
  w.norm_sum = ns.value();
  w.divergent_sum = nd.value();
  return w;
}

ConditionReport check_essential_monotonicity(std::span<const std::pair<double, double>> values,
                                             Direction direction,
                                             std::optional<double> max_constant) {
  if (values.size() < 2) throw Error(ErrorKind::degenerate_input, "need at least 2 samples");
  ConditionReport r;
  r.name = std::string("essentially-") + to_string(direction);
  // Forbidden direction: an earlier sample above a later one (increasing) or
  // below it (decreasing). Track the running extreme of earlier samples.
  bool have = false;
  double extreme = 0.0, extreme_at = 0.0;
  double worst = 1.0;
  std::vector<double> witness;
  for (const auto& [x, v] : values) {
    if (v == 0.0 && x == 0.0) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::degenerate_input,
                  "nonpositive or non-finite value at a nonzero ordinate makes a ratio undefined");
    }
    if (have) {
      const double ratio = direction == Direction::increasing ? extreme / v : v / extreme;
      if (ratio > worst) {
        worst = ratio;
        witness = {extreme_at, x};
      }
      const bool replace = direction == Direction::increasing ? v > extreme : v < extreme;
      if (replace) {
        extreme = v;
        extreme_at = x;
      }
    } else {
      have = true;
      extreme = v;
      extreme_at = x;
    }
  }
  r.constant = worst;
  r.witness = witness;
  r.grid = std::to_string(values.size()) + " samples in ordinate order";
  if (max_constant && worst > *max_constant) {
    r.verdict = Verdict::fails;
    r.note = "constant exceeds the allowed bound";
    r.set_detail("bound", *max_constant);
  } else {
    r.verdict = Verdict::holds_on_grid;
    if (max_constant) r.set_detail("bound", *max_constant);
  }
  return r;
}

ConditionReport check_essential_monotonicity(const FuncExpr& f, unsigned grid_depth,
                                             Direction direction,
                                             std::optional<double> max_constant) {
  if (grid_depth > 26) throw Error(ErrorKind::range_error, "grid depth capped at 26");
  const std::size_t n = std::size_t{1} << grid_depth;
  std::vector<std::pair<double, double>> samples;
  samples.reserve(n + 1);
  const double v0 = [&] {
    try {
      return eval_func(f, 0.0);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }();
  if (v0 == 0.0) samples.emplace_back(0.0, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = std::ldexp(static_cast<double>(i), -static_cast<int>(grid_depth));
    samples.emplace_back(x, eval_func(f, x));
  }
  ConditionReport r = check_essential_monotonicity(samples, direction, max_constant);
  r.grid = dyadic_grid_label(grid_depth);
  return r;
}

FuncExpr monotone_envelope(const FuncExpr& f, Direction direction, unsigned grid_depth) {
  if (grid_depth > 26) throw Error(ErrorKind::range_error, "grid depth capped at 26");
  const std::size_t n = std::size_t{1} << grid_depth;
  std::vector<double> v(n + 1);
  if (direction == Direction::increasing) {
    double run = -HUGE_VAL;
    for (std::size_t i = 0; i <= n; ++i) {
      run = std::max(run, eval_func(f, std::ldexp(static_cast<double>(i), -static_cast<int>(grid_depth))));
      v[i] = run;
    }
  } else {
    double run = HUGE_VAL;
    for (std::size_t i = 1; i <= n; ++i) {
      run = std::min(run, eval_func(f, std::ldexp(static_cast<double>(i), -static_cast<int>(grid_depth))));
      v[i] = run;
    }
    v[0] = v[1];
  }
  FuncExpr e = uniform_table(grid_depth, std::move(v));
  e.log_base = f.log_base;
  return e;
}

A1A2Report check_A1_A2(const FuncExpr& phi, const FuncExpr& psi, double eps, int M, int n_max,
                       double a2_threshold) {
  if (n_max < 1) throw Error(ErrorKind::range_error, "n_max must be >= 1");
  A1A2Report out;
  const int top = 2 * n_max + 2;
  std::vector<double> p(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) {
    p[static_cast<std::size_t>(k)] = eval_at_level(phi, k);
    if (!(p[static_cast<std::size_t>(k)] > 0.0)) {
      throw Error(ErrorKind::degenerate_input, "phi must be positive on (0, 1]", k);
    }
  }

  ConditionReport& a1 = out.a1;
  a1.name = "A1";
  a1.grid = "dyadic triples M < n <= " + std::to_string(n_max) + ", j <= " + std::to_string(n_max) +
            ", i <= j+n+2";
  double critical = HUGE_VAL;
  bool failed = false;
  for (int n = M + 1; n <= n_max; ++n) {
    for (int j = 0; j <= n_max; ++j) {
      for (int i = 0; i <= j + n + 2; ++i) {
        const double lhs = p[static_cast<std::size_t>(i)];
        const double rhs = p[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(n)];
        critical = std::min(critical, lhs / rhs);
        if (!failed && lhs <= eps * rhs) {
          failed = true;
          a1.witness = {static_cast<double>(i), static_cast<double>(j), static_cast<double>(n)};
          a1.note = "phi(2^-i) <= eps phi(2^-j) phi(2^-n) with i < j+n+3";
        }
      }
    }
  }
  a1.verdict = failed ? Verdict::fails : Verdict::holds_on_grid;
  a1.constant = M + 1 > n_max ? eps : critical;
  if (M + 1 > n_max) a1.verdict = Verdict::not_applicable;
  a1.set_detail("eps", eps);
  a1.set_detail("M", M);

  ConditionReport& a2 = out.a2;
  a2.name = "A2";
  a2.grid = "n = 0.." + std::to_string(n_max);
  std::vector<double> ratio(static_cast<std::size_t>(n_max) + 1);
  for (int k = 0; k <= n_max; ++k) {
    ratio[static_cast<std::size_t>(k)] = eval_at_level(psi, k) / p[static_cast<std::size_t>(k)];
  }
  const double last = ratio.back();
  a2.constant = last;
  a2.set_detail("threshold", a2_threshold);
  a2.verdict = Verdict::holds_on_grid;
  if (!(last <= a2_threshold)) {
    a2.verdict = Verdict::fails;
    a2.witness = {static_cast<double>(n_max), last};
    a2.note = "ratio psi/phi at n_max above threshold";
  } else {
    for (int k = n_max / 2; k + 5 <= n_max; ++k) {
      if (ratio[static_cast<std::size_t>(k) + 5] > ratio[static_cast<std::size_t>(k)]) {
        a2.verdict = Verdict::fails;
        a2.witness = {static_cast<double>(k), static_cast<double>(k + 5)};
        a2.note = "ratio psi/phi rises over a 5-step window on the tail";
        break;
      }
    }
  }
  return out;
}

double stability_epsilon(std::span<const double> grid_values, unsigned grid_depth, double C,
                         double a) {
  const double cap = a / (2.0 * C);
  std::size_t k = 0;
  while (k + 1 < grid_values.size() && grid_values[k + 1] <= cap) ++k;
  if (grid_values.empty() || grid_values[0] > cap) return 0.0;
  return 0.5 * std::ldexp(static_cast<double>(k), -static_cast<int>(grid_depth));
}

int increment_bound_threshold(const FuncExpr& l, int n_max) {
  int threshold = n_max;
  for (int n = n_max - 1; n >= 0; --n) {
    if (eval_at_level(l, n + 1) - eval_at_level(l, n) <= 1.0) {
      threshold = n;
    } else {
      break;
    }
  }
  return threshold;
}

}  // namespace efrel

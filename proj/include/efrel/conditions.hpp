#pragma once

#include "efrel/func_expr.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace efrel {

enum class Verdict { holds_on_grid, fails, not_applicable };
const char* to_string(Verdict v);

struct ConditionReport {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
  double constant = 0.0;
  std::vector<double> witness;  // empty when there is none
  std::string grid;
  std::string note;
  std::vector<std::pair<std::string, double>> details;

  bool failed() const { return verdict == Verdict::fails; }
  std::optional<double> detail(std::string_view key) const;
  void set_detail(std::string key, double value);
};

double f_norm(const FuncExpr& f, std::span<const double> v);

// R1 and both quasi-triangle inequalities over grid pairs i/2^d, j/2^d with
// i + j <= 2^d. C_a and C_b land in the details.
ConditionReport check_equivalence_conditions(const FuncExpr& f, unsigned grid_depth);

enum class Clause { r2a, r2b };

struct TransitivityWitness {
  Clause clause = Clause::r2a;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::size_t> block_lengths;  // k_n, one per supplied pair
  std::size_t complete_blocks = 0;
  double norm_x = 0.0;
  double norm_y = 0.0;
  double norm_sum = 0.0;   // ‖x + y‖_f
  // Σ f(x_m + y_m) for R2a, Σ f(x_m) for R2b: the sum that should blow up.
  double divergent_sum = 0.0;
};

TransitivityWitness build_transitivity_witness(const FuncExpr& f,
                                               std::span<const std::pair<double, double>> pairs,
                                               double bound, std::size_t truncation,
                                               Clause clause = Clause::r2a);

enum class Direction { increasing, decreasing };
const char* to_string(Direction d);

// Samples (ordinate, value) in ordinate order. A zero value is allowed only
// at ordinate 0 and is skipped. `max_constant` turns the report into a
// threshold test.
ConditionReport check_essential_monotonicity(std::span<const std::pair<double, double>> values,
                                             Direction direction,
                                             std::optional<double> max_constant = std::nullopt);
ConditionReport check_essential_monotonicity(const FuncExpr& f, unsigned grid_depth,
                                             Direction direction,
                                             std::optional<double> max_constant = std::nullopt);

// Uniform table on i/2^depth: running sup (increasing) or running inf over
// y <= x (decreasing). The decreasing envelope reuses the first positive
// sample at x = 0.
FuncExpr monotone_envelope(const FuncExpr& f, Direction direction, unsigned grid_depth);

struct A1A2Report {
  ConditionReport a1;
  ConditionReport a2;
};

// A1 in its dyadic form over M < n <= n_max, j <= n_max, i <= j + n + 2;
// constant = smallest φ(2^-i)/(φ(2^-j)φ(2^-n)) over that range. A2: ratio
// ψ/φ at 2^-n ends below `a2_threshold` and shows no rise over any 5-step
// window on the tail half.
A1A2Report check_A1_A2(const FuncExpr& phi, const FuncExpr& psi, double eps, int M, int n_max,
                       double a2_threshold = 0.5);

// ε(a) = ½ sup{y on the grid : f(d) <= a/(2C) for grid d <= y}.
double stability_epsilon(std::span<const double> grid_values, unsigned grid_depth, double C,
                         double a);

// First N0 such that l(2^-(n+1)) - l(2^-n) <= 1 for every N0 <= n < n_max.
int increment_bound_threshold(const FuncExpr& l, int n_max);

std::string dyadic_grid_label(unsigned depth);

}  // namespace efrel

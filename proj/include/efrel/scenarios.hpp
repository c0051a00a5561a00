#pragma once

#include "efrel/conditions.hpp"
#include "efrel/embeddings.hpp"
#include "efrel/func_expr.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace efrel {

enum class MuSource { mumu, mumm, logos, pofin, quotient_difference, supplied };
const char* to_string(MuSource s);

struct MuProfile {
  std::vector<double> values;   // μ(n)
  std::vector<double> powered;  // μ^α(n)
  double alpha = 1.0;
  double beta = 1.0;
  int start_index = 1;  // first n given by the defining formula
  MuSource source = MuSource::supplied;

  int n_max() const { return static_cast<int>(values.size()) - 1; }
  static MuProfile supplied(std::vector<double> mu, double alpha);
};

// Tabulated φ on 1/2^n, affine in between.
struct PhiTable {
  FuncExpr func;
  const std::vector<double>& values() const { return func.table; }
};

struct SubsetSpec {
  enum class Kind { empty, all, finite, periodic };
  Kind kind = Kind::empty;
  std::set<std::int64_t> elements;  // finite: members; periodic: members below `start`
  std::int64_t period = 1;
  std::set<std::int64_t> residues;  // periodic: k >= start is in iff k mod period is listed
  std::int64_t start = 0;

  bool contains(std::int64_t k) const;
  bool subset_of(const SubsetSpec& other, std::int64_t probe_limit) const;
  std::string render() const;

  static SubsetSpec empty_set() { return {}; }
  static SubsetSpec everything();
  static SubsetSpec evens();
  static SubsetSpec odds();
  static SubsetSpec finite_set(std::set<std::int64_t> members);
  // Finite change of membership at k (used by the pofin normalization).
  SubsetSpec with_membership(std::int64_t k, bool member) const;
};

PhiTable phi_from_mu(const MuProfile& mu, double alpha, double beta, const FuncExpr& psi, int n_max);
MuProfile mu_same_exponent(const FuncExpr& phi, double alpha, int n_max);
MuProfile mu_cross_exponent(const FuncExpr& phi, double alpha, double beta, int n_max);
MuProfile mu_logos(const EtaVector& eta, const EtaVector& eta2, double alpha, int n_max,
                   double log_base = std::numbers::e);
MuProfile mu_pofin(const SubsetSpec& U, double gamma, int n_max, double alpha = 1.0,
                   double log_base = std::numbers::e);
// μ(0) = 1, μ^α(n+1) = Q(n+1) - Q(n), Q = (1+σ_V)/(1+σ_U).
MuProfile mu_quotient_difference(const MuProfile& mu_u, const MuProfile& mu_v, int n_max);

// ⌊1 + log n⌋ in the given base (n >= 1).
std::int64_t floor_one_plus_log(std::int64_t n, double log_base);

double sigma_partial(const MuProfile& mu, int n);
std::vector<double> sigma_table(const MuProfile& mu, int n_max);

// K over 0 <= i <= n <= n_max; fails when K exceeds max_K.
ConditionReport check_Z12(const FuncExpr& psi, const MuProfile& mu, int n_max,
                          std::optional<double> max_K = std::nullopt);
// 1/K (1+σ)ψ <= φ <= K (1+σ)ψ at 1/2^n.
ConditionReport check_Z113(const FuncExpr& phi, const FuncExpr& psi, const MuProfile& mu, double K,
                           int n_max);

enum class GrowthKind { G2, Gstar, Zstar, sufficient_G6, F1, UTS, Z14 };
const char* to_string(GrowthKind k);

struct GrowthInputs {
  const FuncExpr* phi = nullptr;  // G2, Z14
  const FuncExpr* psi = nullptr;  // sufficient_G6
  const MuProfile* mu = nullptr;  // Gstar, Zstar, sufficient_G6, F1, UTS
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 17.0 / 16.0;
  double eps = 0.5;
  int M = 0;
  int tail_terms = 64;         // G2
  unsigned grid_depth = 20;    // sufficient_G6 monotonicity grid
};

ConditionReport check_growth_conditions(GrowthKind kind, const GrowthInputs& in, int n_max);

// First N such that pred holds at every N <= n <= n_max (n_max + 1 if it
// fails at n_max).
template <class Pred>
int sufficiently_large_from(int n_min, int n_max, Pred&& pred) {
  int n0 = n_max + 1;
  for (int n = n_max; n >= n_min; --n) {
    if (!pred(n)) break;
    n0 = n;
  }
  return n0;
}

enum class ScenarioKind { counterintuitive, cross_exponent, gao, pofin };
const char* to_string(ScenarioKind k);

struct ScenarioParams {
  ScenarioKind kind = ScenarioKind::gao;
  double alpha = 1.0;
  double beta = 2.0;
  EtaVector eta;
  EtaVector eta2{{1.0}};
  SubsetSpec U;
  SubsetSpec V = SubsetSpec::everything();
  double gamma = 17.0 / 16.0;
  std::string gamma_text = "17/16";
  int n_max = 40;
  int level = 8;
  int a1_n_max = 40;
  double log_base = std::numbers::e;
  unsigned mono_depth = 20;
  unsigned equiv_depth = 8;
  double uts_eps = 0.5;
  int threads = 1;

  static ScenarioParams defaults(ScenarioKind kind);
};

using ParamValue = std::variant<double, std::string>;

struct SeriesRow {
  int n;
  double mu, phi, sigma;
};

struct NamedDistortion {
  std::string name;
  DistortionReport report;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<std::pair<std::string, ParamValue>> params;
  std::vector<ConditionReport> conditions;
  std::vector<NamedDistortion> embeddings;
  std::string verdict;
  double runtime_ms = 0.0;
  std::vector<SeriesRow> series;
  std::vector<PairRatio> pairs;  // from the first embedding
  std::uint64_t pair_grid = 1;

  bool all_passed() const;
};

ScenarioReport run_scenario(const ScenarioParams& params);

// Distortion result folded into a condition so its failures count.
ConditionReport distortion_condition(const std::string& name, const DistortionReport& d,
                                     double residual_tol = 1e-10);

std::string render_eta(const EtaVector& eta);

}  // namespace efrel

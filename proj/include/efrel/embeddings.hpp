#pragma once

#include "efrel/conditions.hpp"
#include "efrel/func_expr.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace efrel {

enum class KappaSource { recursion_solved, closed_form, supplied };
const char* to_string(KappaSource s);

struct KappaProfile {
  std::vector<double> values;     // κ(1/2^n), n = 0..n_max
  std::vector<double> residuals;  // |f(1/2^n) - Σ_i g(κ_i / 2^{n-i})|
  KappaSource source = KappaSource::supplied;
};

struct SolveKappaOptions {
  int precision_bits = 50;  // bisection stops at relative width 2^-bits
  int max_iterations = 200;
  unsigned monotone_grid_depth = 10;
};

KappaProfile solve_kappa(const FuncExpr& f, const FuncExpr& g, int n_max,
                         const SolveKappaOptions& options = {});

// Σ_{i<=n} g(κ_i / 2^{n-i}) recomputed from the profile.
double recursion_sum(const FuncExpr& g, std::span<const double> kappa, int n);

// max(1, L_U3, L_star); U3 tails are truncated at the profile length and
// corrected by the last ratio (both reported).
ConditionReport check_kappa_conditions(const FuncExpr& g, const KappaProfile& kappa, int n_max);

struct SparseVector {
  std::vector<std::uint64_t> index;
  std::vector<double> value;

  std::size_t nonzeros() const { return index.size(); }
  void push(std::uint64_t i, double v);  // appends; indices must increase
};

enum class EmbeddingKind { tent, repeat };

struct GridEmbedding {
  EmbeddingKind kind = EmbeddingKind::tent;
  int level = 0;               // tent: grid 2^level; repeat: grid n (level = n)
  std::uint64_t grid_size = 1; // number of grid intervals N, points i/N for i = 0..N
  std::uint64_t codomain_dim = 1;
  std::uint64_t multiplicity = 1;  // repeat: M identical coordinates per stored one
  double mu = 1.0;
  std::vector<SparseVector> points;
};

// r(l) and s(l) with l/2^n = s/2^r, s odd (0 < l <= 2^n).
std::pair<unsigned, std::uint64_t> dyadic_depth(std::uint64_t l, unsigned n);

GridEmbedding build_tent_embedding(const KappaProfile& kappa, int n);

struct RepeatEmbedding {
  double mu = 1.0;
  std::uint64_t M = 1;
  GridEmbedding embedding;
};

struct DecayProbe {
  std::vector<double> deltas{0.5, 0.25, 0.125, 0.05};
  int max_log2_exponent = 30;  // probes x = 2^{-2^m}, m = 0..this
};

// True when ln(x^δ ψ(x)) sampled at x = 2^{-2^m} ends below its first value
// and falls over the last three steps.
bool probe_decays(const FuncExpr& psi, double delta, const DecayProbe& probe);

RepeatEmbedding build_repeat_embedding(const FuncExpr& psi, double alpha, std::uint64_t n,
                                       int search_cap, const DecayProbe& probe = {});

struct DistortionOptions {
  int threads = 1;
  bool keep_pairs = false;
};

struct PairRatio {
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  double ratio = 0.0;
};

struct DistortionReport {
  double K_lower = 0.0;
  double K_upper = 0.0;
  std::pair<std::uint64_t, std::uint64_t> worst_lower{0, 0};
  std::pair<std::uint64_t, std::uint64_t> worst_upper{0, 0};
  std::uint64_t pair_count = 0;
  std::optional<double> adjacent_max_residual;  // tent embeddings only
  int level = 0;
  std::vector<PairRatio> pairs;  // filled when keep_pairs
};

// ‖ϑ(j) - ϑ(i)‖_g over sparse supports, times the embedding multiplicity.
double embedded_distance(const FuncExpr& g, const GridEmbedding& e, std::uint64_t i,
                         std::uint64_t j);

DistortionReport verify_distortion(const FuncExpr& f, const FuncExpr& g, const GridEmbedding& e,
                                   const DistortionOptions& options = {});

int grid_resolution(const FuncExpr& f, int k, std::uint64_t cap);

struct WrapTable {
  long k_min = 0;
  long k_max = 0;
  std::vector<std::vector<double>> rho;  // rho[k - k_min][position]
};

double rho(long k, double x);
WrapTable wrap_reduction(std::span<const double> x, long k_min, long k_max);
// Σ_k |ρ_k(y) - ρ_k(x)|^p over all k where they differ.
double wrap_distance(double x, double y, double p);

struct CircleTransfer {
  FuncExpr folded;
  std::optional<double> x_star;
  std::string point_map;
};

CircleTransfer circle_transfer(const FuncExpr& f, unsigned zero_search_depth);
// ⟨x⟩ = x/x* - ⌊x/x*⌋
double circle_point(double x, double x_star);
// f̃ applied to the mod-1 distance min(d, 1-d).
double circle_distance(const FuncExpr& folded, double a, double b);

std::string render_embedding(const GridEmbedding& e);

}  // namespace efrel

#include "efrel/embeddings.hpp"

#include "efrel/errors.hpp"
#include "efrel/parallel.hpp"
#include "efrel/summation.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace efrel {

const char* to_string(KappaSource s) {
  switch (s) {
    case KappaSource::recursion_solved: return "recursion-solved";
    case KappaSource::closed_form: return "closed-form";
    case KappaSource::supplied: return "supplied";
  }
  return "?";
}

namespace {

// g(v / 2^shift)
double g_shifted(const FuncExpr& g, double v, std::int64_t shift) {
  if (v == 0.0) return eval_func(g, 0.0);
  return eval_scaled(g, ScaledReal{v, -shift});
}

void require_monotone(const FuncExpr& g, unsigned depth) {
  const std::size_t n = std::size_t{1} << depth;
  double prev = eval_func(g, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = std::ldexp(static_cast<double>(i), -static_cast<int>(depth));
    const double mid = eval_func(g, x - std::ldexp(0.5, -static_cast<int>(depth)));
    const double v = eval_func(g, x);
    if (!(prev < mid && mid < v)) {
      throw Error(ErrorKind::not_invertible,
                  "g is not strictly increasing near x = " + std::to_string(x));
    }
    prev = v;
  }
}

}  // namespace

double recursion_sum(const FuncExpr& g, std::span<const double> kappa, int n) {
  CompensatedSum s;
  for (int i = 0; i <= n; ++i) s.add(g_shifted(g, kappa[static_cast<std::size_t>(i)], n - i));
  return s.value();
}

KappaProfile solve_kappa(const FuncExpr& f, const FuncExpr& g, int n_max,
                         const SolveKappaOptions& options) {
  if (n_max < 0) throw Error(ErrorKind::range_error, "n_max must be >= 0");
  if (eval_func(g, 0.0) != 0.0) throw Error(ErrorKind::not_invertible, "g(0) must be 0");
  require_monotone(g, options.monotone_grid_depth);
  const double g1 = eval_func(g, 1.0);
  const double rel = std::ldexp(1.0, -options.precision_bits);

  KappaProfile out;
  out.source = KappaSource::recursion_solved;
  for (int n = 0; n <= n_max; ++n) {
    const double fn = eval_at_level(f, n);
    CompensatedSum partial;
    for (int i = 0; i < n; ++i) partial.add(g_shifted(g, out.values[static_cast<std::size_t>(i)], n - i));
    const double s = partial.value();
    const double rhs = fn - s;
    const double slack = 1e-13 * std::max({fn, s, std::numeric_limits<double>::min()});
    if (rhs < -slack) {
      throw Error(ErrorKind::infeasible,
                  "recursion right-hand side negative at level " + std::to_string(n), n);
    }
    if (rhs > g1 * (1.0 + 1e-15)) {
      throw Error(ErrorKind::infeasible,
                  "recursion right-hand side exceeds g(1) at level " + std::to_string(n), n);
    }
    double kappa = 0.0;
    if (rhs > 0.0) {
      if (rhs >= g1) {
        kappa = 1.0;
      } else {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < options.max_iterations; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid == lo || mid == hi) break;
          if (eval_func(g, mid) < rhs) {
            lo = mid;
          } else {
            hi = mid;
          }
          if (hi - lo <= rel * hi) break;
        }
        const double flo = rhs - eval_func(g, lo);
        const double fhi = eval_func(g, hi) - rhs;
        kappa = flo <= fhi ? lo : hi;
      }
    }
    out.values.push_back(kappa);
    out.residuals.push_back(std::fabs(fn - recursion_sum(g, out.values, n)));
  }
  return out;
}

ConditionReport check_kappa_conditions(const FuncExpr& g, const KappaProfile& kappa, int n_max) {
  const auto& k = kappa.values;
  if (k.empty()) throw Error(ErrorKind::degenerate_input, "empty kappa profile");
  const int N = static_cast<int>(k.size()) - 1;
  if (n_max > N) n_max = N;
  ConditionReport r;
  r.name = "U3+star";
  r.grid = "levels 0.." + std::to_string(n_max) + ", tails truncated at " + std::to_string(N);

  std::vector<double> G(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) G[i] = eval_func(g, k[i]);
  double q = std::numeric_limits<double>::quiet_NaN();
  double correction = 0.0;
  if (N >= 1 && G[static_cast<std::size_t>(N)] > 0.0 && G[static_cast<std::size_t>(N) - 1] > 0.0) {
    q = G[static_cast<std::size_t>(N)] / G[static_cast<std::size_t>(N) - 1];
    correction = q < 1.0 ? G[static_cast<std::size_t>(N)] * q / (1.0 - q) : HUGE_VAL;
  } else if (N >= 1 && G[static_cast<std::size_t>(N)] == 0.0) {
    q = 0.0;
  }
  std::vector<double> tail(k.size() + 1, 0.0);
  {
    CompensatedSum s;
    for (int i = N; i >= 0; --i) {
      s.add(G[static_cast<std::size_t>(i)]);
      tail[static_cast<std::size_t>(i)] = s.value();
    }
  }
  double l_u3 = 1.0, l_u3_truncated = 1.0, l_star = 1.0;
  std::vector<double> w_u3, w_star;
  for (int n = 0; n <= n_max; ++n) {
    const double rhs = recursion_sum(g, k, n);
    const double lhs_t = tail[static_cast<std::size_t>(n)];
    const double lhs = lhs_t + correction;
    if (rhs <= 0.0) {
      if (lhs > 0.0) {
        l_u3 = HUGE_VAL;
        w_u3 = {static_cast<double>(n)};
      }
      continue;
    }
    l_u3_truncated = std::max(l_u3_truncated, lhs_t / rhs);
    if (lhs / rhs > l_u3) {
      l_u3 = lhs / rhs;
      w_u3 = {static_cast<double>(n)};
    }
  }
  for (int n = 1; n <= n_max; ++n) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) best = std::max(best, std::ldexp(k[static_cast<std::size_t>(i)], -(n - i)));
    const double kn = k[static_cast<std::size_t>(n)];
    if (kn == 0.0) continue;
    const double ratio = best > 0.0 ? kn / best : HUGE_VAL;
    if (ratio > l_star) {
      l_star = ratio;
      w_star = {static_cast<double>(n)};
    }
  }
  r.constant = std::max({1.0, l_u3, l_star});
  r.verdict = std::isfinite(r.constant) ? Verdict::holds_on_grid : Verdict::fails;
  if (r.verdict == Verdict::fails) {
    r.witness = std::isfinite(l_u3) ? w_star : w_u3;
    r.note = std::isfinite(l_u3) ? "star: kappa positive after zero maxima"
                                 : "U3: tail positive where the recursion sum vanishes";
  } else {
    r.witness = l_u3 >= l_star ? w_u3 : w_star;
  }
  r.set_detail("L_U3", l_u3);
  r.set_detail("L_U3_truncated", l_u3_truncated);
  r.set_detail("L_star", l_star);
  r.set_detail("truncation_index", N);
  r.set_detail("last_ratio", q);
  r.set_detail("tail_correction", correction);
  return r;
}

void SparseVector::push(std::uint64_t i, double v) {
  if (!index.empty() && i <= index.back()) {
    throw Error(ErrorKind::precondition_violated, "sparse indices must increase");
  }
  if (v == 0.0) return;
  index.push_back(i);
  value.push_back(v);
}

std::pair<unsigned, std::uint64_t> dyadic_depth(std::uint64_t l, unsigned n) {
  if (l == 0) throw Error(ErrorKind::range_error, "dyadic depth needs l > 0");
  const unsigned tz = static_cast<unsigned>(__builtin_ctzll(l));
  const unsigned shift = std::min(tz, n);
  return {n - shift, l >> shift};
}

GridEmbedding build_tent_embedding(const KappaProfile& kappa, int n) {
  if (n < 0 || n > 20) throw Error(ErrorKind::range_error, "tent level must be in [0, 20]");
  if (kappa.values.size() < static_cast<std::size_t>(n) + 1) {
    throw Error(ErrorKind::precondition_violated, "kappa profile shorter than the tent level");
  }
  GridEmbedding e;
  e.kind = EmbeddingKind::tent;
  e.level = n;
  const std::uint64_t N = std::uint64_t{1} << n;
  e.grid_size = N;
  e.codomain_dim = N;
  e.points.resize(N + 1);
  std::vector<std::pair<std::uint64_t, double>> coords;
  for (std::uint64_t i = 0; i <= N; ++i) {
    coords.clear();
    for (int k = 0; k <= n; ++k) {
      const double amp = kappa.values[static_cast<std::size_t>(k)];
      if (amp == 0.0) continue;
      const std::uint64_t h = N >> k;  // tent half-width, in grid steps
      std::uint64_t l = 0;
      if (k == 0) {
        l = N;
      } else {
        const std::uint64_t q = i / h, rem = i % h;
        if (rem == 0) {
          if (q % 2 == 0) continue;  // both neighbours sit a full half-width away
          l = i;
        } else {
          l = (q % 2 == 1) ? q * h : (q + 1) * h;
        }
      }
      const std::uint64_t dist = l > i ? l - i : i - l;
      if (dist >= h) continue;
      const double v = (1.0 - static_cast<double>(dist) / static_cast<double>(h)) * amp;
      coords.emplace_back(l, v);
    }
    std::sort(coords.begin(), coords.end());
    for (const auto& [l, v] : coords) e.points[i].push(l, v);
  }
  return e;
}

bool probe_decays(const FuncExpr& psi, double delta, const DecayProbe& probe) {
  std::vector<double> seq;
  for (int m = 0; m <= probe.max_log2_exponent; ++m) {
    const std::int64_t k = std::int64_t{1} << m;
    const ScaledReal x = ScaledReal::inverse_power(k);
    seq.push_back(-delta * static_cast<double>(k) * std::numbers::ln2 + log_eval_scaled(psi, x));
  }
  const std::size_t L = seq.size();
  if (L < 4) return seq.back() < seq.front();
  return seq[L - 1] < seq[0] && seq[L - 1] < seq[L - 2] && seq[L - 2] < seq[L - 3] &&
         seq[L - 3] < seq[L - 4];
}

RepeatEmbedding build_repeat_embedding(const FuncExpr& psi, double alpha, std::uint64_t n,
                                       int search_cap, const DecayProbe& probe) {
  if (n == 0) throw Error(ErrorKind::range_error, "grid size must be positive");
  for (double d : probe.deltas) {
    if (!probe_decays(psi, d, probe)) {
      throw Error(ErrorKind::precondition_violated,
                  "x^delta psi(x) does not decay on the probe grid for delta = " + std::to_string(d));
    }
  }
  RepeatEmbedding out;
  bool found = false;
  for (int k = 0; k <= search_cap; ++k) {
    const ScaledReal mu{1.0, -k};
    const ScaledReal small = ScaledReal{1.0 / static_cast<double>(n), -k};
    if (eval_scaled(psi, small) <= 2.0 * eval_scaled(psi, mu)) {
      out.mu = std::ldexp(1.0, -k);
      found = true;
      break;
    }
  }
  if (!found) throw Error(ErrorKind::search_exhausted, "no mu = 2^-k with psi(mu/n) <= 2 psi(mu)");
  const double p = std::pow(out.mu, alpha) * eval_func(psi, out.mu);
  if (!(p > 0.0)) throw Error(ErrorKind::degenerate_input, "mu^alpha psi(mu) must be positive");
  double m = std::ceil(0.5 / p);
  while (m > 1.0 && (m - 1.0) * p >= 0.5) m -= 1.0;
  while (m * p < 0.5) m += 1.0;
  out.M = static_cast<std::uint64_t>(m);

  GridEmbedding& e = out.embedding;
  e.kind = EmbeddingKind::repeat;
  e.level = static_cast<int>(std::min<std::uint64_t>(n, std::numeric_limits<int>::max()));
  e.grid_size = n;
  e.codomain_dim = out.M;
  e.multiplicity = out.M;
  e.mu = out.mu;
  e.points.resize(n + 1);
  for (std::uint64_t i = 0; i <= n; ++i) {
    e.points[i].push(0, static_cast<double>(i) * out.mu / static_cast<double>(n));
  }
  return out;
}

double embedded_distance(const FuncExpr& g, const GridEmbedding& e, std::uint64_t i,
                         std::uint64_t j) {
  const SparseVector& a = e.points[i];
  const SparseVector& b = e.points[j];
  CompensatedSum s;
  std::size_t p = 0, q = 0;
  while (p < a.index.size() || q < b.index.size()) {
    double d;
    if (q == b.index.size() || (p < a.index.size() && a.index[p] < b.index[q])) {
      d = a.value[p++];
    } else if (p == a.index.size() || b.index[q] < a.index[p]) {
      d = b.value[q++];
    } else {
      d = a.value[p++] - b.value[q++];
    }
    d = std::fabs(d);
    if (d != 0.0) s.add(eval_func(g, d));
  }
  return s.value() * static_cast<double>(e.multiplicity);
}

namespace {

struct Extreme {
  double ratio;
  std::uint64_t i, j;
  bool lower_than(const Extreme& o) const {
    if (ratio != o.ratio) return ratio < o.ratio;
    return std::pair(i, j) < std::pair(o.i, o.j);
  }
  bool upper_than(const Extreme& o) const {
    if (ratio != o.ratio) return ratio > o.ratio;
    return std::pair(i, j) < std::pair(o.i, o.j);
  }
};

}  // namespace

DistortionReport verify_distortion(const FuncExpr& f, const FuncExpr& g, const GridEmbedding& e,
                                   const DistortionOptions& options) {
  const std::uint64_t N = e.grid_size;
  if (e.points.size() != N + 1) throw Error(ErrorKind::precondition_violated, "embedding size mismatch");
  const int level = e.kind == EmbeddingKind::tent ? e.level : static_cast<int>(std::bit_width(N) - 1);
  if (level > 14) throw Error(ErrorKind::cap_exceeded, "distortion enumeration capped at level 14");
  std::vector<double> fd(N + 1, 0.0);
  for (std::uint64_t d = 1; d <= N; ++d) {
    fd[d] = eval_func(f, static_cast<double>(d) / static_cast<double>(N));
    if (is_zero_value(f, fd[d])) {
      throw Error(ErrorKind::zero_denominator,
                  "f vanishes at grid distance " + std::to_string(d) + "/" + std::to_string(N),
                  static_cast<std::int64_t>(d));
    }
  }
  DistortionReport rep;
  rep.level = e.level;
  rep.pair_count = N * (N + 1) / 2;
  if (options.keep_pairs) rep.pairs.resize(rep.pair_count);

  const int workers = std::max(1, options.threads);
  const Extreme none_lo{HUGE_VAL, 0, 0}, none_hi{-HUGE_VAL, 0, 0};
  std::vector<Extreme> lo(static_cast<std::size_t>(workers), none_lo);
  std::vector<Extreme> hi(static_cast<std::size_t>(workers), none_hi);
  parallel_rows(N, workers, [&](int w, std::uint64_t i) {
    Extreme& l = lo[static_cast<std::size_t>(w)];
    Extreme& h = hi[static_cast<std::size_t>(w)];
    const std::uint64_t offset = i * N - i * (i - 1) / 2;
    for (std::uint64_t j = i + 1; j <= N; ++j) {
      const double ratio = embedded_distance(g, e, i, j) / fd[j - i];
      const Extreme x{ratio, i, j};
      if (x.lower_than(l)) l = x;
      if (x.upper_than(h)) h = x;
      if (options.keep_pairs) rep.pairs[offset + (j - i - 1)] = {i, j, ratio};
    }
  });
  Extreme blo = none_lo, bhi = none_hi;
  for (const auto& x : lo) {
    if (x.lower_than(blo)) blo = x;
  }
  for (const auto& x : hi) {
    if (x.upper_than(bhi)) bhi = x;
  }
  rep.K_lower = blo.ratio;
  rep.K_upper = bhi.ratio;
  rep.worst_lower = {blo.i, blo.j};
  rep.worst_upper = {bhi.i, bhi.j};

  if (e.kind == EmbeddingKind::tent) {
    double worst = 0.0;
    for (int m = 0; m <= e.level; ++m) {
      const std::uint64_t stride = N >> m;
      const double target = eval_at_level(f, m);
      for (std::uint64_t k = 0; k < (std::uint64_t{1} << m); ++k) {
        const double d = embedded_distance(g, e, k * stride, (k + 1) * stride);
        worst = std::max(worst, std::fabs(d - target));
      }
    }
    rep.adjacent_max_residual = worst;
  }
  return rep;
}

int grid_resolution(const FuncExpr& f, int k, std::uint64_t cap) {
  const double target = std::ldexp(1.0, -k);
  for (std::uint64_t n = 1; n <= cap; n *= 2) {
    double dev = 0.0;
    double left = eval_func(f, 0.0);
    for (std::uint64_t i = 0; i < n && dev <= target; ++i) {
      const double mid = eval_func(f, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
      const double right = eval_func(f, static_cast<double>(i + 1) / static_cast<double>(n));
      dev = std::max({dev, std::fabs(mid - left), std::fabs(right - left)});
      left = right;
    }
    if (dev <= target) return static_cast<int>(n);
    if (n > cap / 2) break;
  }
  throw Error(ErrorKind::cap_exceeded, "no probed grid up to the cap reaches deviation 2^-k");
}

double rho(long k, double x) {
  const double fl = std::floor(x);
  const long fk = static_cast<long>(fl);
  if (k < fk) return 1.0;
  if (k > fk) return 0.0;
  return x - fl;
}

WrapTable wrap_reduction(std::span<const double> x, long k_min, long k_max) {
  WrapTable t;
  t.k_min = k_min;
  t.k_max = k_max;
  if (x.empty()) return t;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (k_min > static_cast<long>(std::floor(*mn)) - 1 || k_max < static_cast<long>(std::floor(*mx)) + 1) {
    throw Error(ErrorKind::window_too_small, "window must cover [min floor - 1, max floor + 1]");
  }
  for (long k = k_min; k <= k_max; ++k) {
    std::vector<double> row;
    row.reserve(x.size());
    for (double v : x) row.push_back(rho(k, v));
    t.rho.push_back(std::move(row));
  }
  return t;
}

double wrap_distance(double x, double y, double p) {
  const long lo = static_cast<long>(std::floor(std::min(x, y)));
  const long hi = static_cast<long>(std::floor(std::max(x, y)));
  CompensatedSum s;
  for (long k = lo; k <= hi; ++k) {
    const double d = std::fabs(rho(k, y) - rho(k, x));
    if (d != 0.0) s.add(p == 1.0 ? d : std::pow(d, p));
  }
  return s.value();
}

CircleTransfer circle_transfer(const FuncExpr& f, unsigned zero_search_depth) {
  if (zero_search_depth > 26) throw Error(ErrorKind::range_error, "zero search depth capped at 26");
  const std::uint64_t n = std::uint64_t{1} << zero_search_depth;
  auto at = [&](std::uint64_t i) {
    return eval_func(f, std::ldexp(static_cast<double>(i), -static_cast<int>(zero_search_depth)));
  };
  std::uint64_t first_zero = 0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    if (is_zero_value(f, at(i))) {
      first_zero = i;
      break;
    }
  }
  CircleTransfer out;
  if (first_zero == 0) {
    out.folded = circle_fold(f, 2.0);
    out.point_map = "<x> = x/2";
    return out;
  }
  if (first_zero == 1) {
    throw Error(ErrorKind::zero_set_ambiguous,
                "f vanishes at the first probed point; the zero set cannot be bracketed");
  }
  // Bracket [lo, hi] with f(lo) > 0 and f(hi) = 0.
  double lo = std::ldexp(static_cast<double>(first_zero - 1), -static_cast<int>(zero_search_depth));
  double hi = std::ldexp(static_cast<double>(first_zero), -static_cast<int>(zero_search_depth));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (is_zero_value(f, eval_func(f, mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (!is_zero_value(f, eval_func(f, hi)) || is_zero_value(f, eval_func(f, lo))) {
    throw Error(ErrorKind::zero_set_ambiguous, "zero set of f is not bracketable");
  }
  out.x_star = hi;
  out.folded = circle_fold(f, hi);
  char buf[96];
  std::snprintf(buf, sizeof buf, "<x> = x/x* - floor(x/x*), x* = %.17g", hi);
  out.point_map = buf;
  return out;
}

double circle_point(double x, double x_star) {
  const double q = x / x_star;
  return q - std::floor(q);
}

double circle_distance(const FuncExpr& folded, double a, double b) {
  double d = std::fabs(b - a);
  d -= std::floor(d);
  return eval_func(folded, std::min(d, 1.0 - d));
}

std::string render_embedding(const GridEmbedding& e) {
  std::string out;
  char buf[128];
  if (e.kind == EmbeddingKind::tent) {
    std::snprintf(buf, sizeof buf, "tent n=%d\n", e.level);
  } else {
    std::snprintf(buf, sizeof buf, "repeat n=%" PRIu64 " M=%" PRIu64 " mu=%.17g\n", e.grid_size,
                  e.multiplicity, e.mu);
  }
  out += buf;
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu:", i);
    out += buf;
    const SparseVector& v = e.points[i];
    for (std::size_t k = 0; k < v.index.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %" PRIu64 "=%.17g", v.index[k], v.value[k]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace efrel

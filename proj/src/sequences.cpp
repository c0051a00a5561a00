#include "efrel/errors.hpp"
#include "efrel/scenarios.hpp"
#include "efrel/summation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace efrel {

const char* to_string(MuSource s) {
  switch (s) {
    case MuSource::mumu: return "Mumu";
    case MuSource::mumm: return "MUMM";
    case MuSource::logos: return "logos";
    case MuSource::pofin: return "pofin";
    case MuSource::quotient_difference: return "quotient-difference";
    case MuSource::supplied: return "supplied";
  }
  return "?";
}

const char* to_string(GrowthKind k) {
  switch (k) {
    case GrowthKind::G2: return "G2";
    case GrowthKind::Gstar: return "Gstar";
    case GrowthKind::Zstar: return "Zstar";
    case GrowthKind::sufficient_G6: return "2eset";
    case GrowthKind::F1: return "F1";
    case GrowthKind::UTS: return "UTS";
    case GrowthKind::Z14: return "Z14";
  }
  return "?";
}

MuProfile MuProfile::supplied(std::vector<double> mu, double alpha) {
  MuProfile p;
  p.alpha = alpha;
  p.beta = alpha;
  p.source = MuSource::supplied;
  for (double v : mu) {
    if (!(v >= 0.0)) throw Error(ErrorKind::range_error, "mu values must be >= 0");
    p.powered.push_back(std::pow(v, alpha));
  }
  p.values = std::move(mu);
  return p;
}

// ---- subsets -------------------------------------------------------------

bool SubsetSpec::contains(std::int64_t k) const {
  if (k < 0) return false;
  switch (kind) {
    case Kind::empty: return false;
    case Kind::all: return true;
    case Kind::finite: return elements.count(k) > 0;
    case Kind::periodic:
      if (k < start) return elements.count(k) > 0;
      return residues.count(k % period) > 0;
  }
  return false;
}

bool SubsetSpec::subset_of(const SubsetSpec& other, std::int64_t probe_limit) const {
  std::int64_t limit = probe_limit;
  if (kind == Kind::periodic) limit = std::max(limit, start + period);
  if (other.kind == Kind::periodic) limit = std::max(limit, other.start + other.period);
  if (kind == Kind::finite && !elements.empty()) limit = std::max(limit, *elements.rbegin() + 1);
  // Beyond both starts membership is periodic with period lcm, so one full
  // lcm window past the larger start decides inclusion.
  const std::int64_t p1 = kind == Kind::periodic ? period : 1;
  const std::int64_t p2 = other.kind == Kind::periodic ? other.period : 1;
  limit = std::max(limit, std::max(start, other.start) + std::lcm(p1, p2));
  for (std::int64_t k = 0; k <= limit; ++k) {
    if (contains(k) && !other.contains(k)) return false;
  }
  return true;
}

std::string SubsetSpec::render() const {
  switch (kind) {
    case Kind::empty: return "empty";
    case Kind::all: return "all";
    case Kind::finite: {
      std::string s = "finite:";
      bool first = true;
      for (auto e : elements) {
        if (!first) s += ',';
        s += std::to_string(e);
        first = false;
      }
      return s;
    }
    case Kind::periodic: {
      if (start == 0 && period == 2 && residues == std::set<std::int64_t>{0}) return "evens";
      if (start == 0 && period == 2 && residues == std::set<std::int64_t>{1}) return "odds";
      std::string s = "periodic:" + std::to_string(period) + ":";
      bool first = true;
      for (auto r : residues) {
        if (!first) s += ',';
        s += std::to_string(r);
        first = false;
      }
      if (start > 0) {
        s += ":" + std::to_string(start) + ":";
        first = true;
        for (auto e : elements) {
          if (!first) s += ',';
          s += std::to_string(e);
          first = false;
        }
      }
      return s;
    }
  }
  return "?";
}

SubsetSpec SubsetSpec::everything() {
  SubsetSpec s;
  s.kind = Kind::all;
  return s;
}

SubsetSpec SubsetSpec::evens() {
  SubsetSpec s;
  s.kind = Kind::periodic;
  s.period = 2;
  s.residues = {0};
  return s;
}

SubsetSpec SubsetSpec::odds() {
  SubsetSpec s = evens();
  s.residues = {1};
  return s;
}

SubsetSpec SubsetSpec::finite_set(std::set<std::int64_t> members) {
  SubsetSpec s;
  s.kind = members.empty() ? Kind::empty : Kind::finite;
  s.elements = std::move(members);
  return s;
}

SubsetSpec SubsetSpec::with_membership(std::int64_t k, bool member) const {
  if (contains(k) == member) return *this;
  if (kind == Kind::empty || kind == Kind::finite) {
    std::set<std::int64_t> m = elements;
    if (member) {
      m.insert(k);
    } else {
      m.erase(k);
    }
    return finite_set(std::move(m));
  }
  // all / periodic: express as periodic with an explicit prefix.
  SubsetSpec s;
  s.kind = Kind::periodic;
  if (kind == Kind::all) {
    s.period = 1;
    s.residues = {0};
  } else {
    s = *this;
  }
  const std::int64_t new_start = std::max(s.start, k + 1);
  std::set<std::int64_t> prefix;
  for (std::int64_t i = 0; i < new_start; ++i) {
    if (contains(i)) prefix.insert(i);
  }
  // keep the periodic phase: start must be a multiple of the period
  std::int64_t aligned = ((new_start + s.period - 1) / s.period) * s.period;
  for (std::int64_t i = new_start; i < aligned; ++i) {
    if (contains(i)) prefix.insert(i);
  }
  if (member) {
    prefix.insert(k);
  } else {
    prefix.erase(k);
  }
  s.start = aligned;
  s.elements = std::move(prefix);
  return s;
}

// ---- μ constructors ------------------------------------------------------

std::int64_t floor_one_plus_log(std::int64_t n, double log_base) {
  if (n < 1) throw Error(ErrorKind::range_error, "floor(1 + log n) needs n >= 1");
  if (log_base == 2.0) return static_cast<std::int64_t>(std::bit_width(static_cast<std::uint64_t>(n)));
  const double lb = std::log(log_base);
  auto k = static_cast<std::int64_t>(std::floor(1.0 + std::log(static_cast<double>(n)) / lb));
  // guard the floor against rounding at exact powers of the base
  while (k > 1 && std::pow(log_base, static_cast<double>(k - 1)) > static_cast<double>(n)) --k;
  while (std::pow(log_base, static_cast<double>(k)) <= static_cast<double>(n)) ++k;
  return k;
}

PhiTable phi_from_mu(const MuProfile& mu, double alpha, double beta, const FuncExpr& psi, int n_max) {
  if (n_max > mu.n_max()) throw Error(ErrorKind::precondition_violated, "mu profile shorter than n_max");
  if (!(beta >= alpha && alpha > 0.0)) throw Error(ErrorKind::range_error, "need beta >= alpha > 0");
  const double ratio = 1.0 - alpha / beta;
  std::vector<double> mub(static_cast<std::size_t>(n_max) + 1);
  std::vector<double> mant(mub.size());
  std::vector<std::int64_t> shift(mub.size());
  for (int i = 0; i <= n_max; ++i) {
    const auto k = static_cast<std::size_t>(i);
    mub[k] = beta == mu.alpha ? mu.powered[k] : std::pow(mu.values[k], beta);
    const double e = ratio * i;
    const double fl = std::floor(e);
    mant[k] = mu.values[k] * std::exp2(e - fl);
    shift[k] = static_cast<std::int64_t>(fl);
  }
  std::vector<double> phi(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    CompensatedSum s;
    for (int i = 0; i <= n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (mub[k] == 0.0) continue;
      const double weight = alpha == beta ? 1.0 : std::exp2((alpha - beta) * (n - i));
      s.add(weight * mub[k] * eval_scaled(psi, ScaledReal{mant[k], shift[k] - n}));
    }
    phi[static_cast<std::size_t>(n)] = s.value();
  }
  PhiTable t{geometric_table(std::move(phi))};
  t.func.log_base = psi.log_base;
  return t;
}

namespace {

MuProfile increments(const FuncExpr& phi, double alpha, double beta, int n_max, MuSource src) {
  MuProfile p;
  p.alpha = alpha;
  p.beta = beta;
  p.source = src;
  p.values.push_back(1.0);
  p.powered.push_back(1.0);
  const double damp = std::exp2(alpha - beta);
  double prev = eval_at_level(phi, 0);
  for (int n = 1; n <= n_max; ++n) {
    const double cur = eval_at_level(phi, n);
    double d = cur - prev * damp;
    if (d < 0.0) {
      if (d < -1e-13 * std::max(std::fabs(cur), std::fabs(prev))) {
        throw Error(ErrorKind::negative_increment,
                    "negative increment at level " + std::to_string(n), n);
      }
      d = 0.0;
    }
    const double m = std::pow(d, 1.0 / beta);
    p.values.push_back(m);
    p.powered.push_back(beta == alpha ? d : std::pow(m, alpha));
    prev = cur;
  }
  return p;
}

}  // namespace

MuProfile mu_same_exponent(const FuncExpr& phi, double alpha, int n_max) {
  return increments(phi, alpha, alpha, n_max, MuSource::mumu);
}

MuProfile mu_cross_exponent(const FuncExpr& phi, double alpha, double beta, int n_max) {
  if (!(beta >= alpha)) throw Error(ErrorKind::range_error, "cross-exponent form needs beta >= alpha");
  return increments(phi, alpha, beta, n_max, beta == alpha ? MuSource::mumu : MuSource::mumm);
}

MuProfile mu_logos(const EtaVector& eta, const EtaVector& eta2, double alpha, int n_max,
                   double log_base) {
  if (lex_compare(eta, eta2) != Ordering::less) {
    throw Error(ErrorKind::order_violation, "logos profile needs eta <_lex eta'");
  }
  const FuncExpr l1 = leta(eta, log_base);
  const FuncExpr l2 = leta(eta2, log_base);
  std::vector<double> R(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    const ScaledReal x = ScaledReal::inverse_power(n);
    R[static_cast<std::size_t>(n)] = std::exp(log_eval_scaled(l2, x) - log_eval_scaled(l1, x));
  }
  const int n0 = sufficiently_large_from(1, n_max, [&](int n) {
    return R[static_cast<std::size_t>(n)] > R[static_cast<std::size_t>(n) - 1];
  });
  MuProfile p;
  p.alpha = alpha;
  p.beta = alpha;
  p.source = MuSource::logos;
  p.start_index = n0;
  p.values.push_back(1.0);
  p.powered.push_back(1.0);
  for (int n = 1; n <= n_max; ++n) {
    const double pw = n < n0 ? 1.0 : R[static_cast<std::size_t>(n)] - R[static_cast<std::size_t>(n) - 1];
    p.powered.push_back(pw);
    p.values.push_back(std::pow(pw, 1.0 / alpha));
  }
  return p;
}

MuProfile mu_pofin(const SubsetSpec& U, double gamma, int n_max, double alpha, double log_base) {
  if (!(gamma > 1.0)) throw Error(ErrorKind::range_error, "gamma must be > 1");
  MuProfile p;
  p.alpha = alpha;
  p.beta = alpha;
  p.source = MuSource::pofin;
  p.values.push_back(1.0);
  p.powered.push_back(1.0);
  std::int64_t counted_below = 0;  // members of U in {0, ..., covered - 1}
  std::int64_t covered = 0;
  for (int n = 1; n <= n_max; ++n) {
    const std::int64_t m = floor_one_plus_log(n, log_base);
    while (covered < m) {
      if (U.contains(covered)) ++counted_below;
      ++covered;
    }
    const double pw = std::pow(gamma, static_cast<double>(counted_below));
    p.powered.push_back(pw);
    p.values.push_back(alpha == 1.0 ? pw : std::pow(pw, 1.0 / alpha));
  }
  return p;
}

std::vector<double> sigma_table(const MuProfile& mu, int n_max) {
  if (n_max > mu.n_max()) throw Error(ErrorKind::precondition_violated, "sigma beyond profile length");
  std::vector<double> s(static_cast<std::size_t>(n_max) + 1, 0.0);
  CompensatedSum acc;
  for (int i = 1; i <= n_max; ++i) {
    acc.add(mu.powered[static_cast<std::size_t>(i)]);
    s[static_cast<std::size_t>(i)] = acc.value();
  }
  return s;
}

double sigma_partial(const MuProfile& mu, int n) { return sigma_table(mu, n).back(); }

MuProfile mu_quotient_difference(const MuProfile& mu_u, const MuProfile& mu_v, int n_max) {
  const std::vector<double> su = sigma_table(mu_u, n_max);
  const std::vector<double> sv = sigma_table(mu_v, n_max);
  MuProfile p;
  p.alpha = mu_u.alpha;
  p.beta = mu_u.alpha;
  p.source = MuSource::quotient_difference;
  p.values.push_back(1.0);
  p.powered.push_back(1.0);
  for (int n = 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    // Q(n) - Q(n-1) = (a B - A b) / ((B + b) B), with A, B the previous
    // 1 + σ values and a, b the new increments.
    const double A = 1.0 + sv[k - 1], B = 1.0 + su[k - 1];
    const double a = mu_v.powered[k], b = mu_u.powered[k];
    const double p1 = a * B, e1 = std::fma(a, B, -p1);
    const double p2 = A * b, e2 = std::fma(A, b, -p2);
    const double num = (p1 - p2) + (e1 - e2);
    const double pw = num / ((1.0 + su[k]) * B);
    if (pw < 0.0) {
      throw Error(ErrorKind::negative_increment,
                  "quotient difference negative at level " + std::to_string(n), n);
    }
    p.powered.push_back(pw);
    p.values.push_back(p.alpha == 1.0 ? pw : std::pow(pw, 1.0 / p.alpha));
  }
  return p;
}

// ---- checks --------------------------------------------------------------

ConditionReport check_Z12(const FuncExpr& psi, const MuProfile& mu, int n_max,
                          std::optional<double> max_K) {
  if (n_max > mu.n_max()) throw Error(ErrorKind::precondition_violated, "mu profile shorter than n_max");
  ConditionReport r;
  r.name = "Z12";
  r.grid = "0 <= i <= n <= " + std::to_string(n_max);
  double K = 1.0, K_half = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    const double base = eval_at_level(psi, n);
    if (!(base > 0.0)) throw Error(ErrorKind::degenerate_input, "psi must be positive on (0, 1]", n);
    for (int i = 0; i <= n; ++i) {
      const double m = mu.values[static_cast<std::size_t>(i)];
      const double v = m == 0.0 ? 0.0 : eval_scaled(psi, ScaledReal{m, -n});
      const double ratio = v > 0.0 ? std::max(v / base, base / v) : HUGE_VAL;
      if (ratio > K) {
        K = ratio;
        r.witness = {static_cast<double>(i), static_cast<double>(n)};
      }
    }
    if (n <= n_max / 2) K_half = K;
  }
  r.constant = K;
  r.set_detail("K_half", K_half);
  r.set_detail("growth", K / K_half);
  r.verdict = std::isfinite(K) ? Verdict::holds_on_grid : Verdict::fails;
  if (max_K) {
    r.set_detail("max_K", *max_K);
    if (K > *max_K) r.verdict = Verdict::fails;
  }
  if (r.verdict == Verdict::fails) {
    r.note = "psi(mu(i)/2^n) leaves the K-band around psi(1/2^n)";
  } else {
    r.witness.clear();
  }
  return r;
}

ConditionReport check_Z113(const FuncExpr& phi, const FuncExpr& psi, const MuProfile& mu, double K,
                           int n_max) {
  const std::vector<double> s = sigma_table(mu, n_max);
  ConditionReport r;
  r.name = "Z113";
  r.grid = "n = 0.." + std::to_string(n_max);
  double band = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    const double v = eval_at_level(phi, n);
    const double w = (1.0 + s[static_cast<std::size_t>(n)]) * eval_at_level(psi, n);
    const double ratio = std::max(v / w, w / v);
    if (ratio > band) {
      band = ratio;
      r.witness = {static_cast<double>(n)};
    }
  }
  r.constant = band;
  r.set_detail("K", K);
  r.verdict = band <= K * (1.0 + 1e-9) ? Verdict::holds_on_grid : Verdict::fails;
  if (r.verdict == Verdict::fails) {
    r.note = "phi(1/2^n) outside the band K^{+-1} (1+sigma(n)) psi(1/2^n)";
  } else {
    r.witness.clear();
  }
  return r;
}

namespace {

ConditionReport check_G2(const FuncExpr& phi, double alpha, int n_max, int T) {
  ConditionReport r;
  r.name = "G2";
  r.grid = "n = 0.." + std::to_string(n_max) + ", " + std::to_string(T) +
           " tail terms + geometric correction";
  double L = 0.0, worst_corr = 1.0, last_q = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    CompensatedSum s;
    double prev = 0.0, term = 0.0;
    for (int i = 0; i <= T; ++i) {
      prev = term;
      term = std::exp2(-alpha * i) * eval_at_level(phi, n + i);
      s.add(term);
    }
    const double q = prev > 0.0 ? term / prev : 0.0;
    const double truncated = s.value();
    const double corrected = q < 1.0 ? truncated + term * q / (1.0 - q) : HUGE_VAL;
    const double base = eval_at_level(phi, n);
    const double Ln = corrected / base;
    if (Ln > L) {
      L = Ln;
      r.witness = {static_cast<double>(n)};
    }
    worst_corr = std::max(worst_corr, corrected / truncated);
    last_q = q;
  }
  r.constant = L;
  r.set_detail("correction_factor", worst_corr);
  r.set_detail("last_ratio", last_q);
  r.verdict = std::isfinite(L) ? Verdict::holds_on_grid : Verdict::fails;
  if (r.verdict == Verdict::fails) {
    r.note = "tail ratio test does not converge";
  } else {
    r.witness.clear();
  }
  return r;
}

ConditionReport check_star_like(const MuProfile& mu, int n_max, double alpha, double beta,
                                const char* name) {
  ConditionReport r;
  r.name = name;
  r.grid = "n = 1.." + std::to_string(n_max);
  double L = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = std::exp2((n - i) * alpha / beta - (n - i));
      best = std::max(best, mu.values[static_cast<std::size_t>(i)] * w);
    }
    const double v = mu.values[static_cast<std::size_t>(n)];
    if (v == 0.0) continue;
    const double ratio = best > 0.0 ? v / best : HUGE_VAL;
    if (ratio > L) {
      L = ratio;
      r.witness = {static_cast<double>(n)};
    }
  }
  r.constant = L;
  r.verdict = std::isfinite(L) ? Verdict::holds_on_grid : Verdict::fails;
  if (r.verdict != Verdict::fails) r.witness.clear();
  return r;
}

}  // namespace

ConditionReport check_growth_conditions(GrowthKind kind, const GrowthInputs& in, int n_max) {
  auto need_mu = [&] {
    if (!in.mu) throw Error(ErrorKind::precondition_violated, "growth check needs a mu profile");
    if (n_max > in.mu->n_max()) throw Error(ErrorKind::precondition_violated, "mu profile shorter than n_max");
    return in.mu;
  };
  switch (kind) {
    case GrowthKind::G2: {
      if (!in.phi) throw Error(ErrorKind::precondition_violated, "G2 needs phi");
      return check_G2(*in.phi, in.alpha, n_max, in.tail_terms);
    }
    case GrowthKind::Gstar:
      return check_star_like(*need_mu(), n_max, 1.0, 1.0, "Gstar");
    case GrowthKind::Zstar:
      return check_star_like(*need_mu(), n_max, in.alpha, in.beta, "Zstar");
    case GrowthKind::sufficient_G6: {
      const MuProfile& mu = *need_mu();
      ConditionReport r;
      r.name = "2eset";
      r.grid = "n = 0.." + std::to_string(n_max);
      const int n0 = sufficiently_large_from(0, n_max, [&](int n) {
        return mu.values[static_cast<std::size_t>(n)] <= 1.0 + 1e-12;
      });
      r.constant = n0;
      r.verdict = n0 <= n_max / 2 ? Verdict::holds_on_grid : Verdict::fails;
      if (in.psi) {
        const ConditionReport m =
            check_essential_monotonicity(*in.psi, in.grid_depth, Direction::increasing);
        r.set_detail("psi_increasing_C", m.constant);
        r.grid += "; psi on " + m.grid;
      }
      if (r.verdict == Verdict::fails) {
        r.witness = {static_cast<double>(n0 - 1)};
        r.note = "mu(n) > 1 too late in the sweep";
      }
      return r;
    }
    case GrowthKind::F1: {
      const MuProfile& mu = *need_mu();
      ConditionReport r;
      r.name = "F1";
      r.grid = "n = 0.." + std::to_string(n_max);
      double slack = HUGE_VAL, top = 0.0;
      r.verdict = Verdict::holds_on_grid;
      for (int n = 0; n <= n_max; ++n) {
        const double v = mu.powered[static_cast<std::size_t>(n)];
        const double d = static_cast<double>(n) + 2.0;
        const double lower = (in.gamma - 1.0) / (d * d * d);
        slack = std::min(slack, v / lower);
        top = std::max(top, v);
        if (r.verdict != Verdict::fails && (v < lower || v > 1.0)) {
          r.verdict = Verdict::fails;
          r.witness = {static_cast<double>(n), v};
          r.note = v < lower ? "mu^alpha(n) below (gamma-1)/(n+2)^3" : "mu^alpha(n) above 1";
        }
      }
      r.constant = slack;
      r.set_detail("max_mu_alpha", top);
      r.set_detail("gamma", in.gamma);
      return r;
    }
    case GrowthKind::UTS: {
      const MuProfile& mu = *need_mu();
      ConditionReport r;
      r.name = "UTS";
      r.grid = "n = 0.." + std::to_string(n_max);
      const int n0 = sufficiently_large_from(0, n_max, [&](int n) {
        const double v = mu.powered[static_cast<std::size_t>(n)];
        return v >= std::exp2(-n * in.eps) && v <= 1.0 + 1e-12;
      });
      r.constant = n0;
      r.set_detail("eps", in.eps);
      r.verdict = n0 <= n_max / 2 ? Verdict::holds_on_grid : Verdict::fails;
      if (r.verdict == Verdict::fails) {
        r.witness = {static_cast<double>(n0 - 1)};
        r.note = "bounds 2^{-n eps} <= mu^alpha(n) <= 1 not settled on the tail half";
      }
      return r;
    }
    case GrowthKind::Z14: {
      if (!in.phi) throw Error(ErrorKind::precondition_violated, "Z14 needs phi");
      A1A2Report a = check_A1_A2(*in.phi, *in.phi, in.eps, in.M, n_max, HUGE_VAL);
      a.a1.name = "Z14";
      return a.a1;
    }
  }
  throw Error(ErrorKind::precondition_violated, "unknown growth kind");
}

}  // namespace efrel

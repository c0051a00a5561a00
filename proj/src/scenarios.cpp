#include "efrel/scenarios.hpp"

#include "efrel/errors.hpp"
#include "efrel/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace efrel {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::counterintuitive: return "counterintuitive";
    case ScenarioKind::cross_exponent: return "cross-exponent";
    case ScenarioKind::gao: return "gao";
    case ScenarioKind::pofin: return "pofin";
  }
  return "?";
}

ScenarioParams ScenarioParams::defaults(ScenarioKind kind) {
  ScenarioParams p;
  p.kind = kind;
  switch (kind) {
    case ScenarioKind::counterintuitive:
      p.alpha = 2.0;
      p.beta = 2.0;
      p.eta = EtaVector{{1.0}};
      break;
    case ScenarioKind::cross_exponent:
      p.alpha = 1.0;
      p.beta = 2.0;
      p.eta = EtaVector{{1.0}};
      break;
    case ScenarioKind::gao:
      p.alpha = 1.0;
      p.beta = 1.0;
      p.eta = EtaVector{};
      p.eta2 = EtaVector{{1.0}};
      break;
    case ScenarioKind::pofin:
      p.alpha = 1.0;
      p.beta = 1.0;
      p.n_max = 1000;
      break;
  }
  return p;
}

bool ScenarioReport::all_passed() const {
  return std::none_of(conditions.begin(), conditions.end(),
                      [](const ConditionReport& c) { return c.failed(); });
}

std::string render_eta(const EtaVector& eta) {
  std::string s = "[";
  for (std::size_t i = 0; i < eta.entries.size(); ++i) {
    if (i) s += ',';
    s += format_shortest(eta.entries[i]);
  }
  return s + "]";
}

ConditionReport distortion_condition(const std::string& name, const DistortionReport& d,
                                     double residual_tol) {
  ConditionReport r;
  r.name = name;
  r.grid = "all pairs on i/2^" + std::to_string(d.level);
  r.constant = d.K_lower > 0.0 ? d.K_upper / d.K_lower : HUGE_VAL;
  r.set_detail("K_lower", d.K_lower);
  r.set_detail("K_upper", d.K_upper);
  r.set_detail("pair_count", static_cast<double>(d.pair_count));
  r.verdict = Verdict::holds_on_grid;
  if (!(d.K_lower > 0.0) || !std::isfinite(d.K_upper)) {
    r.verdict = Verdict::fails;
    r.witness = {static_cast<double>(d.worst_lower.first), static_cast<double>(d.worst_lower.second)};
    r.note = "embedded distance collapses or blows up";
  }
  if (d.adjacent_max_residual) {
    r.set_detail("adjacent_residual", *d.adjacent_max_residual);
    if (!(*d.adjacent_max_residual <= residual_tol) && r.verdict != Verdict::fails) {
      r.verdict = Verdict::fails;
      r.note = "adjacent identity residual above tolerance";
    }
  }
  return r;
}

namespace {

std::string id_label(double alpha) { return "Id^" + format_shortest(alpha); }

std::string over_leta_label(double alpha, const EtaVector& eta) {
  if (eta.entries.empty()) return id_label(alpha);
  return id_label(alpha) + "/l_" + render_eta(eta);
}

std::string times_leta_label(double alpha, const EtaVector& eta) {
  if (eta.entries.empty()) return id_label(alpha);
  return id_label(alpha) + " l_" + render_eta(eta);
}

class Pipeline {
 public:
  explicit Pipeline(ScenarioReport& r) : report_(r) {}

  ConditionReport& add(ConditionReport c, std::string name = {}) {
    if (!name.empty()) c.name = std::move(name);
    report_.conditions.push_back(std::move(c));
    return report_.conditions.back();
  }

  void distortion(const std::string& name, const DistortionReport& d, bool keep_pairs) {
    add(distortion_condition(name, d));
    if (keep_pairs && report_.pairs.empty()) report_.pairs = d.pairs;
    NamedDistortion nd{name, d};
    nd.report.pairs.clear();
    report_.embeddings.push_back(std::move(nd));
  }

 private:
  ScenarioReport& report_;
};

ConditionReport sequence_monotonicity(const std::vector<double>& v, int n_max, Direction dir,
                                      std::optional<double> max_constant = std::nullopt) {
  std::vector<std::pair<double, double>> s;
  for (int n = 0; n <= n_max; ++n) s.emplace_back(n, v[static_cast<std::size_t>(n)]);
  ConditionReport r = check_essential_monotonicity(s, dir, max_constant);
  r.grid = "n = 0.." + std::to_string(n_max);
  return r;
}

// max over n of max(a/b, b/a) at 1/2^n
ConditionReport band(const std::string& name, const FuncExpr& a, const FuncExpr& b, int n_max) {
  ConditionReport r;
  r.name = name;
  r.grid = "n = 0.." + std::to_string(n_max);
  double c = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    const double x = eval_at_level(a, n), y = eval_at_level(b, n);
    const double q = std::max(x / y, y / x);
    if (q > c) {
      c = q;
      r.witness = {static_cast<double>(n)};
    }
  }
  r.constant = c;
  r.verdict = std::isfinite(c) ? Verdict::holds_on_grid : Verdict::fails;
  if (r.verdict != Verdict::fails) r.witness.clear();
  return r;
}

KappaProfile kappa_from_mu(const MuProfile& mu, double alpha, double beta) {
  KappaProfile k;
  k.source = KappaSource::closed_form;
  for (int n = 0; n <= mu.n_max(); ++n) {
    k.values.push_back(mu.values[static_cast<std::size_t>(n)] * std::exp2(-n * alpha / beta));
  }
  return k;
}

ConditionReport kappa_cross_check(const KappaProfile& closed, const FuncExpr& f, const FuncExpr& g,
                                  int n_max) {
  ConditionReport r;
  r.name = "kappa closed form vs recursion";
  r.grid = "n = 0.." + std::to_string(n_max);
  const KappaProfile solved = solve_kappa(f, g, n_max);
  double worst = 0.0, worst_res = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double a = closed.values[static_cast<std::size_t>(n)];
    const double b = solved.values[static_cast<std::size_t>(n)];
    const double rel = a == b ? 0.0 : std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
    if (rel > worst) {
      worst = rel;
      r.witness = {static_cast<double>(n)};
    }
    worst_res = std::max(worst_res, solved.residuals[static_cast<std::size_t>(n)]);
  }
  r.constant = worst;
  r.set_detail("max_residual", worst_res);
  r.verdict = worst <= 1e-9 ? Verdict::holds_on_grid : Verdict::fails;
  if (r.verdict != Verdict::fails) r.witness.clear();
  return r;
}

// Largest eps0 2^-k (k <= 10) that clears A1, falling back to the last try.
ConditionReport a1_with_search(const FuncExpr& phi, double eps0, int n_max) {
  ConditionReport last;
  for (int k = 0; k <= 10; ++k) {
    A1A2Report a = check_A1_A2(phi, phi, std::ldexp(eps0, -k), 0, n_max, HUGE_VAL);
    last = std::move(a.a1);
    if (last.verdict == Verdict::holds_on_grid) break;
  }
  return last;
}

ConditionReport a2_only(const FuncExpr& phi, const FuncExpr& psi, int n_max, double threshold) {
  A1A2Report a = check_A1_A2(phi, psi, 1.0, n_max, n_max, threshold);
  return a.a2;
}

std::vector<SeriesRow> make_series(const MuProfile& mu, const FuncExpr& phi, int n_max) {
  const std::vector<double> s = sigma_table(mu, n_max);
  std::vector<SeriesRow> rows;
  for (int n = 0; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    rows.push_back({n, mu.values[k], eval_at_level(phi, n), s[k]});
  }
  return rows;
}

std::vector<double> one_plus_sigma_times(const MuProfile& mu, const FuncExpr& psi, int n_max) {
  std::vector<double> s = sigma_table(mu, n_max);
  for (int n = 0; n <= n_max; ++n) s[static_cast<std::size_t>(n)] = (1.0 + s[static_cast<std::size_t>(n)]) * eval_at_level(psi, n);
  return s;
}

std::string finish_verdict(const ScenarioReport& r, const std::string& claim) {
  if (r.conditions.empty()) return "vacuous";
  if (r.all_passed()) return "supported-on-grid: " + claim;
  std::string s = "not-supported-on-grid: " + claim + " (failed:";
  for (const auto& c : r.conditions) {
    if (c.failed()) s += " " + c.name;
  }
  return s + ")";
}

void require_params(const ScenarioParams& p) {
  if (p.n_max < 1) throw Error(ErrorKind::range_error, "n_max must be >= 1");
  if (p.level < 1 || p.level > 14) throw Error(ErrorKind::range_error, "level must be in 1..14");
  if (p.a1_n_max < 1) throw Error(ErrorKind::range_error, "A1 sweep bound must be >= 1");
  if (!(p.alpha >= 1.0)) throw Error(ErrorKind::range_error, "alpha must be >= 1");
}

// Theorem-level composition for φ decreasing: both directions between
// E_{Id^α} and E_{Id^α φ}.
void run_counterintuitive(const ScenarioParams& p, ScenarioReport& r) {
  Pipeline pl(r);
  const double a = p.alpha;
  const FuncExpr phi = leta(p.eta, p.log_base);
  const FuncExpr f = id_leta(a, p.eta, +1, p.log_base);
  const FuncExpr ida = power(a, p.log_base);
  const int D = std::max(p.n_max, p.level);

  pl.add(check_essential_monotonicity(phi, p.mono_depth, Direction::decreasing), "phi essentially decreasing");
  pl.add(check_essential_monotonicity(f, p.mono_depth, Direction::increasing), "Id^alpha phi essentially increasing");
  pl.add(check_equivalence_conditions(f, p.equiv_depth), "equivalence(Id^alpha phi)");
  {
    ConditionReport c;
    c.name = "liminf x^delta phi = 0";
    const DecayProbe probe;
    c.grid = "x = 2^-2^m, m <= " + std::to_string(probe.max_log2_exponent);
    c.verdict = Verdict::holds_on_grid;
    for (double d : probe.deltas) {
      if (!probe_decays(phi, d, probe)) {
        c.verdict = Verdict::fails;
        c.witness = {d};
        c.note = "x^delta phi(x) not decaying on the probe grid";
        break;
      }
    }
    c.constant = probe.deltas.back();
    pl.add(std::move(c));
  }
  if (!r.all_passed()) return;

  // E_{Id^α} <= E_{Id^α φ}
  RepeatEmbedding rep = build_repeat_embedding(phi, a, std::uint64_t{1} << p.level, 60);
  DistortionOptions opt;
  opt.threads = p.threads;
  DistortionReport d1 = verify_distortion(ida, f, rep.embedding, opt);
  d1.level = p.level;
  pl.distortion("repeat embedding Id^alpha -> Id^alpha phi", d1, false);

  // E_{Id^α φ} <= E_{Id^α}
  GrowthInputs in;
  in.phi = &phi;
  in.alpha = a;
  pl.add(check_growth_conditions(GrowthKind::G2, in, p.n_max));
  const MuProfile mu = mu_same_exponent(phi, a, D);
  in.mu = &mu;
  pl.add(check_growth_conditions(GrowthKind::Gstar, in, p.n_max), "Mustar");
  const KappaProfile kappa = kappa_from_mu(mu, a, a);
  pl.add(check_kappa_conditions(ida, kappa, p.n_max));
  pl.add(kappa_cross_check(kappa, f, ida, p.n_max));
  const GridEmbedding tent = build_tent_embedding(kappa, p.level);
  opt.keep_pairs = true;
  pl.distortion("tent embedding Id^alpha phi -> Id^alpha", verify_distortion(f, ida, tent, opt), true);
  r.pair_grid = tent.grid_size;
  r.series = make_series(mu, phi, p.n_max);

  r.verdict = finish_verdict(r, "E_{" + id_label(a) + "} and E_{" + times_leta_label(a, p.eta) +
                                    "} are Borel equivalent");
}

void run_cross_exponent(const ScenarioParams& p, ScenarioReport& r) {
  Pipeline pl(r);
  const double a = p.alpha, b = p.beta;
  if (!(b > a)) throw Error(ErrorKind::range_error, "cross-exponent scenario needs beta > alpha");
  const FuncExpr phi = inv_leta(p.eta, p.log_base);
  const FuncExpr f = id_leta(a, p.eta, -1, p.log_base);
  const FuncExpr idb = power(b, p.log_base);
  const FuncExpr quotient = multiply_power_log(phi, -(b - a), {});
  const int D = std::max(p.n_max, p.level);

  pl.add(check_essential_monotonicity(phi, p.mono_depth, Direction::increasing), "phi essentially increasing");
  {
    // φ/Id^{β-α} is unbounded at 0: sample (0, 1] only.
    const std::size_t N = std::size_t{1} << p.mono_depth;
    std::vector<std::pair<double, double>> s;
    for (std::size_t i = 1; i <= N; ++i) {
      const double x = std::ldexp(static_cast<double>(i), -static_cast<int>(p.mono_depth));
      s.emplace_back(x, eval_func(quotient, x));
    }
    ConditionReport c = check_essential_monotonicity(s, Direction::decreasing);
    c.grid = dyadic_grid_label(p.mono_depth) + " without 0";
    pl.add(std::move(c), "phi/Id^(beta-alpha) essentially decreasing");
  }
  pl.add(check_equivalence_conditions(f, p.equiv_depth), "equivalence(Id^alpha phi)");
  GrowthInputs in;
  in.phi = &phi;
  in.alpha = a;
  in.beta = b;
  pl.add(check_growth_conditions(GrowthKind::G2, in, p.n_max));
  const MuProfile mu = mu_cross_exponent(phi, a, b, D);
  in.mu = &mu;
  pl.add(check_growth_conditions(GrowthKind::Zstar, in, p.n_max));
  if (!r.all_passed()) return;

  const KappaProfile kappa = kappa_from_mu(mu, a, b);
  pl.add(check_kappa_conditions(idb, kappa, p.n_max));
  pl.add(kappa_cross_check(kappa, f, idb, p.n_max));
  const GridEmbedding tent = build_tent_embedding(kappa, p.level);
  DistortionOptions opt;
  opt.threads = p.threads;
  opt.keep_pairs = true;
  pl.distortion("tent embedding Id^alpha phi -> Id^beta", verify_distortion(f, idb, tent, opt), true);
  r.pair_grid = tent.grid_size;
  r.series = make_series(mu, phi, p.n_max);

  r.verdict = finish_verdict(r, "E_{" + over_leta_label(a, p.eta) + "} <=_B E_{" + id_label(b) + "}");
}

void run_gao(const ScenarioParams& p, ScenarioReport& r) {
  Pipeline pl(r);
  const double a = p.alpha;
  const int D = std::max({2 * std::max(p.n_max, p.a1_n_max) + 8, static_cast<int>(p.mono_depth) + 2,
                          p.level + 2});
  const FuncExpr psi = inv_leta(p.eta2, p.log_base);
  const MuProfile mu = mu_logos(p.eta, p.eta2, a, D, p.log_base);

  GrowthInputs in;
  in.mu = &mu;
  in.psi = &psi;
  in.alpha = a;
  in.beta = a;
  in.eps = p.uts_eps;
  in.grid_depth = p.mono_depth;
  pl.add(check_growth_conditions(GrowthKind::UTS, in, p.n_max));
  pl.add(check_essential_monotonicity(psi, p.mono_depth, Direction::increasing), "psi essentially increasing");
  pl.add(check_growth_conditions(GrowthKind::sufficient_G6, in, p.n_max));
  pl.add(check_growth_conditions(GrowthKind::Gstar, in, p.n_max));
  const ConditionReport& z12 = pl.add(check_Z12(psi, mu, p.n_max));
  const double K = z12.constant;
  pl.add(sequence_monotonicity(one_plus_sigma_times(mu, psi, p.n_max), p.n_max, Direction::decreasing),
         "(1+sigma)psi essentially decreasing");

  const PhiTable phi = phi_from_mu(mu, a, a, psi, D);
  pl.add(check_Z113(phi.func, psi, mu, K, p.n_max));
  pl.add(check_essential_monotonicity(phi.func, p.mono_depth, Direction::increasing), "phi essentially increasing");
  pl.add(band("phi l_eta band", phi.func, inv_leta(p.eta, p.log_base), p.n_max));

  const FuncExpr f = multiply_power_log(phi.func, a, {});
  const FuncExpr g = id_leta(a, p.eta2, -1, p.log_base);
  pl.add(check_equivalence_conditions(f, p.equiv_depth), "equivalence(f)");
  pl.add(check_equivalence_conditions(g, p.equiv_depth), "equivalence(g)");
  if (!r.all_passed()) return;

  const KappaProfile kappa = kappa_from_mu(mu, a, a);
  pl.add(check_kappa_conditions(g, kappa, p.n_max));
  const GridEmbedding tent = build_tent_embedding(kappa, p.level);
  DistortionOptions opt;
  opt.threads = p.threads;
  opt.keep_pairs = true;
  pl.distortion("tent embedding f -> g", verify_distortion(f, g, tent, opt), true);
  r.pair_grid = tent.grid_size;

  const double eps0 = 1.0 / eval_func(leta(p.eta, p.log_base), 0.5);
  pl.add(a1_with_search(phi.func, eps0, p.a1_n_max));
  pl.add(a2_only(phi.func, psi, p.n_max, 0.5));
  r.series = make_series(mu, phi.func, p.n_max);

  const std::string lower = over_leta_label(a, p.eta), upper = over_leta_label(a, p.eta2);
  r.verdict = finish_verdict(r, "E_{" + lower + "} <_B E_{" + upper + "}");
}

void run_pofin(const ScenarioParams& p, ScenarioReport& r) {
  Pipeline pl(r);
  const double a = p.alpha;
  const std::int64_t probe = 4 * static_cast<std::int64_t>(p.n_max) + 64;
  if (!p.U.subset_of(p.V, probe)) {
    throw Error(ErrorKind::order_violation, "pofin scenario needs U subset of V");
  }
  // Finite modification so that 0 lies in V \ U.
  SubsetSpec U = p.U, V = p.V;
  if (U.contains(0) || !V.contains(0)) {
    U = U.with_membership(0, false);
    V = V.with_membership(0, true);
  }

  const int P = std::max({p.n_max, 2 * p.a1_n_max + 8, static_cast<int>(p.mono_depth) + 2, p.level + 2});
  const int D = P + 3 * static_cast<int>(std::ceil(std::log2(P + 2.0))) + 8;
  const FuncExpr psi0 = power_log(0.0, {{0, -2.0}}, p.log_base);
  const MuProfile mu_u = mu_pofin(U, p.gamma, D, a, p.log_base);
  const MuProfile mu_v = mu_pofin(V, p.gamma, D, a, p.log_base);

  pl.add(check_Z12(psi0, mu_u, p.n_max), "Z12(psi0, mu_U)");
  pl.add(check_Z12(psi0, mu_v, p.n_max), "Z12(psi0, mu_V)");
  pl.add(sequence_monotonicity(one_plus_sigma_times(mu_u, psi0, p.n_max), p.n_max, Direction::decreasing, 9.0),
         "(1+sigma_U)psi0 essentially decreasing <= 9");
  pl.add(sequence_monotonicity(one_plus_sigma_times(mu_v, psi0, p.n_max), p.n_max, Direction::decreasing, 9.0),
         "(1+sigma_V)psi0 essentially decreasing <= 9");

  const PhiTable phi_u = phi_from_mu(mu_u, a, a, psi0, D);
  const PhiTable phi_v = phi_from_mu(mu_v, a, a, psi0, D);
  const FuncExpr F_u = multiply_power_log(phi_u.func, a, {});
  const FuncExpr F_v = multiply_power_log(phi_v.func, a, {});
  pl.add(check_equivalence_conditions(F_u, p.equiv_depth), "equivalence(F(U))");
  pl.add(check_equivalence_conditions(F_v, p.equiv_depth), "equivalence(F(V))");

  const MuProfile mu = mu_quotient_difference(mu_u, mu_v, P);
  GrowthInputs in;
  in.mu = &mu;
  in.psi = &phi_u.func;
  in.alpha = a;
  in.beta = a;
  in.gamma = p.gamma;
  in.grid_depth = p.mono_depth;
  pl.add(check_growth_conditions(GrowthKind::F1, in, p.n_max));
  pl.add(check_growth_conditions(GrowthKind::sufficient_G6, in, p.n_max));
  pl.add(check_growth_conditions(GrowthKind::Gstar, in, p.n_max));
  const ConditionReport& z12 = pl.add(check_Z12(phi_u.func, mu, p.n_max), "Z12(phi_U, mu)");
  const double K = z12.constant;
  pl.add(sequence_monotonicity(one_plus_sigma_times(mu, phi_u.func, p.n_max), p.n_max, Direction::decreasing),
         "(1+sigma)phi_U essentially decreasing");

  const PhiTable phi = phi_from_mu(mu, a, a, phi_u.func, P);
  pl.add(check_Z113(phi.func, phi_u.func, mu, K, p.n_max));
  pl.add(band("phi ~ phi_V band", phi.func, phi_v.func, p.n_max));
  if (!r.all_passed()) return;

  const FuncExpr f = multiply_power_log(phi.func, a, {});
  const KappaProfile kappa = kappa_from_mu(mu, a, a);
  pl.add(check_kappa_conditions(F_u, kappa, p.n_max));
  const GridEmbedding tent = build_tent_embedding(kappa, p.level);
  DistortionOptions opt;
  opt.threads = p.threads;
  opt.keep_pairs = true;
  pl.distortion("tent embedding F(V) -> F(U)", verify_distortion(f, F_u, tent, opt), true);
  r.pair_grid = tent.grid_size;

  pl.add(a1_with_search(phi.func, 1.0 / 8.0, p.a1_n_max));
  pl.add(a2_only(phi.func, phi_u.func, p.n_max, 0.9));
  r.series = make_series(mu, phi.func, p.n_max);

  r.verdict = finish_verdict(r, "E_{F(V)} <_B E_{F(U)} for U = " + p.U.render() + ", V = " +
                                    p.V.render() + ", gamma = " + p.gamma_text);
}

void fill_params(const ScenarioParams& p, ScenarioReport& r) {
  auto& v = r.params;
  v.emplace_back("alpha", p.alpha);
  switch (p.kind) {
    case ScenarioKind::counterintuitive:
      v.emplace_back("eta", render_eta(p.eta));
      break;
    case ScenarioKind::cross_exponent:
      v.emplace_back("beta", p.beta);
      v.emplace_back("eta", render_eta(p.eta));
      break;
    case ScenarioKind::gao:
      v.emplace_back("eta", render_eta(p.eta));
      v.emplace_back("eta2", render_eta(p.eta2));
      v.emplace_back("uts_eps", p.uts_eps);
      v.emplace_back("a1_nmax", static_cast<double>(p.a1_n_max));
      break;
    case ScenarioKind::pofin:
      v.emplace_back("U", p.U.render());
      v.emplace_back("V", p.V.render());
      v.emplace_back("gamma", p.gamma_text);
      v.emplace_back("a1_nmax", static_cast<double>(p.a1_n_max));
      break;
  }
  v.emplace_back("nmax", static_cast<double>(p.n_max));
  v.emplace_back("level", static_cast<double>(p.level));
  v.emplace_back("log_base", p.log_base);
  v.emplace_back("mono_depth", static_cast<double>(p.mono_depth));
  v.emplace_back("equiv_depth", static_cast<double>(p.equiv_depth));
}

}  // namespace

ScenarioReport run_scenario(const ScenarioParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioReport r;
  r.scenario = to_string(params.kind);
  fill_params(params, r);
  try {
    require_params(params);
    switch (params.kind) {
      case ScenarioKind::counterintuitive: run_counterintuitive(params, r); break;
      case ScenarioKind::cross_exponent: run_cross_exponent(params, r); break;
      case ScenarioKind::gao: run_gao(params, r); break;
      case ScenarioKind::pofin: run_pofin(params, r); break;
    }
  } catch (const Error& e) {
    throw e.with_context("scenario " + r.scenario);
  }
  if (r.verdict.empty()) r.verdict = finish_verdict(r, "(stopped after failed preconditions)");
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace efrel

// efrel: command-line front end for the E_f toolkit.
#include "efrel/conditions.hpp"
#include "efrel/embeddings.hpp"
#include "efrel/errors.hpp"
#include "efrel/format.hpp"
#include "efrel/report_io.hpp"
#include "efrel/scenarios.hpp"
#include "efrel/spec_parser.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace efrel;

namespace {

struct Options {
  RunConfig config;
  std::string f, g, psi, kappa_file, out, direction = "increasing", kind = "tent", scenario;
  unsigned depth = 0;
  int n_max = 0;
  int level = 8;
  double alpha = 1.0;
  std::optional<double> alpha_opt, beta_opt, max_constant, uts_eps;
  std::uint64_t repeat_n = 256;
  std::string U, V, gamma, eta, eta2;
  int a1_n_max = 0;
  unsigned mono_depth = 0, equiv_depth = 0;
  bool identity = false;
};

ScenarioReport command_report(const std::string& command) {
  ScenarioReport r;
  r.scenario = command;
  return r;
}

std::string overall_verdict(const ScenarioReport& r) {
  if (r.conditions.empty()) return "vacuous";
  if (r.all_passed()) return "all-conditions-hold-on-grid";
  std::string s = "failed:";
  for (const auto& c : r.conditions) {
    if (c.failed()) s += " " + c.name;
  }
  return s;
}

int emit(ScenarioReport& r, const Options& o, const std::string& head_key) {
  if (r.verdict.empty()) r.verdict = overall_verdict(r);
  const std::string json = report_json(r, o.config, head_key);
  if (o.config.json_path.empty() || o.config.json_path == "-") {
    write_text("-", json);
  } else {
    write_text(o.config.json_path, json);
    std::cout << r.verdict << "\n";
  }
  return r.all_passed() ? 0 : 1;
}

FuncExpr spec_or_throw(const std::string& s, const char* what, const Options& o) {
  if (s.empty()) throw Error(ErrorKind::parse_error, std::string("missing --") + what);
  std::vector<std::string> warnings;
  FuncExpr f = parse_func_spec(s, o.config.log_base, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: --" << what << ": " << w << "\n";
  return f;
}

KappaProfile read_kappa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open kappa file " + path);
  KappaProfile k;
  k.source = KappaSource::supplied;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long n = -1;
    double v = 0.0, res = 0.0;
    if (!(ls >> n >> v)) throw Error(ErrorKind::parse_error, path + ": expected \"n kappa [residual]\"");
    if (n != static_cast<long long>(k.values.size())) {
      throw Error(ErrorKind::parse_error, path + ": levels must be consecutive from 0");
    }
    ls >> res;
    k.values.push_back(v);
    k.residuals.push_back(res);
  }
  if (k.values.empty()) throw Error(ErrorKind::parse_error, path + ": empty kappa file");
  return k;
}

KappaProfile kappa_for(const Options& o, const FuncExpr& f, const FuncExpr& g, int n) {
  if (o.identity) {
    KappaProfile k;
    k.values.assign(static_cast<std::size_t>(n) + 1, 0.0);
    k.values[0] = 1.0;
    k.residuals.assign(k.values.size(), 0.0);
    return k;
  }
  if (!o.kappa_file.empty()) return read_kappa_file(o.kappa_file);
  SolveKappaOptions so;
  so.precision_bits = o.config.precision_bits;
  return solve_kappa(f, g, n, so);
}

void record_common(ScenarioReport& r, const Options& o) {
  if (!o.f.empty()) r.params.emplace_back("f", o.f);
  if (!o.g.empty()) r.params.emplace_back("g", o.g);
  if (!o.psi.empty()) r.params.emplace_back("psi", o.psi);
}

int cmd_check_equiv(Options& o) {
  const FuncExpr f = spec_or_throw(o.f, "f", o);
  const unsigned depth = o.depth ? o.depth : 8;
  o.config.grid_depth = depth;
  ScenarioReport r = command_report("check-equiv");
  record_common(r, o);
  r.params.emplace_back("depth", static_cast<double>(depth));
  r.conditions.push_back(check_equivalence_conditions(f, depth));
  return emit(r, o, "command");
}

int cmd_check_mono(Options& o) {
  const FuncExpr f = spec_or_throw(o.f, "f", o);
  const unsigned depth = o.depth ? o.depth : 20;
  o.config.grid_depth = depth;
  Direction dir;
  if (o.direction == "increasing") {
    dir = Direction::increasing;
  } else if (o.direction == "decreasing") {
    dir = Direction::decreasing;
  } else {
    throw Error(ErrorKind::parse_error, "direction must be increasing or decreasing");
  }
  ScenarioReport r = command_report("check-mono");
  record_common(r, o);
  r.params.emplace_back("direction", o.direction);
  r.params.emplace_back("depth", static_cast<double>(depth));
  if (o.max_constant) r.params.emplace_back("max_constant", *o.max_constant);
  r.conditions.push_back(check_essential_monotonicity(f, depth, dir, o.max_constant));
  return emit(r, o, "command");
}

int cmd_solve_kappa(Options& o) {
  const FuncExpr f = spec_or_throw(o.f, "f", o);
  const FuncExpr g = spec_or_throw(o.g, "g", o);
  const int n_max = o.n_max ? o.n_max : 40;
  o.config.n_max = n_max;
  SolveKappaOptions so;
  so.precision_bits = o.config.precision_bits;
  const KappaProfile k = solve_kappa(f, g, n_max, so);
  write_text(o.out.empty() ? "kappa.txt" : o.out, kappa_text(k));
  ScenarioReport r = command_report("solve-kappa");
  record_common(r, o);
  r.params.emplace_back("nmax", static_cast<double>(n_max));
  ConditionReport res;
  res.name = "recursion residual";
  res.grid = "n = 0.." + std::to_string(n_max);
  double worst = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double scale = std::max(1e-300, eval_at_level(f, n));
    const double rel = k.residuals[static_cast<std::size_t>(n)] / scale;
    if (rel > worst) {
      worst = rel;
      res.witness = {static_cast<double>(n)};
    }
  }
  res.constant = worst;
  res.verdict = worst <= 1e-10 ? Verdict::holds_on_grid : Verdict::fails;
  if (!res.failed()) res.witness.clear();
  r.conditions.push_back(std::move(res));
  r.conditions.push_back(check_kappa_conditions(g, k, n_max));
  return emit(r, o, "command");
}

GridEmbedding embedding_for(const Options& o, const FuncExpr* f, const FuncExpr* g, FuncExpr* f_out,
                            FuncExpr* g_out) {
  if (o.kind == "tent") {
    const KappaProfile k = kappa_for(o, *f, *g, o.level);
    return build_tent_embedding(k, o.level);
  }
  if (o.kind == "repeat") {
    const FuncExpr psi = spec_or_throw(o.psi, "psi", o);
    const double alpha = o.alpha_opt.value_or(1.0);
    RepeatEmbedding rep = build_repeat_embedding(psi, alpha, o.repeat_n, 60);
    if (f_out) *f_out = power(alpha, o.config.log_base);
    if (g_out) *g_out = multiply_power_log(psi, alpha, {});
    return rep.embedding;
  }
  throw Error(ErrorKind::parse_error, "embedding kind must be tent or repeat");
}

int cmd_build_embedding(Options& o) {
  FuncExpr f, g;
  if (o.kind == "tent") {
    f = spec_or_throw(o.f, "f", o);
    g = o.identity ? f : spec_or_throw(o.g, "g", o);
  }
  const GridEmbedding e = embedding_for(o, &f, &g, nullptr, nullptr);
  write_text(o.out.empty() ? "-" : o.out, render_embedding(e));
  return 0;
}

int cmd_verify_distortion(Options& o) {
  FuncExpr f, g;
  if (o.kind == "tent") {
    f = spec_or_throw(o.f, "f", o);
    g = o.identity ? f : spec_or_throw(o.g, "g", o);
  }
  const GridEmbedding e = embedding_for(o, &f, &g, &f, &g);
  DistortionOptions opt;
  opt.threads = o.config.threads;
  opt.keep_pairs = !o.config.pairs_csv_path.empty() || !o.config.csv_path.empty();
  DistortionReport d = verify_distortion(f, g, e, opt);
  ScenarioReport r = command_report("verify-distortion");
  record_common(r, o);
  r.params.emplace_back("kind", o.kind);
  if (o.kind == "tent") {
    r.params.emplace_back("level", static_cast<double>(o.level));
  } else {
    r.params.emplace_back("n", static_cast<double>(o.repeat_n));
    r.params.emplace_back("alpha", o.alpha_opt.value_or(1.0));
  }
  r.conditions.push_back(distortion_condition("distortion", d));
  const std::string csv = pairs_csv(d.pairs, e.grid_size);
  if (!o.config.csv_path.empty()) write_text(o.config.csv_path, csv);
  if (!o.config.pairs_csv_path.empty()) write_text(o.config.pairs_csv_path, csv);
  d.pairs.clear();
  r.embeddings.push_back({"distortion", d});
  return emit(r, o, "command");
}

ScenarioKind scenario_kind(const std::string& s) {
  if (s == "counterintuitive") return ScenarioKind::counterintuitive;
  if (s == "cross-exponent") return ScenarioKind::cross_exponent;
  if (s == "gao") return ScenarioKind::gao;
  if (s == "pofin") return ScenarioKind::pofin;
  throw Error(ErrorKind::parse_error, "unknown scenario \"" + s + "\"");
}

int cmd_scenario(Options& o) {
  ScenarioParams p = ScenarioParams::defaults(scenario_kind(o.scenario));
  if (o.alpha_opt) p.alpha = *o.alpha_opt;
  if (o.beta_opt) p.beta = *o.beta_opt;
  if (p.kind == ScenarioKind::counterintuitive && !o.beta_opt) p.beta = p.alpha;
  if (!o.eta.empty()) p.eta = parse_eta(o.eta);
  if (!o.eta2.empty()) p.eta2 = parse_eta(o.eta2);
  if (!o.U.empty()) p.U = parse_subset(o.U);
  if (!o.V.empty()) p.V = parse_subset(o.V);
  if (!o.gamma.empty()) {
    p.gamma = parse_rational(o.gamma);
    p.gamma_text = o.gamma;
  }
  if (o.n_max) p.n_max = o.n_max;
  p.level = o.level;
  if (o.a1_n_max) p.a1_n_max = o.a1_n_max;
  if (o.mono_depth) p.mono_depth = o.mono_depth;
  if (o.equiv_depth) p.equiv_depth = o.equiv_depth;
  if (o.uts_eps) p.uts_eps = *o.uts_eps;
  p.log_base = o.config.log_base;
  p.threads = o.config.threads;
  o.config.n_max = p.n_max;
  ScenarioReport r = run_scenario(p);
  if (!o.config.csv_path.empty()) write_text(o.config.csv_path, series_csv(r.series));
  if (!o.config.pairs_csv_path.empty()) write_text(o.config.pairs_csv_path, pairs_csv(r.pairs, r.pair_grid));
  return emit(r, o, "scenario");
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse_error:
    case ErrorKind::range_error:
    case ErrorKind::io_error:
    case ErrorKind::order_violation:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"efrel: checks, embeddings and scenarios for the relations E_f"};
  app.require_subcommand(1);
  Options o;
  o.config.precision_bits = default_precision_bits();

  auto add_globals = [&](CLI::App* c) {
    c->add_option("--json", o.config.json_path, "JSON report path ('-' = stdout, the default)");
    c->add_option("--log-base", o.config.log_base, "base of log in t_0 = 1 - log x");
    c->add_option("--threads", o.config.threads, "worker threads for pair sweeps")->check(CLI::Range(1, 256));
    c->add_flag("--timing", o.config.timing, "record wall-clock runtime in the report");
    c->add_option("--precision-bits", o.config.precision_bits, "bisection precision (default $EFREL_PRECISION_BITS or 50)")
        ->check(CLI::Range(8, 60));
  };

  auto* equiv = app.add_subcommand("check-equiv", "check (R1) and both quasi-triangle inequalities");
  equiv->add_option("--f", o.f, "function spec")->required();
  equiv->add_option("--depth", o.depth, "dyadic grid depth (default 8)");
  add_globals(equiv);

  auto* mono = app.add_subcommand("check-mono", "check essential monotonicity on a dyadic grid");
  mono->add_option("--f", o.f, "function spec")->required();
  mono->add_option("--depth", o.depth, "dyadic grid depth (default 20)");
  mono->add_option("--direction", o.direction, "increasing | decreasing");
  mono->add_option("--max-constant", o.max_constant, "fail when the constant exceeds this");
  add_globals(mono);

  auto* kappa = app.add_subcommand("solve-kappa", "solve the amplitude recursion by bisection");
  kappa->add_option("--f", o.f, "function spec")->required();
  kappa->add_option("--g", o.g, "function spec")->required();
  kappa->add_option("--nmax", o.n_max, "last level (default 40)");
  kappa->add_option("--out", o.out, "kappa file (default kappa.txt, '-' = stdout)");
  add_globals(kappa);

  auto add_embedding_opts = [&](CLI::App* c) {
    c->add_option("--kind", o.kind, "tent | repeat");
    c->add_option("--f", o.f, "domain function spec (tent)");
    c->add_option("--g", o.g, "codomain function spec (tent)");
    c->add_option("--psi", o.psi, "psi spec (repeat: f = Id^alpha, g = Id^alpha psi)");
    c->add_option("--alpha", o.alpha_opt, "power exponent (repeat)");
    c->add_option("--n", o.repeat_n, "grid size (repeat, default 256)");
    c->add_option("--level", o.level, "tent level (default 8)");
    c->add_option("--kappa", o.kappa_file, "kappa file instead of solving");
    c->add_flag("--identity", o.identity, "g = f and kappa = (1, 0, 0, ...)");
  };
  auto* build = app.add_subcommand("build-embedding", "build a grid embedding and print its points");
  add_embedding_opts(build);
  build->add_option("--out", o.out, "output path (default stdout)");
  add_globals(build);

  auto* dist = app.add_subcommand("verify-distortion", "measure distortion over all grid pairs");
  add_embedding_opts(dist);
  dist->add_option("--csv", o.config.csv_path, "pair rows (i, j, distance, ratio)");
  add_globals(dist);

  auto* scen = app.add_subcommand("scenario", "run an end-to-end scenario pipeline");
  scen->add_option("kind", o.scenario, "counterintuitive | cross-exponent | gao | pofin")->required();
  scen->add_option("--alpha", o.alpha_opt, "alpha");
  scen->add_option("--beta", o.beta_opt, "beta (cross-exponent)");
  scen->add_option("--eta", o.eta, "eta vector, e.g. [1,0.5]");
  scen->add_option("--eta2", o.eta2, "eta' vector (gao)");
  scen->add_option("--U", o.U, "subset U (pofin)");
  scen->add_option("--V", o.V, "subset V (pofin)");
  scen->add_option("--gamma", o.gamma, "gamma as a rational, e.g. 17/16");
  scen->add_option("--nmax", o.n_max, "sweep bound");
  scen->add_option("--level", o.level, "tent level (default 8)");
  scen->add_option("--a1-nmax", o.a1_n_max, "A1 sweep bound (default 40)");
  scen->add_option("--mono-depth", o.mono_depth, "monotonicity grid depth (default 20)");
  scen->add_option("--equiv-depth", o.equiv_depth, "equivalence grid depth (default 8)");
  scen->add_option("--uts-eps", o.uts_eps, "epsilon in the UTS bounds (default 1/2)");
  scen->add_option("--csv", o.config.csv_path, "series rows (n, mu, phi, sigma)");
  scen->add_option("--pairs-csv", o.config.pairs_csv_path, "pair rows from the tent embedding");
  add_globals(scen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*equiv) return cmd_check_equiv(o);
    if (*mono) return cmd_check_mono(o);
    if (*kappa) return cmd_solve_kappa(o);
    if (*build) return cmd_build_embedding(o);
    if (*dist) return cmd_verify_distortion(o);
    if (*scen) return cmd_scenario(o);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

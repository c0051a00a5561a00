#include "efrel/conditions.hpp"
#include "efrel/errors.hpp"
#include "efrel/func_expr.hpp"
#include "efrel/scenarios.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace efrel;

namespace {

const double ln2 = std::numbers::ln2;

MuProfile unit_mu(int n) {
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  v[0] = 1.0;
  return MuProfile::supplied(v, 1.0);
}

MuProfile constant_mu(int n, double c, double alpha = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n) + 1, c);
  v[0] = 1.0;
  return MuProfile::supplied(v, alpha);
}

const FuncExpr one = power(0);
const FuncExpr psi0 = power_log(0.0, {{0, -2.0}});

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an efrel::Error");
  return ErrorKind::io_error;
}

const ConditionReport& find(const ScenarioReport& r, const std::string& name) {
  for (const auto& c : r.conditions) {
    if (c.name == name) return c;
  }
  FAIL("no condition named " << name);
  return r.conditions.front();
}

}  // namespace

TEST_CASE("phi_from_mu") {
  const PhiTable flat = phi_from_mu(unit_mu(30), 2, 2, one, 30);
  for (int n = 0; n <= 30; ++n) CHECK(eval_at_level(flat.func, n) == 1.0);

  const PhiTable tele = phi_from_mu(constant_mu(40, std::sqrt(0.5)), 1, 2, one, 40);
  for (int n = 0; n <= 40; ++n) CHECK(std::fabs(eval_at_level(tele.func, n) - 1.0) <= 1e-12);

  // affine between knots
  const double a = eval_at_level(tele.func, 3), b = eval_at_level(tele.func, 4);
  CHECK(eval_func(tele.func, 0.75 / 8) == doctest::Approx(0.5 * (a + b)).epsilon(1e-15));

  // logos inputs: phi stays in a band around 1 = 1/l_empty
  const MuProfile mu = mu_logos(EtaVector{}, EtaVector{{1}}, 1, 60);
  const PhiTable logos = phi_from_mu(mu, 1, 1, inv_leta(EtaVector{{1}}), 60);
  auto band_to = [&](int m) {
    double c = 1.0;
    for (int n = 0; n <= m; ++n) {
      const double v = eval_at_level(logos.func, n);
      c = std::max({c, v, 1.0 / v});
    }
    return c;
  };
  const double c30 = band_to(30), c60 = band_to(60);
  CHECK(std::isfinite(c60));
  CHECK(c60 < 2.0);
  CHECK(c60 <= c30 * 1.05);
}

TEST_CASE("mu_same_exponent") {
  const MuProfile flat = mu_same_exponent(one, 1, 20);
  CHECK(flat.values[0] == 1.0);
  for (int n = 1; n <= 20; ++n) CHECK(flat.values[static_cast<std::size_t>(n)] == 0.0);

  const MuProfile lg = mu_same_exponent(leta(EtaVector{{1}}), 1, 40);
  for (int n = 1; n <= 40; ++n) CHECK(lg.values[static_cast<std::size_t>(n)] == doctest::Approx(ln2).epsilon(1e-12));

  try {
    mu_same_exponent(inv_leta(EtaVector{{1}}), 1, 10);
    FAIL("expected NegativeIncrement");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::negative_increment);
    CHECK(e.index() == 1);
  }
}

TEST_CASE("mu_cross_exponent") {
  const MuProfile dh = mu_cross_exponent(one, 1, 2, 40);
  for (int n = 1; n <= 40; ++n) CHECK(dh.values[static_cast<std::size_t>(n)] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  const FuncExpr inv = inv_leta(EtaVector{{1}});
  const MuProfile m = mu_cross_exponent(inv, 1, 2, 40);
  for (int n = 1; n <= 40; ++n) {
    const double v = m.values[static_cast<std::size_t>(n)];
    CHECK(v > 0.0);
    // (1/2)^{1/2}/(1 + n log 2)^{1/2} to leading order
    CHECK(v * std::sqrt(1 + n * ln2) == doctest::Approx(std::sqrt(0.5)).epsilon(0.2));
  }

  for (const FuncExpr& phi : {leta(EtaVector{{1}}), leta(EtaVector{{0.5, 0.5}})}) {
    const MuProfile a = mu_cross_exponent(phi, 1.5, 1.5, 30);
    const MuProfile b = mu_same_exponent(phi, 1.5, 30);
    CHECK(a.values == b.values);
  }
}

TEST_CASE("mu_logos") {
  const MuProfile a = mu_logos(EtaVector{}, EtaVector{{1}}, 1, 50);
  CHECK(a.values[0] == 1.0);
  for (int n = 1; n <= 50; ++n) CHECK(a.values[static_cast<std::size_t>(n)] == doctest::Approx(ln2).epsilon(1e-12));

  const MuProfile b = mu_logos(EtaVector{{0.5}}, EtaVector{{1}}, 1, 1000);
  for (int n = b.start_index; n <= 1000; ++n) {
    const double want = std::sqrt(1 + n * ln2) - std::sqrt(1 + (n - 1) * ln2);
    CHECK(b.values[static_cast<std::size_t>(n)] == doctest::Approx(want).epsilon(1e-12));
  }
  // n^{-1/2} decay: sqrt(n) mu(n) -> sqrt(log 2)/2
  CHECK(std::sqrt(1000.0) * b.values[1000] == doctest::Approx(std::sqrt(ln2) / 2).epsilon(1e-2));

  CHECK(kind_of([] { mu_logos(EtaVector{{1}}, EtaVector{{0.5}}, 1, 10); }) == ErrorKind::order_violation);
  CHECK(kind_of([] { mu_logos(EtaVector{{1}}, EtaVector{{1, 0}}, 1, 10); }) == ErrorKind::order_violation);
}

TEST_CASE("logos mu satisfies UTS-type bounds") {
  const std::vector<std::pair<EtaVector, EtaVector>> suite = {
      {EtaVector{}, EtaVector{{1}}}, {EtaVector{{0.5}}, EtaVector{{1}}}, {EtaVector{{1}}, EtaVector{{1, 0.5}}}};
  for (const auto& [e1, e2] : suite) {
    for (double alpha : {1.0, 2.0}) {
      const MuProfile mu = mu_logos(e1, e2, alpha, 200);
      CHECK(mu.start_index <= 20);
      for (int n = 20; n <= 200; ++n) {
        const double v = mu.powered[static_cast<std::size_t>(n)];
        CHECK(v >= std::exp2(-n));
        CHECK(v <= 1.0);
      }
      GrowthInputs in;
      in.mu = &mu;
      in.eps = 1.0;
      CHECK(check_growth_conditions(GrowthKind::UTS, in, 200).verdict == Verdict::holds_on_grid);
    }
  }
}

TEST_CASE("mu_pofin") {
  const double g = 17.0 / 16.0;
  const MuProfile empty = mu_pofin(SubsetSpec::empty_set(), g, 100);
  for (double v : empty.powered) CHECK(v == 1.0);

  const MuProfile all = mu_pofin(SubsetSpec::everything(), g, 10);
  CHECK(all.powered[4] == doctest::Approx(g * g).epsilon(1e-15));
  CHECK(all.powered[4] == doctest::Approx(1.12890625).epsilon(1e-15));

  const MuProfile ev = mu_pofin(SubsetSpec::evens(), g, 100);
  CHECK(ev.powered[10] == doctest::Approx(std::pow(g, 2)).epsilon(1e-15));   // floor(1 + log 10) = 3
  CHECK(ev.powered[100] == doctest::Approx(std::pow(g, 3)).epsilon(1e-15));  // floor(1 + log 100) = 5

  CHECK(floor_one_plus_log(4, std::numbers::e) == 2);
  CHECK(floor_one_plus_log(8, 2.0) == 4);
  CHECK(floor_one_plus_log(7, 2.0) == 3);
}

TEST_CASE("pofin profiles stay below gamma n") {
  const double g = 17.0 / 16.0;
  const std::vector<SubsetSpec> sets = {SubsetSpec::empty_set(), SubsetSpec::everything(), SubsetSpec::evens(),
                                        SubsetSpec::odds(), SubsetSpec::finite_set({0, 2, 3, 7})};
  for (const auto& U : sets) {
    for (double base : {std::numbers::e, 2.0}) {
      const MuProfile mu = mu_pofin(U, g, 10000, 1.0, base);
      for (int n = 1; n <= 10000; ++n) {
        CHECK(mu.powered[static_cast<std::size_t>(n)] >= 1.0);
        CHECK(mu.powered[static_cast<std::size_t>(n)] <= g * n);
      }
    }
  }
}

TEST_CASE("sigma partial sums") {
  for (int n : {0, 3, 17}) CHECK(sigma_partial(unit_mu(20), n) == 0.0);
  const MuProfile lg = mu_logos(EtaVector{}, EtaVector{{1}}, 1, 100);
  for (int n : {1, 10, 100}) CHECK(sigma_partial(lg, n) == doctest::Approx(n * ln2).epsilon(1e-12));
  const MuProfile e = mu_pofin(SubsetSpec::empty_set(), 17.0 / 16.0, 50);
  for (int n = 0; n <= 50; ++n) CHECK(sigma_partial(e, n) == n);
  const std::vector<double> s = sigma_table(mu_pofin(SubsetSpec::odds(), 17.0 / 16.0, 500), 500);
  for (std::size_t n = 1; n < s.size(); ++n) CHECK(s[n] >= s[n - 1]);
}

TEST_CASE("check_Z12") {
  CHECK(check_Z12(inv_leta(EtaVector{{1}}), MuProfile::supplied(std::vector<double>(31, 1.0), 1), 30).constant == 1.0);

  const FuncExpr psi = inv_leta(EtaVector{{1}});
  const double k20 = check_Z12(psi, mu_logos(EtaVector{}, EtaVector{{1}}, 1, 20), 20).constant;
  const double k40 = check_Z12(psi, mu_logos(EtaVector{}, EtaVector{{1}}, 1, 40), 40).constant;
  CHECK(std::isfinite(k40));
  CHECK(k40 <= 1.05 * k20);

  std::vector<double> halving;
  for (int n = 0; n <= 30; ++n) halving.push_back(std::exp2(-n));
  const ConditionReport bad = check_Z12(power(1), MuProfile::supplied(halving, 1), 30, 1000.0);
  CHECK(bad.verdict == Verdict::fails);
  CHECK(bad.constant == doctest::Approx(std::exp2(30)).epsilon(1e-12));
  CHECK(!bad.witness.empty());
}

TEST_CASE("Z113 band uses the Z12 constant") {
  const FuncExpr psi = inv_leta(EtaVector{{1}});
  const std::vector<std::pair<EtaVector, EtaVector>> suite = {{EtaVector{}, EtaVector{{1}}},
                                                             {EtaVector{{0.5}}, EtaVector{{1}}}};
  for (const auto& [e1, e2] : suite) {
    const MuProfile mu = mu_logos(e1, e2, 1, 60);
    const double K = check_Z12(psi, mu, 60).constant;
    const PhiTable phi = phi_from_mu(mu, 1, 1, psi, 60);
    const ConditionReport band = check_Z113(phi.func, psi, mu, K, 60);
    CHECK(band.verdict == Verdict::holds_on_grid);
  }
}

TEST_CASE("round trip through phi_from_mu") {
  const std::vector<MuProfile> profiles = {unit_mu(40), constant_mu(40, 0.3, 2.0),
                                           mu_logos(EtaVector{{0.5}}, EtaVector{{1}}, 1.5, 40),
                                           mu_pofin(SubsetSpec::evens(), 17.0 / 16.0, 40, 2.0)};
  for (const auto& mu : profiles) {
    const double a = mu.alpha;
    const PhiTable phi = phi_from_mu(mu, a, a, one, 40);
    const MuProfile back = mu_same_exponent(phi.func, a, 40);
    for (int n = 0; n <= 40; ++n) {
      const double want = mu.values[static_cast<std::size_t>(n)];
      CHECK(std::fabs(back.values[static_cast<std::size_t>(n)] - want) <= 1e-12 * std::max(1.0, want));
    }
  }
  const PhiTable tele = phi_from_mu(mu_cross_exponent(one, 1, 2, 40), 1, 2, one, 40);
  for (int n = 0; n <= 40; ++n) CHECK(std::fabs(eval_at_level(tele.func, n) - 1.0) <= 1e-12);
}

TEST_CASE("growth conditions") {
  const FuncExpr lg = leta(EtaVector{{1}});
  GrowthInputs g2;
  g2.phi = &lg;
  g2.alpha = 1;
  const ConditionReport r = check_growth_conditions(GrowthKind::G2, g2, 40);
  CHECK(r.verdict == Verdict::holds_on_grid);
  // sup at n = 0: sum_i 2^-i (1 + i log 2) = 2 + 2 log 2
  CHECK(r.constant == doctest::Approx(2 + 2 * ln2).epsilon(1e-12));

  const MuProfile dh = constant_mu(40, std::sqrt(0.5));
  GrowthInputs gs;
  gs.mu = &dh;
  CHECK(check_growth_conditions(GrowthKind::Gstar, gs, 40).constant == 1.0);

  const double g = 17.0 / 16.0;
  const MuProfile mu_u = mu_pofin(SubsetSpec::empty_set().with_membership(0, false), g, 10000);
  const MuProfile mu_v = mu_pofin(SubsetSpec::evens(), g, 10000);
  const MuProfile q = mu_quotient_difference(mu_u, mu_v, 10000);
  GrowthInputs f1;
  f1.mu = &q;
  f1.gamma = g;
  const ConditionReport f = check_growth_conditions(GrowthKind::F1, f1, 10000);
  CHECK(f.verdict == Verdict::holds_on_grid);
  CHECK(f.constant >= 1.0);
  CHECK(*f.detail("max_mu_alpha") <= 1.0);

  std::vector<double> jump(10, 0.0);
  jump[0] = 1;
  jump[5] = 2;
  const MuProfile j = MuProfile::supplied(jump, 1);
  gs.mu = &j;
  CHECK(check_growth_conditions(GrowthKind::Gstar, gs, 9).constant == 2.0);
}

TEST_CASE("essential decrease of (1 + sigma) psi0 for U empty") {
  std::vector<std::pair<double, double>> a;
  for (int n = 0; n <= 512; ++n) a.emplace_back(n, (1.0 + n) / std::pow(1 + n * ln2, 2));
  const ConditionReport r = check_essential_monotonicity(a, Direction::decreasing, 9.0);
  CHECK(r.verdict == Verdict::holds_on_grid);
  CHECK(r.constant <= 9.0);
  for (int n = 0; n <= 512; ++n) CHECK(eval_at_level(psi0, n) == doctest::Approx(1 / std::pow(1 + n * ln2, 2)).epsilon(1e-13));
}

TEST_CASE("subset specs") {
  const SubsetSpec e = SubsetSpec::evens();
  CHECK(e.contains(0));
  CHECK(!e.contains(7));
  CHECK(SubsetSpec::empty_set().subset_of(e, 100));
  CHECK(e.subset_of(SubsetSpec::everything(), 100));
  CHECK(!SubsetSpec::odds().subset_of(e, 100));
  const SubsetSpec m = e.with_membership(0, false);
  CHECK(!m.contains(0));
  CHECK(m.contains(2));
  CHECK(m.contains(1000));
  CHECK(!m.contains(1001));
  CHECK(SubsetSpec::finite_set({1, 4}).render() == "finite:1,4");
}

TEST_CASE("scenarios reproduce their corollaries on the grid") {
  for (ScenarioKind k : {ScenarioKind::counterintuitive, ScenarioKind::cross_exponent, ScenarioKind::gao}) {
    const ScenarioReport r = run_scenario(ScenarioParams::defaults(k));
    INFO(to_string(k));
    for (const auto& c : r.conditions) {
      INFO(c.name << " " << c.note);
      CHECK(c.verdict != Verdict::fails);
    }
    CHECK(r.all_passed());
    CHECK(r.verdict.rfind("supported-on-grid: ", 0) == 0);
    CHECK(!r.embeddings.empty());
  }

  const ScenarioReport hgf = run_scenario(ScenarioParams::defaults(ScenarioKind::counterintuitive));
  CHECK(hgf.verdict.find("Borel equivalent") != std::string::npos);
  CHECK(hgf.embeddings.size() == 2);

  const ScenarioReport gao = run_scenario(ScenarioParams::defaults(ScenarioKind::gao));
  CHECK(find(gao, "A1").verdict == Verdict::holds_on_grid);
  CHECK(find(gao, "A2").verdict == Verdict::holds_on_grid);
  CHECK(gao.embeddings.front().report.level == 8);

  ScenarioParams p = ScenarioParams::defaults(ScenarioKind::pofin);
  p.n_max = 1000;
  const ScenarioReport om = run_scenario(p);
  CHECK(om.all_passed());
  CHECK(find(om, "F1").verdict == Verdict::holds_on_grid);
  CHECK(find(om, "Z12(phi_U, mu)").verdict == Verdict::holds_on_grid);
  CHECK(om.verdict.find("E_{F(V)} <_B E_{F(U)}") != std::string::npos);
  CHECK(om.series.size() == 1001);
}

TEST_CASE("scenario errors carry context") {
  ScenarioParams p = ScenarioParams::defaults(ScenarioKind::gao);
  p.eta = EtaVector{{1}};
  p.eta2 = EtaVector{{0.5}};
  try {
    run_scenario(p);
    FAIL("expected OrderViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::order_violation);
    CHECK(std::string(e.what()).find("scenario gao") != std::string::npos);
  }
  ScenarioParams q = ScenarioParams::defaults(ScenarioKind::pofin);
  q.U = SubsetSpec::odds();
  q.V = SubsetSpec::evens();
  CHECK(kind_of([&] { run_scenario(q); }) == ErrorKind::order_violation);
}

TEST_CASE("scenario reports are deterministic across thread counts") {
  ScenarioParams p = ScenarioParams::defaults(ScenarioKind::cross_exponent);
  const ScenarioReport a = run_scenario(p);
  p.threads = 3;
  const ScenarioReport b = run_scenario(p);
  REQUIRE(a.conditions.size() == b.conditions.size());
  for (std::size_t i = 0; i < a.conditions.size(); ++i) {
    CHECK(a.conditions[i].constant == b.conditions[i].constant);
    CHECK(a.conditions[i].witness == b.conditions[i].witness);
  }
  CHECK(a.verdict == b.verdict);
}

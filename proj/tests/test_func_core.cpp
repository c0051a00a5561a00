#include "efrel/conditions.hpp"
#include "efrel/dyadic.hpp"
#include "efrel/errors.hpp"
#include "efrel/func_expr.hpp"
#include "efrel/summation.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <cmath>
#include <vector>

using namespace efrel;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

// ln of x^alpha Π t_i^{e_i} with x = mant 2^exp2, in 50 digits.
Big oracle_log(double alpha, const std::vector<double>& eta, double mant, long exp2) {
  const Big lnx = boost::multiprecision::log(Big(mant)) + Big(exp2) * boost::multiprecision::log(Big(2));
  Big acc = Big(alpha) * lnx;
  Big t = 1 - lnx;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (i > 0) t = 1 + boost::multiprecision::log(t);
    acc += Big(eta[i]) * boost::multiprecision::log(t);
  }
  return acc;
}

double rel_err(double got, const Big& want) {
  return static_cast<double>(boost::multiprecision::abs((Big(got) - want) / want));
}

}  // namespace

TEST_CASE("dyadic rationals reduce exactly") {
  const DyadicRational d(BigInt(12), 5);  // 12/32 = 3/8
  const auto r = d.reduced();
  CHECK(r.depth == 3);
  CHECK(r.odd == 3);
  CHECK(d.to_double() == 0.375);
  CHECK(d.to_string() == "12/2^5");
  CHECK(DyadicRational(BigInt(0), 7).reduced().depth == 0);
  CHECK(DyadicRational(BigInt(1), 3) == DyadicRational(BigInt(2), 4));
  CHECK(DyadicRational(BigInt(1), 3) < DyadicRational(BigInt(3), 4));
  CHECK_THROWS_AS(DyadicRational(BigInt(9), 3), Error);
  // the log stays finite far below double range
  const DyadicRational tiny = DyadicRational::inverse_power(5000);
  CHECK(tiny.to_double() == 0.0);
  CHECK(tiny.log() == doctest::Approx(-5000 * std::log(2.0)).epsilon(1e-14));
  CHECK(trailing_zeros(40) == 3);
}

TEST_CASE("eval_func spec examples") {
  CHECK(eval_func(power(2), 0.5) == 0.25);
  CHECK(eval_func(leta(EtaVector{{0.7}}), 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  const FuncExpr f = id_leta(1, EtaVector{{1}}, -1);
  const double x = std::exp(-1.0);
  const Big want = boost::multiprecision::exp(Big(-1)) / 2;
  CHECK(rel_err(eval_func(f, x), Big(x) / (1 - boost::multiprecision::log(Big(x)))) <= 1e-14);
  CHECK(eval_func(f, x) == doctest::Approx(0.1839397).epsilon(1e-7));
  CHECK(rel_err(eval_func(f, x), want) <= 1e-15);
}

TEST_CASE("log-domain evaluation matches a 50-digit oracle on (2^-64, 1]") {
  const std::vector<std::vector<double>> suite = {{}, {0.5}, {1}, {0.5, 0.5}, {1, 0.5}, {-1, 0.3, 0.9}};
  for (double alpha : {0.0, 1.0, 2.0, 1.5}) {
    for (const auto& eta : suite) {
      std::vector<LogFactor> fac;
      for (unsigned i = 0; i < eta.size(); ++i) fac.push_back({i, eta[i]});
      const FuncExpr f = power_log(alpha, fac);
      for (long e = 0; e >= -64; e -= 3) {
        for (double m : {0.5, 0.6180339887, 0.75, 0.999}) {
          const double got = eval_scaled(f, ScaledReal{m, e});
          const Big want = boost::multiprecision::exp(oracle_log(alpha, eta, m, e));
          CHECK(rel_err(got, want) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("log-domain evaluation survives 2^-10000 and agrees with direct evaluation") {
  const FuncExpr l = leta(EtaVector{{1, 0.5}});
  const double lg = log_eval_scaled(l, ScaledReal::inverse_power(10000));
  const Big want = oracle_log(0, {1, 0.5}, 1.0, -10000);
  CHECK(std::fabs(lg - static_cast<double>(want)) <= 1e-12 * std::fabs(static_cast<double>(want)));
  const FuncExpr f = id_leta(1.0, EtaVector{{0.5, -0.3}}, +1);
  for (double x : {1.0, 0.5, 1e-3, 1e-9, 1e-15}) {
    const double a = eval_func(f, x), b = eval_direct(f, x);
    CHECK(std::fabs(a - b) <= 1e-12 * b);
  }
  CHECK(eval_t(0, ScaledReal::from_double(1.0)) == 1.0);
  CHECK(eval_t(1, ScaledReal::from_double(std::exp(-1.0))) == doctest::Approx(1 + std::log(2.0)));
}

TEST_CASE("eval at zero and range errors") {
  CHECK(eval_func(power(1), 0.0) == 0.0);
  CHECK(eval_func(inv_leta(EtaVector{{1}}), 0.0) == 0.0);
  CHECK_THROWS_AS(eval_func(leta(EtaVector{{1}}), 0.0), Error);
  try {
    eval_func(leta(EtaVector{{1}}), 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_representable);
  }
  CHECK_THROWS_AS(eval_func(power(1), -0.1), Error);
  CHECK_THROWS_AS(eval_func(power(1), 1.5), Error);
  CHECK(eval_func(power(1), 1.0 + 1e-14) == 1.0);
  CHECK_THROWS_AS(power_log(-1, {}), Error);
}

TEST_CASE("tables, steps, scaling and folds") {
  const FuncExpr t = geometric_table({1.0, 0.5, 0.25});
  CHECK(eval_func(t, 1.0) == 1.0);
  CHECK(eval_func(t, 0.75) == 0.75);  // affine between 1/2 and 1
  CHECK(eval_func(t, 0.375) == 0.375);
  CHECK(eval_func(t, 0.01) == 0.25);  // constant past the last knot
  const FuncExpr u = uniform_table(2, {0, 1, 4, 9, 16});
  CHECK(eval_func(u, 0.5) == 4.0);
  CHECK(eval_func(u, 0.625) == 6.5);
  const FuncExpr s = step(0.5, 1.0);
  CHECK(eval_func(s, 0.5) == 0.0);
  CHECK(eval_func(s, 0.6) == 1.0);
  CHECK(eval_func(scaled(power(1), 3.0), 0.25) == 0.75);
  const FuncExpr two_x = scaled(power(1), 2.0);
  const FuncExpr tr = truncate(two_x);
  CHECK(eval_func(tr, 0.75) == 1.0);
  CHECK(eval_func(tr, 0.25) == 0.5);
  const FuncExpr sq = power(2);
  for (int i = 0; i < 64; ++i) {
    const double x = i / 63.0;
    CHECK(eval_func(truncate(sq), x) == eval_func(sq, x));
  }
  const FuncExpr fold = circle_fold(power(1), 2.0);
  CHECK(eval_func(fold, 0.25) == 0.5);
  CHECK(eval_func(fold, 0.75) == 0.5);
}

TEST_CASE("lex order zero-pads") {
  CHECK(lex_compare(EtaVector{}, EtaVector{{0.5}}) == Ordering::less);
  CHECK(lex_compare(EtaVector{{0.3}}, EtaVector{{0.5}}) == Ordering::less);
  CHECK(lex_compare(EtaVector{{0.5, 0.1}}, EtaVector{{0.5, 0.2}}) == Ordering::less);
  CHECK(lex_compare(EtaVector{{0.5, 0}}, EtaVector{{0.5}}) == Ordering::equal);
  CHECK(lex_compare(EtaVector{{1}}, EtaVector{{0.5, 1}}) == Ordering::greater);
}

TEST_CASE("f_norm") {
  const std::vector<double> zeros(5, 0.0);
  CHECK(f_norm(power(2), zeros) == 0.0);
  const std::vector<double> halves(4, 0.5);
  CHECK(f_norm(power(2), halves) == 1.0);
  const std::vector<double> v{std::exp(-1.0), -std::exp(-1.0)};
  CHECK(f_norm(id_leta(1, EtaVector{{1}}, -1), v) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const std::vector<double> bad{1.5};
  CHECK_THROWS_AS(f_norm(power(1), bad), Error);
}

TEST_CASE("compensated summation recovers cancelled digits") {
  std::vector<double> v{1.0, 1e100, 1.0, -1e100};
  CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("equivalence checker") {
  const ConditionReport sq = check_equivalence_conditions(power(2), 8);
  CHECK(sq.verdict == Verdict::holds_on_grid);
  CHECK(sq.constant <= 2.0);
  CHECK(*sq.detail("C_a") == 2.0);
  CHECK(*sq.detail("C_b") == 1.0);

  const FuncExpr hi = step(0.5, 1.0);
  const ConditionReport a = check_equivalence_conditions(hi, 8);
  REQUIRE(a.verdict == Verdict::fails);
  REQUIRE(a.witness.size() == 2);
  const double x = a.witness[0], y = a.witness[1];
  CHECK(eval_func(hi, x + y) > 0.0);
  CHECK(eval_func(hi, x) + eval_func(hi, y) == 0.0);
  CHECK(a.note.find("R2a") != std::string::npos);

  const FuncExpr lo = step(0.0, 0.5);
  const ConditionReport b = check_equivalence_conditions(lo, 8);
  REQUIRE(b.verdict == Verdict::fails);
  CHECK(b.note.find("R2b") != std::string::npos);
  const double bx = b.witness[0], by = b.witness[1];
  CHECK(eval_func(lo, bx) > 0.0);
  CHECK(eval_func(lo, bx + by) + eval_func(lo, by) == 0.0);
  // the spec's witness satisfies the same violation
  CHECK(eval_func(lo, 0.05) == 1.0);
  CHECK(eval_func(lo, 0.65) + eval_func(lo, 0.6) == 0.0);

  const ConditionReport r1 = check_equivalence_conditions(power(0), 4);
  CHECK(r1.verdict == Verdict::fails);
  CHECK(r1.note.find("R1") != std::string::npos);
}

TEST_CASE("transitivity witness") {
  const FuncExpr hi = step(0.5, 1.0);
  std::vector<std::pair<double, double>> pairs(100, {0.3, 0.3});
  const TransitivityWitness w = build_transitivity_witness(hi, pairs, 1.0, 100);
  CHECK(w.x.size() == 100);
  CHECK(w.norm_x == 0.0);
  CHECK(w.norm_y == 0.0);
  CHECK(w.divergent_sum == 100.0);

  // Indexing starts at n = 0, where 2^0 (f(x) + f(y)) < f(x+y) is possible
  // for Id^2; from n = 1 on no pair qualifies.
  std::vector<std::pair<double, double>> sq_pairs{{0.25, 0.25}, {0.25, 0.25}};
  try {
    build_transitivity_witness(power(2), sq_pairs, 1.0, 10);
    FAIL("expected InvalidWitness");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_witness);
    CHECK(e.index() == 1);
  }

  // f(ξ+η) = 0.01 gives a block of 100 terms contributing 1
  const FuncExpr t = uniform_table(2, {0.0, 0.0, 0.0, 0.01, 0.01});
  std::vector<std::pair<double, double>> p1{{0.375, 0.375}};
  const TransitivityWitness b = build_transitivity_witness(t, p1, 1.0, 100);
  REQUIRE(b.block_lengths.size() == 1);
  CHECK(b.block_lengths[0] == 100);
  CHECK(b.divergent_sum >= 0.5);
  CHECK(b.divergent_sum <= 1.0 + 1e-12);
}

TEST_CASE("essential monotonicity") {
  CHECK(check_essential_monotonicity(power(1), 12, Direction::increasing).constant == 1.0);
  std::vector<std::pair<double, double>> seq;
  for (int n = 0; n <= 512; ++n) {
    const double lp = 1 + n * std::log(2.0);
    seq.emplace_back(n, (1.0 + n) / (lp * lp));
  }
  const ConditionReport c = check_essential_monotonicity(seq, Direction::decreasing, 9.0);
  CHECK(c.verdict == Verdict::holds_on_grid);
  CHECK(c.constant <= 9.0);
  const FuncExpr ratio = power_log(0, {{0, 0.5 - 1.0}});  // l_(1/2)/l_(1)
  const ConditionReport d = check_essential_monotonicity(ratio, 20, Direction::increasing);
  CHECK(d.verdict == Verdict::holds_on_grid);
  CHECK(d.constant >= 1.0);
  std::vector<std::pair<double, double>> bad{{0.0, 1.0}, {0.5, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(check_essential_monotonicity(bad, Direction::increasing), Error);
  std::vector<std::pair<double, double>> up_down{{0.1, 1.0}, {0.2, 4.0}, {0.3, 1.0}};
  const ConditionReport u = check_essential_monotonicity(up_down, Direction::increasing, 2.0);
  CHECK(u.constant == 4.0);
  CHECK(u.verdict == Verdict::fails);
}

TEST_CASE("monotone envelopes") {
  const FuncExpr id = power(1);
  const FuncExpr e = monotone_envelope(id, Direction::increasing, 8);
  for (int i = 0; i <= 256; ++i) CHECK(eval_func(e, i / 256.0) == eval_func(id, i / 256.0));
  // x(1-x) as a uniform table
  std::vector<double> v;
  for (int i = 0; i <= 256; ++i) v.push_back((i / 256.0) * (1 - i / 256.0));
  const FuncExpr hump = uniform_table(8, v);
  const FuncExpr he = monotone_envelope(hump, Direction::increasing, 8);
  for (int i = 0; i <= 256; ++i) {
    const double x = i / 256.0;
    CHECK(eval_func(he, x) == (x <= 0.5 ? x * (1 - x) : 0.25));
  }
  const FuncExpr s = step(0.5, 1.0);
  const FuncExpr se = monotone_envelope(s, Direction::increasing, 8);
  for (int i = 0; i <= 256; ++i) CHECK(eval_func(se, i / 256.0) == eval_func(s, i / 256.0));
}

TEST_CASE("A1 and A2") {
  const FuncExpr phi = inv_leta(EtaVector{{1}});
  const FuncExpr psi = inv_leta(EtaVector{{1, 0.5}});
  const double eps = 1.0 / eval_func(leta(EtaVector{{1}}), 0.5);
  // Only the hypothesis is probed: M = 1 keeps n = 1 (i = 3, j = 0) out, see
  // the scenario fallback for the M = 0 search.
  const A1A2Report r = check_A1_A2(phi, psi, eps, 1, 40);
  CHECK(r.a1.verdict == Verdict::holds_on_grid);
  CHECK(r.a2.verdict == Verdict::holds_on_grid);
  CHECK(check_A1_A2(phi, phi, eps, 1, 40).a2.verdict == Verdict::fails);
  const A1A2Report c = check_A1_A2(power(0), power(1), 0.5, 0, 40);
  CHECK(c.a1.verdict == Verdict::holds_on_grid);
  CHECK(c.a2.verdict == Verdict::holds_on_grid);
  CHECK(c.a2.constant == std::ldexp(1.0, -40));
}

TEST_CASE("stability epsilon and increment thresholds") {
  std::vector<double> v;
  for (int i = 0; i <= 256; ++i) v.push_back(i / 256.0);
  // f = Id, C = 1: ε(a) = ½ max{y : y <= a/2}
  CHECK(stability_epsilon(v, 8, 1.0, 0.5) == 0.125);
  CHECK(increment_bound_threshold(leta(EtaVector{{1}}), 40) == 0);
  CHECK(dyadic_grid_label(8) == "dyadic i/2^8");
}

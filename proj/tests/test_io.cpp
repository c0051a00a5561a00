#include "efrel/errors.hpp"
#include "efrel/format.hpp"
#include "efrel/report_io.hpp"
#include "efrel/spec_parser.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace efrel;
using nlohmann::ordered_json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "efrel_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_func_spec examples") {
  const FuncExpr sq = parse_func_spec("id^2");
  CHECK(sq.kind == FuncKind::power_log);
  CHECK(sq.alpha == 2.0);
  CHECK(sq.factors.empty());

  const FuncExpr d = parse_func_spec("id^1/leta[1]");
  CHECK(d.alpha == 1.0);
  REQUIRE(d.factors.size() == 1);
  CHECK(d.factors[0] == LogFactor{0, -1.0});
  CHECK(eval_func(d, std::exp(-1.0)) == doctest::Approx(std::exp(-1.0) / 2).epsilon(1e-15));

  const FuncExpr m = parse_func_spec("id^1*leta[0.5,0.3]");
  REQUIRE(m.factors.size() == 2);
  CHECK(m.factors[0] == LogFactor{0, 0.5});
  CHECK(m.factors[1] == LogFactor{1, 0.3});

  const FuncExpr s = parse_func_spec("step:0.5,1");
  CHECK(s.kind == FuncKind::step);
  CHECK(eval_func(s, 0.75) == 1.0);

  const FuncExpr t = parse_func_spec("trunc(2*id^1)");
  CHECK(t.kind == FuncKind::truncated);
  CHECK(eval_func(t, 0.75) == 1.0);
  CHECK(eval_func(t, 0.25) == 0.5);
}

TEST_CASE("parse errors carry byte offsets, range errors are separate") {
  auto offset = [](const char* s) -> std::int64_t {
    try {
      parse_func_spec(s);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::parse_error && e.index()) return *e.index();
      return -2;
    }
    return -1;
  };
  CHECK(offset("") == 0);
  CHECK(offset("idx") >= 0);
  CHECK(offset("id^2*leta[0.5") == 13);
  CHECK(offset("id^") == 3);
  CHECK(offset("id^2 junk") >= 4);
  CHECK(offset("step:1") >= 5);

  auto range = [](const char* s) {
    try {
      parse_func_spec(s);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::range_error;
    }
    return false;
  };
  CHECK(range("id^-1"));
  CHECK(range("id^1*leta[1.5]"));
  CHECK(range("0*id^1"));

  std::vector<std::string> warnings;
  parse_func_spec("id^0.5", std::numbers::e, &warnings);
  CHECK(warnings.size() == 1);
  warnings.clear();
  parse_func_spec("id^1.5", std::numbers::e, &warnings);
  CHECK(warnings.empty());
}

TEST_CASE("render . parse round trip over the grammar corpus") {
  const auto table = scratch("phi.txt");
  write_file(table, "# level value\n0 1\n1 0.75\n2 0.5\n3 0.4\n");
  const std::vector<std::string> corpus = {
      "id^2",
      "id^1",
      "id^0",
      "id^1.5",
      "id^1/leta[1]",
      "id^1*leta[0.5,0.3]",
      "id^2/leta[0.5,0.5,0.25]",
      "id^1*leta[-0.5,1]",
      "3*id^2",
      "0.25*id^1*leta[1]",
      "step:0.5,1",
      "step:0,0.5",
      "trunc(id^2)",
      "trunc(2*id^1)",
      "trunc(trunc(id^1/leta[1]))",
      "fold(id^1,2)",
      "fold(id^2*leta[0.5],0.5)",
      "table:" + table.string(),
      "id^1*table:" + table.string(),
      "trunc(2*table:" + table.string() + ")",
  };
  for (const auto& s : corpus) {
    INFO(s);
    const FuncExpr a = parse_func_spec(s);
    const std::string r = render_func_spec(a);
    const FuncExpr b = parse_func_spec(r);
    CHECK(a == b);
    CHECK(render_func_spec(b) == r);
  }
}

TEST_CASE("table files") {
  const auto good = scratch("good.txt");
  write_file(good, "0 1\n1 0.5\n\n# comment\n2 0.25\n");
  CHECK(read_table_file(good.string()) == std::vector<double>{1, 0.5, 0.25});
  const FuncExpr t = parse_func_spec("table:" + good.string());
  CHECK(eval_func(t, 0.75) == 0.75);

  const auto gap = scratch("gap.txt");
  write_file(gap, "0 1\n2 0.5\n");
  CHECK_THROWS_AS(read_table_file(gap.string()), Error);

  try {
    read_table_file(scratch("missing.txt").string());
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_error);
  }
}

TEST_CASE("subsets, eta vectors and rationals") {
  CHECK(parse_subset("empty").kind == SubsetSpec::Kind::empty);
  CHECK(parse_subset("all").contains(12345));
  CHECK(parse_subset("omega").contains(0));
  const SubsetSpec ev = parse_subset("evens");
  CHECK(ev.contains(4));
  CHECK(!ev.contains(5));
  const SubsetSpec f = parse_subset("finite:3,1,7");
  CHECK(f.contains(7));
  CHECK(!f.contains(2));
  CHECK(f.render() == "finite:1,3,7");
  const SubsetSpec per = parse_subset("periodic:3:0,2:6:1,4");
  CHECK(per.contains(1));
  CHECK(!per.contains(0));
  CHECK(per.contains(6));
  CHECK(!per.contains(7));
  CHECK(per.contains(8));
  for (const std::string s : {"empty", "all", "evens", "odds", "finite:1,3,7", "periodic:3:0,2:6:1,4"}) {
    const SubsetSpec a = parse_subset(s);
    const SubsetSpec b = parse_subset(a.render());
    for (int k = 0; k < 200; ++k) CHECK(a.contains(k) == b.contains(k));
  }
  CHECK_THROWS_AS(parse_subset("primes"), Error);

  CHECK(parse_eta("[]").entries.empty());
  CHECK(parse_eta("[1,0.5]").entries == std::vector<double>{1, 0.5});
  CHECK(parse_eta("0.5").entries == std::vector<double>{0.5});
  CHECK(parse_rational("17/16") == 17.0 / 16.0);
  CHECK(parse_rational("1.0625") == 1.0625);
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("x"), Error);
}

TEST_CASE("number formatting") {
  CHECK(format_17g(0.1) == "0.10000000000000001");
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(std::stod(format_shortest(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("report JSON schema and key order") {
  ScenarioParams p = ScenarioParams::defaults(ScenarioKind::cross_exponent);
  const ScenarioReport r = run_scenario(p);
  RunConfig cfg;
  cfg.n_max = p.n_max;
  cfg.grid_depth = p.mono_depth;
  cfg.json_path = "report.json";
  const std::string text = report_json(r, cfg);
  const ordered_json j = ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"scenario", "params", "config", "conditions", "embeddings", "verdict",
                                         "runtime_ms"});
  CHECK(j["scenario"] == "cross-exponent");
  CHECK(j["config"]["precision_bits"] == 50);
  CHECK(j["config"]["nmax"] == p.n_max);
  CHECK(j["config"]["json_path"] == "report.json");
  CHECK(j["runtime_ms"] == 0);
  REQUIRE(j["conditions"].size() == r.conditions.size());
  for (const auto& c : j["conditions"]) {
    for (const char* k : {"name", "verdict", "constant", "witness", "grid"}) CHECK(c.contains(k));
  }
  REQUIRE(j["embeddings"].size() == r.embeddings.size());
  for (const auto& e : j["embeddings"]) {
    for (const char* k : {"level", "K_lower", "K_upper", "adjacent_residual"}) CHECK(e.contains(k));
  }
  CHECK(j["verdict"] == r.verdict);
  // 17 significant digits survive the round trip
  CHECK(j["embeddings"][0]["K_upper"].get<double>() == r.embeddings[0].report.K_upper);
  CHECK(report_json(r, cfg) == text);
}

TEST_CASE("empty report is vacuous and non-finite values become null") {
  ScenarioReport r;
  r.scenario = "none";
  r.verdict = "vacuous";
  ConditionReport c;
  c.name = "x";
  c.constant = HUGE_VAL;
  ScenarioReport r2 = r;
  const ordered_json j = ordered_json::parse(report_json(r, RunConfig{}));
  CHECK(j["conditions"].empty());
  CHECK(j["verdict"] == "vacuous");
  CHECK(j["config"]["nmax"].is_null());
  r2.conditions.push_back(c);
  const ordered_json j2 = ordered_json::parse(report_json(r2, RunConfig{}));
  CHECK(j2["conditions"][0]["constant"].is_null());
}

TEST_CASE("CSV outputs") {
  const std::vector<SeriesRow> rows = {{0, 1, 1, 0}, {1, 0.5, 0.75, 0.5}};
  CHECK(series_csv(rows) == "n,mu,phi,sigma\n0,1,1,0\n1,0.5,0.75,0.5\n");

  const std::vector<PairRatio> pairs = {{0, 1, 1.0}, {0, 2, 0.5}, {1, 2, 1.0}};
  const std::string csv = pairs_csv(pairs, 2);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "i,j,distance,ratio");
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 3);
  CHECK(csv.find("0,2,1,0.5\n") != std::string::npos);

  KappaProfile k;
  k.values = {1, 0.5};
  k.residuals = {0, 0};
  k.source = KappaSource::recursion_solved;
  CHECK(kappa_text(k).rfind("# n kappa residual", 0) == 0);
}

TEST_CASE("write_text") {
  const auto p = scratch("out.txt");
  write_text(p.string(), "abc\n");
  CHECK(read_file(p) == "abc\n");
  try {
    write_text((scratch("no_such_dir") / "x" / "y.txt").string(), "z");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_error);
  }
}

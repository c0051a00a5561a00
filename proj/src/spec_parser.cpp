#include "efrel/spec_parser.hpp"

#include "efrel/errors.hpp"
#include "efrel/format.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace efrel {

namespace {

class Parser {
 public:
  Parser(std::string_view s, double log_base, std::vector<std::string>* warnings)
      : s_(s), base_(log_base), warnings_(warnings) {}

  FuncExpr run() {
    if (s_.empty()) fail("empty function spec");
    FuncExpr f = spec();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::parse_error,
                msg + " at byte " + std::to_string(pos_) + " in \"" + std::string(s_) + "\"",
                static_cast<std::int64_t>(pos_));
  }

  bool eat(std::string_view tok) {
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  bool at_number() const {
    if (pos_ >= s_.size()) return false;
    const char c = s_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
  }

  double number() {
    const std::size_t start = pos_;
    std::size_t p = pos_;
    auto digits = [&] {
      const std::size_t d0 = p;
      while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
      return p - d0;
    };
    if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
    std::size_t n = digits();
    if (p < s_.size() && s_[p] == '.') {
      ++p;
      n += digits();
    }
    if (n == 0) fail("expected a number");
    if (p < s_.size() && (s_[p] == 'e' || s_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) ++q;
      if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
        p = q;
        digits();
      }
    }
    const std::string text(s_.substr(start, p - start));
    pos_ = p;
    const double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    return v;
  }

  FuncExpr spec() {
    double scale = 1.0;
    bool scaled_prefix = false;
    if (at_number()) {
      scale = number();
      expect("*");
      scaled_prefix = true;
      if (!(scale > 0.0)) {
        throw Error(ErrorKind::range_error, "scale prefix must be positive");
      }
    }
    FuncExpr f = term();
    if (scaled_prefix) f = scaled(std::move(f), scale);
    return f;
  }

  FuncExpr term() {
    const std::size_t start = pos_;
    if (eat("id^")) {
      const double alpha = number();
      if (alpha < 0.0) {
        pos_ = start;
        throw Error(ErrorKind::range_error, "power exponent must be >= 0", static_cast<std::int64_t>(start));
      }
      if (alpha < 1.0 && warnings_) {
        warnings_->push_back("power exponent " + format_shortest(alpha) + " below 1");
      }
      std::vector<LogFactor> factors;
      const std::size_t op = pos_;
      const bool mul = eat("*leta[");
      const bool div = !mul && eat("/leta[");
      if (mul || div) {
        unsigned depth = 0;
        if (!eat("]")) {
          do {
            const std::size_t at = pos_;
            const double e = number();
            if (!(std::fabs(e) <= 1.0)) {
              throw Error(ErrorKind::range_error,
                          "log exponent " + format_shortest(e) + " outside [-1, 1]",
                          static_cast<std::int64_t>(at));
            }
            factors.push_back({depth++, div ? -e : e});
          } while (eat(","));
          expect("]");
        }
      } else {
        pos_ = op;
      }
      if (eat("*table:")) {
        FuncExpr t = table();
        if (!factors.empty()) fail("log factors cannot be combined with a table");
        return multiply_power_log(std::move(t), alpha, {});
      }
      return power_log(alpha, std::move(factors), base_);
    }
    if (eat("table:")) return table();
    if (eat("step:")) {
      const double a = number();
      expect(",");
      const double b = number();
      return step(a, b);
    }
    if (eat("trunc(")) {
      ++nesting_;
      FuncExpr inner = spec();
      expect(")");
      --nesting_;
      return truncate(inner);
    }
    if (eat("fold(")) {
      ++nesting_;
      FuncExpr inner = spec();
      expect(",");
      const double c = number();
      expect(")");
      --nesting_;
      return circle_fold(inner, c);
    }
    fail("unknown function term");
  }

  FuncExpr table() {
    const std::size_t start = pos_;
    std::size_t end = start;
    while (end < s_.size() && !(nesting_ > 0 && (s_[end] == ')' || s_[end] == ','))) ++end;
    if (end == start) fail("missing table path");
    const std::string path(s_.substr(start, end - start));
    pos_ = end;
    FuncExpr t = geometric_table(read_table_file(path));
    t.table_source = path;
    t.log_base = base_;
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int nesting_ = 0;
  double base_;
  std::vector<std::string>* warnings_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::int64_t parse_index(std::string_view s, std::string_view whole) {
  s = trim(s);
  if (s.empty()) throw Error(ErrorKind::parse_error, "empty index in \"" + std::string(whole) + "\"");
  std::int64_t v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c)) || v > (std::int64_t{1} << 40)) {
      throw Error(ErrorKind::parse_error, "bad index \"" + std::string(s) + "\" in \"" + std::string(whole) + "\"");
    }
    v = v * 10 + (c - '0');
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (true) {
    const std::size_t q = s.find(sep, p);
    out.push_back(s.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
    if (q == std::string_view::npos) break;
    p = q + 1;
  }
  return out;
}

std::set<std::int64_t> index_list(std::string_view s, std::string_view whole) {
  std::set<std::int64_t> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) out.insert(parse_index(part, whole));
  return out;
}

std::string render_factors(const FuncExpr& f) {
  if (f.factors.empty()) return {};
  bool all_negative = true;
  for (const auto& lf : f.factors) all_negative = all_negative && lf.exponent < 0.0;
  std::vector<double> e(f.factors.back().depth + 1, 0.0);
  for (const auto& lf : f.factors) e[lf.depth] = all_negative ? -lf.exponent : lf.exponent;
  std::string s = all_negative ? "/leta[" : "*leta[";
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i) s += ',';
    s += format_shortest(e[i]);
  }
  return s + "]";
}

}  // namespace

FuncExpr parse_func_spec(std::string_view s, double log_base, std::vector<std::string>* warnings) {
  return Parser(trim(s), log_base, warnings).run();
}

std::string render_func_spec(const FuncExpr& f) {
  std::string prefix = f.scale != 1.0 ? format_shortest(f.scale) + "*" : "";
  switch (f.kind) {
    case FuncKind::power_log:
      return prefix + "id^" + format_shortest(f.alpha) + render_factors(f);
    case FuncKind::tabulated: {
      const std::string src = f.table_source.empty() || f.layout != TableLayout::geometric ||
                                      !f.factors.empty()
                                  ? "<inline>"
                                  : f.table_source;
      if (f.alpha != 0.0) return prefix + "id^" + format_shortest(f.alpha) + "*table:" + src;
      return prefix + "table:" + src;
    }
    case FuncKind::step:
      return prefix + "step:" + format_shortest(f.step_lo) + "," + format_shortest(f.step_hi);
    case FuncKind::truncated:
      return prefix + "trunc(" + render_func_spec(*f.inner) + ")";
    case FuncKind::circle_fold:
      return prefix + "fold(" + render_func_spec(*f.inner) + "," + format_shortest(f.fold_scale) + ")";
  }
  return "?";
}

std::vector<double> read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open table file " + path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls{std::string(t)};
    long long n = -1;
    double v = 0.0;
    std::string extra;
    if (!(ls >> n >> v) || (ls >> extra)) {
      throw Error(ErrorKind::parse_error, path + ":" + std::to_string(line_no) + ": expected \"n value\"", line_no);
    }
    if (n != static_cast<long long>(values.size())) {
      throw Error(ErrorKind::parse_error,
                  path + ":" + std::to_string(line_no) + ": levels must be consecutive from 0", line_no);
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorKind::parse_error, path + ": no table rows");
  return values;
}

SubsetSpec parse_subset(std::string_view s) {
  const std::string_view t = trim(s);
  if (t == "empty") return SubsetSpec::empty_set();
  if (t == "all" || t == "omega") return SubsetSpec::everything();
  if (t == "evens") return SubsetSpec::evens();
  if (t == "odds") return SubsetSpec::odds();
  if (t.substr(0, 7) == "finite:") return SubsetSpec::finite_set(index_list(t.substr(7), t));
  if (t.substr(0, 9) == "periodic:") {
    const auto parts = split(t.substr(9), ':');
    if (parts.size() != 2 && parts.size() != 4) {
      throw Error(ErrorKind::parse_error, "periodic set needs p:r,... or p:r,...:start:k,...");
    }
    SubsetSpec out;
    out.kind = SubsetSpec::Kind::periodic;
    out.period = parse_index(parts[0], t);
    if (out.period < 1) throw Error(ErrorKind::range_error, "period must be >= 1");
    out.residues = index_list(parts[1], t);
    for (auto r : out.residues) {
      if (r >= out.period) throw Error(ErrorKind::range_error, "residue must be below the period");
    }
    if (parts.size() == 4) {
      out.start = parse_index(parts[2], t);
      if (out.start % out.period != 0) {
        throw Error(ErrorKind::range_error, "periodic start must be a multiple of the period");
      }
      out.elements = index_list(parts[3], t);
      for (auto e : out.elements) {
        if (e >= out.start) throw Error(ErrorKind::range_error, "prefix members must lie below start");
      }
    }
    return out;
  }
  throw Error(ErrorKind::parse_error, "unknown subset \"" + std::string(t) + "\"");
}

EtaVector parse_eta(std::string_view s) {
  std::string_view t = trim(s);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw Error(ErrorKind::parse_error, "unterminated eta vector");
    t = trim(t.substr(1, t.size() - 2));
  }
  EtaVector eta;
  if (t.empty() || t == "empty") return eta;
  for (auto part : split(t, ',')) {
    const std::string p(trim(part));
    char* end = nullptr;
    const double v = std::strtod(p.c_str(), &end);
    if (p.empty() || *end != '\0' || !std::isfinite(v)) {
      throw Error(ErrorKind::parse_error, "bad eta entry \"" + p + "\"");
    }
    if (!(std::fabs(v) <= 1.0)) throw Error(ErrorKind::range_error, "eta entries must lie in [-1, 1]");
    eta.entries.push_back(v);
  }
  return eta;
}

double parse_rational(std::string_view s) {
  const std::string t(trim(s));
  const auto slash = t.find('/');
  auto one = [&](const std::string& part) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || *end != '\0' || !std::isfinite(v)) {
      throw Error(ErrorKind::parse_error, "bad number \"" + t + "\"");
    }
    return v;
  };
  if (slash == std::string::npos) return one(t);
  const double num = one(t.substr(0, slash));
  const double den = one(t.substr(slash + 1));
  if (den == 0.0) throw Error(ErrorKind::range_error, "zero denominator in \"" + t + "\"");
  return num / den;
}

}  // namespace efrel

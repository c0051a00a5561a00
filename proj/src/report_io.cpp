#include "efrel/report_io.hpp"

#include "efrel/errors.hpp"
#include "efrel/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace efrel {

int default_precision_bits() {
  if (const char* env = std::getenv("EFREL_PRECISION_BITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 8 && v <= 60) return static_cast<int>(v);
  }
  return 50;
}

namespace {

class Json {
 public:
  std::string out;

  void key(const std::string& k) {
    comma();
    indent();
    str(k);
    out += ": ";
    fresh_ = true;
  }
  void open(char c) {
    value_prefix();
    out += c;
    ++depth_;
    first_ = true;
  }
  void close(char c) {
    --depth_;
    if (!first_) {
      out += '\n';
      indent_only();
    }
    out += c;
    first_ = false;
  }
  void num(double v) {
    value_prefix();
    out += std::isfinite(v) ? format_17g(v) : "null";
  }
  void text(const std::string& s) {
    value_prefix();
    str(s);
  }

 private:
  void comma() {
    if (!first_) out += ',';
    out += '\n';
    first_ = false;
  }
  void indent() { indent_only(); }
  void indent_only() { out.append(static_cast<std::size_t>(depth_) * 2, ' '); }
  // Array elements go on their own lines; object values follow their key.
  void value_prefix() {
    if (fresh_) {
      fresh_ = false;
      return;
    }
    if (depth_ > 0) {
      comma();
      indent();
    }
  }
  void str(const std::string& s) {
    out += '"';
    for (unsigned char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (c < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out += static_cast<char>(c);
          }
      }
    }
    out += '"';
  }

  int depth_ = 0;
  bool first_ = true;
  bool fresh_ = false;
};

void condition_json(Json& j, const ConditionReport& c) {
  j.open('{');
  j.key("name");
  j.text(c.name);
  j.key("verdict");
  j.text(to_string(c.verdict));
  j.key("constant");
  j.num(c.constant);
  j.key("witness");
  j.open('[');
  for (double w : c.witness) j.num(w);
  j.close(']');
  j.key("grid");
  j.text(c.grid);
  j.key("note");
  j.text(c.note);
  j.key("details");
  j.open('{');
  for (const auto& [k, v] : c.details) {
    j.key(k);
    j.num(v);
  }
  j.close('}');
  j.close('}');
}

}  // namespace

std::string report_json(const ScenarioReport& r, const RunConfig& config, const std::string& head_key) {
  Json j;
  j.open('{');
  j.key(head_key);
  j.text(r.scenario);
  j.key("params");
  j.open('{');
  for (const auto& [k, v] : r.params) {
    j.key(k);
    if (const double* d = std::get_if<double>(&v)) {
      j.num(*d);
    } else {
      j.text(std::get<std::string>(v));
    }
  }
  j.close('}');
  j.key("config");
  j.open('{');
  j.key("precision_bits");
  j.num(config.precision_bits);
  j.key("grid_depth");
  if (config.grid_depth) {
    j.num(*config.grid_depth);
  } else {
    j.num(NAN);
  }
  j.key("nmax");
  if (config.n_max) {
    j.num(*config.n_max);
  } else {
    j.num(NAN);
  }
  j.key("log_base");
  j.num(config.log_base);
  j.key("json_path");
  j.text(config.json_path);
  j.key("csv_path");
  j.text(config.csv_path);
  j.key("pairs_csv_path");
  j.text(config.pairs_csv_path);
  j.close('}');
  j.key("conditions");
  j.open('[');
  for (const auto& c : r.conditions) condition_json(j, c);
  j.close(']');
  j.key("embeddings");
  j.open('[');
  for (const auto& e : r.embeddings) {
    j.open('{');
    j.key("name");
    j.text(e.name);
    j.key("level");
    j.num(e.report.level);
    j.key("K_lower");
    j.num(e.report.K_lower);
    j.key("K_upper");
    j.num(e.report.K_upper);
    j.key("pair_count");
    j.num(static_cast<double>(e.report.pair_count));
    j.key("adjacent_residual");
    j.num(e.report.adjacent_max_residual ? *e.report.adjacent_max_residual : NAN);
    j.close('}');
  }
  j.close(']');
  j.key("verdict");
  j.text(r.verdict);
  j.key("runtime_ms");
  j.num(config.timing ? r.runtime_ms : 0.0);
  j.close('}');
  j.out += '\n';
  return j.out;
}

std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string s = "n,mu,phi,sigma\n";
  for (const auto& r : rows) {
    s += std::to_string(r.n) + "," + format_17g(r.mu) + "," + format_17g(r.phi) + "," +
         format_17g(r.sigma) + "\n";
  }
  return s;
}

std::string pairs_csv(const std::vector<PairRatio>& pairs, std::uint64_t grid_size) {
  std::string s = "i,j,distance,ratio\n";
  for (const auto& p : pairs) {
    const double d = static_cast<double>(p.j - p.i) / static_cast<double>(grid_size);
    s += std::to_string(p.i) + "," + std::to_string(p.j) + "," + format_17g(d) + "," +
         format_17g(p.ratio) + "\n";
  }
  return s;
}

std::string kappa_text(const KappaProfile& k) {
  std::string s = "# n kappa residual (" + std::string(to_string(k.source)) + ")\n";
  for (std::size_t n = 0; n < k.values.size(); ++n) {
    const double res = n < k.residuals.size() ? k.residuals[n] : 0.0;
    s += std::to_string(n) + " " + format_17g(k.values[n]) + " " + format_17g(res) + "\n";
  }
  return s;
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorKind::io_error, "cannot write to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_error, "cannot open " + path + " for writing");
  out << content;
  if (!out) throw Error(ErrorKind::io_error, "write failed for " + path);
}

}  // namespace efrel

#pragma once

#include "efrel/conditions.hpp"
#include "efrel/embeddings.hpp"
#include "efrel/scenarios.hpp"

#include <optional>
#include <string>
#include <vector>

namespace efrel {

struct RunConfig {
  int precision_bits = 50;
  std::optional<unsigned> grid_depth;
  std::optional<int> n_max;
  double log_base = std::numbers::e;
  std::string json_path;  // "" = none, "-" = stdout
  std::string csv_path;
  std::string pairs_csv_path;
  int threads = 1;  // not recorded: reports must not depend on it
  bool timing = false;
};

// Precision default: EFREL_PRECISION_BITS if set and valid, else 50.
int default_precision_bits();

// Report JSON: head_key ("scenario" or "command") first, then params,
// config, conditions, embeddings, verdict, runtime_ms. Floats at %.17g,
// non-finite as null.
std::string report_json(const ScenarioReport& r, const RunConfig& config,
                        const std::string& head_key = "scenario");

std::string series_csv(const std::vector<SeriesRow>& rows);
// One row per pair: grid distance (j - i)/N and the measured ratio.
std::string pairs_csv(const std::vector<PairRatio>& pairs, std::uint64_t grid_size);
std::string kappa_text(const KappaProfile& k);

// "-" writes to stdout.
void write_text(const std::string& path, const std::string& content);

}  // namespace efrel

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "harness.hpp"

namespace specbench {

inline constexpr int kResultsSchemaVersion = 1;
inline constexpr int kReportDataSchemaVersion = 1;

struct PhaseFractions {
  double draft = 0.0;
  double decode = 0.0;
  double verify = 0.0;
  double update = 0.0;

  double sum() const { return draft + decode + verify + update; }
  friend bool operator==(const PhaseFractions&, const PhaseFractions&) = default;
};

/// Normalised phase shares; an all-zero input splits evenly.
PhaseFractions phase_fractions(const PhaseTimes& t);

struct MatchLenBin {
  std::size_t steps = 0;
  std::size_t accepted = 0;

  double mean_accepted() const { return steps == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(steps); }
  friend bool operator==(const MatchLenBin&, const MatchLenBin&) = default;
};

/// One (dataset, method, temperature, turn) cell. turn is empty for the
/// all-turns aggregate.
struct MetricsRow {
  std::string dataset;
  Method method = Method::kNone;
  double temperature = 0.0;
  std::optional<std::size_t> turn;
  std::size_t steps = 0;
  std::size_t tokens = 0;
  double mat = 0.0;
  double speedup = 0.0;
  std::int64_t wall_time = 0;
  std::int64_t baseline_wall_time = 0;
  PhaseFractions phases;
  std::map<std::size_t, MatchLenBin> histogram;  // keyed by match_len

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct RunMetrics {
  std::vector<MetricsRow> rows;

  const MetricsRow* find(const std::string& dataset, Method m, double temperature,
                         std::optional<std::size_t> turn) const;
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// MAT, speedup against the matching baseline run, phase fractions (warmup
/// steps excluded) and the match-length histogram. Autoregressive runs are
/// their own baseline. Throws MissingBaseline.
RunMetrics compute_metrics(const std::vector<RunRecord>& runs);

struct ResultsDocument {
  int schema_version = kResultsSchemaVersion;
  std::vector<RunRecord> runs;

  friend bool operator==(const ResultsDocument&, const ResultsDocument&) = default;
};

/// Writes <dir>/traces.jsonl (one trajectory per line) and <dir>/summary.json
/// (run metadata, selections and metrics when computable).
void persist_results(const ResultsDocument& doc, const std::filesystem::path& dir);
ResultsDocument load_results(const std::filesystem::path& dir);
/// Concatenates runs; run ids must stay unique.
ResultsDocument merge_results(const std::vector<ResultsDocument>& docs);

/// JSON consumed by the report component (docs/results-schema.md).
std::string report_data_json(const RunMetrics& metrics);
RunMetrics report_data_from_json(const std::string& text);

}  // namespace specbench

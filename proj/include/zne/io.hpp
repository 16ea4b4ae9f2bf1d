#pragma once

#include "zne/stats.hpp"

#include <string>
#include <vector>

namespace zne {

/// Dataset files are JSON Lines: one record per line with keys id,
/// curve_id, backend, lambdas, expectations, ideal, repetition, shots, meta.
/// Reading validates each line (types, finiteness, lambdas >= 1 and
/// distinct, expectations and ideal within [-1, 1]) and reports failures as
/// DataError carrying the 1-based line number. Writing emits keys in fixed
/// order with shortest round-trip number formatting, so write-then-read is
/// the identity and equal inputs produce byte-equal files.
std::vector<ExperimentRecord> read_dataset(const std::string& path);
void write_dataset(const std::string& path,
                   const std::vector<ExperimentRecord>& records);

std::string record_to_json(const ExperimentRecord& record);
ExperimentRecord record_from_json(const std::string& text);

/// Result files are JSON Lines with keys record_id, spec, family, bounded,
/// lambda_set, backend, width, ideal, status, zne, sse, starts_used (zne
/// and sse omitted when absent).
void write_results(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results(const std::string& path);

std::string result_row_to_json(const ResultRow& row);

/// Single-fit JSON object for the command line: spec, status, zne, sse,
/// params, sign (unbounded PolyExp only), starts_used and solver settings.
std::string fit_result_to_json(const FitResult& result);

/// Tab-separated summary, one line per group. Coverage cells use
/// two-decimal percentages; error cells use "mean ± sd" with two
/// significant digits in scientific notation ("2.5E-1 ± 2.2E-1"); absent
/// values render as "-".
void write_summary(const std::string& path,
                   const std::vector<PairedGroupSummary>& groups);

/// Improvement vectors per group, as JSON Lines; consumed by the report
/// stage. Conventionally stored next to the summary as "<summary>.deltas".
struct DeltaGroup {
  GroupKey key;
  std::vector<double> deltas;
};

void write_deltas(const std::string& path,
                  const std::vector<PairedGroupSummary>& groups);
std::vector<DeltaGroup> read_deltas(const std::string& path);

}  // namespace zne

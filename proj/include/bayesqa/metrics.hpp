#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bayesqa/dataset.hpp"

namespace bayesqa::metrics {

struct PredictionRecord {
  std::string id;
  std::optional<double> value;  // empty: invalid answer
  std::string reason;           // why the answer is invalid

  bool valid() const noexcept { return value.has_value(); }
};

/// |p̂ - p| <= max(1e-4 * max(p, p̂), 1e-9).
bool is_correct(double gold, double predicted);

struct Metrics {
  std::size_t count = 0;
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::size_t errors = 0;
  double pct_correct = 0.0;
  double pct_wrong = 0.0;
  double pct_error = 0.0;
  double rmse_50 = 0.0;
  std::optional<double> rmse_nonerror;  // empty when no prediction is valid
};

struct MetricsReport {
  Metrics overall;
  std::map<std::string, Metrics> by_type;     // primary reasoning type or "none"
  std::map<std::string, Metrics> by_network;
  std::map<std::string, Metrics> by_premises;  // premise-count bucket label
};

struct ScoreOptions {
  // Ascending bucket edges over the per-network premise count. Empty: one
  // bucket per distinct count.
  std::vector<std::size_t> premise_edges;
  // Score instances without a prediction as invalid instead of rejecting.
  bool missing_as_invalid = true;
};

/// Throws DuplicatePrediction, UnknownInstance, InvalidProbability, and
/// InvalidArgument for a missing prediction when `missing_as_invalid` is off.
MetricsReport score(std::span<const DatasetInstance> instances, std::span<const PredictionRecord> predictions,
                    const ScoreOptions& options = {});

std::vector<PredictionRecord> baseline_fifty(std::span<const DatasetInstance> instances);

/// One record per line: {"id": ..., "value": p} or {"id": ..., "error": reason}.
std::string predictions_to_jsonl(std::span<const PredictionRecord> predictions);
std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text);

std::string bucket_label(std::size_t premise_count, std::span<const std::size_t> edges);

}  // namespace bayesqa::metrics

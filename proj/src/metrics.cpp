#include "bayesqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "bayesqa/error.hpp"

namespace bayesqa::metrics {

bool is_correct(double gold, double predicted) {
  return std::abs(predicted - gold) <= std::max(1e-4 * std::max(gold, predicted), 1e-9);
}

namespace {

struct Accumulator {
  std::size_t count = 0, correct = 0, wrong = 0, errors = 0;
  double sq_50 = 0.0;     // squared residuals with 0.5 for invalid answers
  double sq_valid = 0.0;  // squared residuals of valid answers only

  void add(double gold, const PredictionRecord& p) {
    ++count;
    if (p.valid()) {
      const double r = *p.value - gold;
      sq_50 += r * r;
      sq_valid += r * r;
      ++(is_correct(gold, *p.value) ? correct : wrong);
    } else {
      sq_50 += (0.5 - gold) * (0.5 - gold);
      ++errors;
    }
  }

  Metrics finish() const {
    Metrics m;
    m.count = count;
    m.correct = correct;
    m.wrong = wrong;
    m.errors = errors;
    if (count == 0) return m;
    const double n = static_cast<double>(count);
    m.pct_correct = 100.0 * static_cast<double>(correct) / n;
    m.pct_wrong = 100.0 * static_cast<double>(wrong) / n;
    m.pct_error = 100.0 * static_cast<double>(errors) / n;
    m.rmse_50 = std::sqrt(sq_50 / n);
    const std::size_t valid = correct + wrong;
    if (valid > 0) m.rmse_nonerror = std::sqrt(sq_valid / static_cast<double>(valid));
    return m;
  }
};

}  // namespace

std::string bucket_label(std::size_t premise_count, std::span<const std::size_t> edges) {
  if (edges.empty()) return std::to_string(premise_count);
  if (premise_count < edges.front()) return fmt::format("<{}", edges.front());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (premise_count < edges[i + 1]) return fmt::format("{}-{}", edges[i], edges[i + 1] - 1);
  }
  return fmt::format(">={}", edges.back());
}

MetricsReport score(std::span<const DatasetInstance> instances, std::span<const PredictionRecord> predictions,
                    const ScoreOptions& options) {
  if (!std::is_sorted(options.premise_edges.begin(), options.premise_edges.end()) ||
      std::adjacent_find(options.premise_edges.begin(), options.premise_edges.end()) != options.premise_edges.end()) {
    throw Error(ErrorKind::InvalidArgument, "premise bucket edges must be strictly increasing");
  }
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < instances.size(); ++i) position.emplace(instances[i].id, i);

  std::vector<const PredictionRecord*> matched(instances.size(), nullptr);
  for (const auto& p : predictions) {
    const auto it = position.find(p.id);
    if (it == position.end()) throw Error(ErrorKind::UnknownInstance, fmt::format("prediction for unknown instance '{}'", p.id));
    if (matched[it->second]) throw Error(ErrorKind::DuplicatePrediction, fmt::format("instance '{}' is predicted twice", p.id));
    if (p.valid() && !(*p.value >= 0.0 && *p.value <= 1.0)) {
      throw Error(ErrorKind::InvalidProbability, fmt::format("prediction {} for '{}' is not a probability", *p.value, p.id));
    }
    matched[it->second] = &p;
  }

  Accumulator overall;
  std::map<std::string, Accumulator> by_type, by_network, by_premises;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const DatasetInstance& inst = instances[i];
    PredictionRecord missing{inst.id, std::nullopt, "missing"};
    if (!matched[i] && !options.missing_as_invalid) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("no prediction for instance '{}'", inst.id));
    }
    const PredictionRecord& p = matched[i] ? *matched[i] : missing;
    const double gold = inst.qe.gold;
    overall.add(gold, p);
    by_type[inst.qe.labels.primary ? std::string(to_string(*inst.qe.labels.primary)) : "none"].add(gold, p);
    by_network[inst.network_id].add(gold, p);
    by_premises[bucket_label(inst.network_premise_count, options.premise_edges)].add(gold, p);
  }

  MetricsReport report;
  report.overall = overall.finish();
  for (const auto& [k, a] : by_type) report.by_type[k] = a.finish();
  for (const auto& [k, a] : by_network) report.by_network[k] = a.finish();
  for (const auto& [k, a] : by_premises) report.by_premises[k] = a.finish();
  return report;
}

std::vector<PredictionRecord> baseline_fifty(std::span<const DatasetInstance> instances) {
  std::vector<PredictionRecord> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back({inst.id, 0.5, {}});
  return out;
}

std::string predictions_to_jsonl(std::span<const PredictionRecord> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    if (p.valid()) j["value"] = *p.value;
    else j["error"] = p.reason;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PredictionRecord p;
      p.id = j.at("id").get<std::string>();
      if (j.contains("value") && !j.at("value").is_null()) {
        p.value = j.at("value").get<double>();
      } else if (j.contains("error")) {
        p.reason = j.at("error").is_string() ? j.at("error").get<std::string>() : j.at("error").dump();
      } else {
        throw Error(ErrorKind::ParseError, "record has neither 'value' nor 'error'");
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, fmt::format("predictions line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, fmt::format("predictions line {}: {}", line_no, e.detail()));
    }
  }
  return out;
}

}  // namespace bayesqa::metrics

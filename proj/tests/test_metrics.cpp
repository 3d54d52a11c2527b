#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bayesqa/error.hpp"
#include "bayesqa/metrics.hpp"

using namespace bayesqa;
using namespace bayesqa::metrics;

namespace {

DatasetInstance instance(std::string id, double gold, std::string network = "net", std::size_t premises = 5,
                         std::optional<ReasoningType> type = std::nullopt) {
  DatasetInstance inst;
  inst.id = std::move(id);
  inst.network_id = std::move(network);
  inst.network_premise_count = premises;
  inst.qe.gold = gold;
  inst.qe.labels.primary = type;
  if (type) inst.qe.labels.types = {*type};
  return inst;
}

PredictionRecord value(std::string id, double v) { return {std::move(id), v, {}}; }
PredictionRecord invalid(std::string id) { return {std::move(id), std::nullopt, "no number"}; }

}  // namespace

TEST(Correct, RelativeTolerance) {
  EXPECT_TRUE(is_correct(0.011316399, 0.0113164));
  EXPECT_TRUE(is_correct(0.5, 0.5));
  EXPECT_FALSE(is_correct(0.5, 0.51));
  EXPECT_TRUE(is_correct(0.0, 5e-10));
  EXPECT_FALSE(is_correct(0.0, 1e-8));
}

TEST(Score, HandExample) {
  const std::vector<DatasetInstance> data{instance("a", 0.1), instance("b", 0.5)};
  const std::vector<PredictionRecord> preds{value("a", 0.2), invalid("b")};
  const auto r = score(data, preds).overall;
  EXPECT_NEAR(r.pct_correct, 0.0, 1e-12);
  EXPECT_NEAR(r.pct_wrong, 50.0, 1e-12);
  EXPECT_NEAR(r.pct_error, 50.0, 1e-12);
  EXPECT_NEAR(r.rmse_50, 0.0707107, 1e-6);
  ASSERT_TRUE(r.rmse_nonerror.has_value());
  EXPECT_NEAR(*r.rmse_nonerror, 0.1, 1e-12);
}

TEST(Score, PerfectAndNoErrorRuns) {
  const std::vector<DatasetInstance> data{instance("a", 0.1), instance("b", 0.7), instance("c", 0.0)};
  const std::vector<PredictionRecord> exact{value("a", 0.1), value("b", 0.7), value("c", 0.0)};
  const auto r = score(data, exact).overall;
  EXPECT_EQ(r.pct_correct, 100.0);
  EXPECT_EQ(r.rmse_50, 0.0);
  EXPECT_EQ(*r.rmse_nonerror, 0.0);

  const std::vector<PredictionRecord> off{value("a", 0.2), value("b", 0.6), value("c", 0.3)};
  const auto s = score(data, off).overall;
  EXPECT_EQ(s.rmse_50, *s.rmse_nonerror);
  EXPECT_NEAR(s.pct_correct + s.pct_wrong + s.pct_error, 100.0, 1e-9);
}

TEST(Score, AllInvalid) {
  const std::vector<DatasetInstance> data{instance("a", 0.1)};
  const auto r = score(data, std::vector<PredictionRecord>{invalid("a")}).overall;
  EXPECT_EQ(r.pct_error, 100.0);
  EXPECT_FALSE(r.rmse_nonerror.has_value());
  EXPECT_NEAR(r.rmse_50, 0.4, 1e-12);
}

TEST(Score, MissingCountsAsInvalid) {
  const std::vector<DatasetInstance> data{instance("a", 0.1), instance("b", 0.5)};
  const auto r = score(data, std::vector<PredictionRecord>{value("a", 0.1)}).overall;
  EXPECT_EQ(r.errors, 1u);
  ScoreOptions strict;
  strict.missing_as_invalid = false;
  EXPECT_THROW(score(data, std::vector<PredictionRecord>{value("a", 0.1)}, strict), Error);
}

TEST(Score, Errors) {
  const std::vector<DatasetInstance> data{instance("a", 0.1)};
  try {
    score(data, std::vector<PredictionRecord>{value("a", 0.1), value("a", 0.2)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicatePrediction);
  }
  try {
    score(data, std::vector<PredictionRecord>{value("z", 0.1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownInstance);
  }
  EXPECT_THROW(score(data, std::vector<PredictionRecord>{value("a", 1.5)}), Error);
}

TEST(Score, PermutationInvariantAndGroupsAggregate) {
  std::vector<DatasetInstance> data;
  std::vector<PredictionRecord> preds;
  const std::optional<ReasoningType> types[] = {ReasoningType::Causal, ReasoningType::Evidential,
                                                ReasoningType::ExplainingAway, std::nullopt};
  for (int i = 0; i < 40; ++i) {
    const std::string id = "i" + std::to_string(i);
    data.push_back(instance(id, (i % 11) / 10.0, i % 3 ? "n1" : "n2", 5 + 7 * (i % 4), types[i % 4]));
    if (i % 5 == 0) preds.push_back(invalid(id));
    else preds.push_back(value(id, ((i * 7) % 11) / 10.0));
  }
  const auto r = score(data, preds);
  auto reversed = data;
  std::reverse(reversed.begin(), reversed.end());
  const auto r2 = score(reversed, preds);
  EXPECT_DOUBLE_EQ(r.overall.rmse_50, r2.overall.rmse_50);
  EXPECT_EQ(r.overall.correct, r2.overall.correct);

  for (const auto* groups : {&r.by_type, &r.by_network, &r.by_premises}) {
    double weighted = 0.0;
    std::size_t n = 0;
    for (const auto& [k, m] : *groups) {
      weighted += static_cast<double>(m.count) * m.rmse_50 * m.rmse_50;
      n += m.count;
    }
    EXPECT_EQ(n, data.size());
    EXPECT_NEAR(weighted / static_cast<double>(n), r.overall.rmse_50 * r.overall.rmse_50, 1e-12);
  }
  EXPECT_EQ(r.by_type.size(), 4u);
  EXPECT_TRUE(r.by_type.count("none"));
  EXPECT_EQ(r.by_premises.size(), 4u);

  ScoreOptions buckets;
  buckets.premise_edges = {10, 20};
  const auto b = score(data, preds, buckets);
  EXPECT_EQ(b.by_premises.size(), 3u);
  EXPECT_TRUE(b.by_premises.count("<10"));
  EXPECT_TRUE(b.by_premises.count("10-19"));
  EXPECT_TRUE(b.by_premises.count(">=20"));
}

TEST(Baseline, Fifty) {
  const std::vector<DatasetInstance> half{instance("a", 0.5), instance("b", 0.5)};
  EXPECT_EQ(score(half, baseline_fifty(half)).overall.pct_correct, 100.0);
  const std::vector<DatasetInstance> ends{instance("a", 0.0), instance("b", 1.0)};
  const auto r = score(ends, baseline_fifty(ends)).overall;
  EXPECT_NEAR(r.rmse_50, 0.5, 1e-15);
  EXPECT_EQ(r.pct_error, 0.0);
}

TEST(PredictionFile, RoundTrip) {
  const std::vector<PredictionRecord> preds{value("a", 0.25), invalid("b")};
  const auto back = predictions_from_jsonl(predictions_to_jsonl(preds));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(*back[0].value, 0.25);
  EXPECT_FALSE(back[1].valid());
  EXPECT_EQ(back[1].reason, "no number");
  EXPECT_THROW(predictions_from_jsonl("{\"id\":\"x\"}\n"), Error);
}

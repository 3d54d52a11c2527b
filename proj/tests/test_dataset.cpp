#include <gtest/gtest.h>

#include <omp.h>

#include "bayesqa/dataset.hpp"
#include "bayesqa/error.hpp"
#include "bayesqa/problog.hpp"
#include "support.hpp"

using namespace bayesqa;
using bayesqa::testing::gallstone;

TEST(Premises, GallstoneNumeric) {
  Rng rng(1);
  const auto premises = template_premises(gallstone(), PremiseKind::Numeric, rng);
  ASSERT_EQ(premises.size(), 5u);
  EXPECT_EQ(premises[0].text, "Gallstones is yes with probability 15.31% and no with probability 84.69%.");
  EXPECT_EQ(premises[1].text,
            "If gallstones is yes, then amylase level is 0-299 with probability 93.46%, 300-499 with probability "
            "4.67% and 500-1400 with probability 1.87%.");
  EXPECT_EQ(premises[4].text,
            "If gallstones is no, then flatulence is yes with probability 43.07% and no with probability 56.93%.");
  // Numeric premises draw nothing.
  Rng fresh(1);
  EXPECT_EQ(rng.next_u64(), fresh.next_u64());
}

TEST(Premises, ClauseRefsFollowProgram) {
  Rng rng(2);
  const auto net = gallstone();
  const auto program = problog::bn_to_problog(net);
  for (auto kind : {PremiseKind::Numeric, PremiseKind::Wep}) {
    const auto premises = template_premises(net, kind, rng);
    ASSERT_EQ(premises.size(), program.clauses.size());
    for (std::size_t i = 0; i < premises.size(); ++i) {
      EXPECT_EQ(premises[i].clause_ref, i);
      EXPECT_EQ(program.clauses[i].heads[0].atom.predicate, problog::predicate_for(premises[i].variable));
    }
  }
}

TEST(Premises, RootAndUniformRows) {
  Rng rng(3);
  const BayesianNetwork root({"r", ""}, {{"rain", "rain", {"yes", "no"}}}, {{"rain", {}, {{{}, {0.7, 0.3}}}}});
  const auto p = template_premises(root, PremiseKind::Numeric, rng);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].text.find("If"), std::string::npos);
  EXPECT_EQ(p[0].text, "Rain is yes with probability 70% and no with probability 30%.");

  const BayesianNetwork flat({"u", ""}, {{"die", "die", {"a", "b", "c", "d"}}},
                             {{"die", {}, {{{}, {0.25, 0.25, 0.25, 0.25}}}}});
  const auto w = template_premises(flat, PremiseKind::Wep, rng);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].text, "All values of die (a, b, c, d) are equally likely.");
}

TEST(Premises, WepArgmaxNote) {
  Rng rng(4);
  const BayesianNetwork net({"m", ""}, {{"x", "x", {"a", "b", "c", "d"}}}, {{"x", {}, {{{}, {0.2, 0.2, 0.3, 0.3}}}}});
  const auto w = template_premises(net, PremiseKind::Wep, rng, wep::WepOptions{0.0});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].text.find("The most likely value of x is c or d."), std::string::npos) << w[0].text;
  EXPECT_NE(w[0].text.find("It is "), std::string::npos);
}

TEST(Sampling, FindsGallstoneQuery) {
  const TabularNetwork net(gallstone());
  bool found = false;
  for (std::uint64_t i = 0; i < 5000 && !found; ++i) {
    Rng rng = Rng::stream(0, i);
    const QePair qe = sample_qe(net, rng);
    if (qe.evidence.size() == 1 && qe.evidence.binds("flatulence") && qe.evidence.bindings.at("flatulence") == "yes" &&
        qe.query == std::pair<std::string, std::string>{"amylase", "500-1400"}) {
      found = true;
      EXPECT_NEAR(qe.gold, 0.011316399, 1e-6);
      EXPECT_EQ(qe.question_text, "What is the likelihood of amylase level having the value 500-1400?");
      EXPECT_EQ(qe.evidence_texts, std::vector<std::string>{"Flatulence is yes."});
      EXPECT_EQ(qe.labels.types, std::vector<ReasoningType>{});
    }
  }
  EXPECT_TRUE(found);
}

TEST(Sampling, TwoVariablesMeansOneObservation) {
  const BayesianNetwork net({"two", ""}, {{"a", "a", {"t", "f"}}, {"b", "b", {"t", "f"}}},
                            {{"a", {}, {{{}, {0.4, 0.6}}}}, {"b", {"a"}, {{{"t"}, {0.1, 0.9}}, {{"f"}, {0.7, 0.3}}}}});
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const QePair qe = sample_qe(net, rng);
    EXPECT_EQ(qe.evidence.size(), 1u);
    EXPECT_FALSE(qe.evidence.binds(qe.query.first));
  }
}

TEST(Sampling, NeverEmitsZeroProbabilityEvidence) {
  const BayesianNetwork net({"z", ""}, {{"a", "a", {"a0", "a1"}}, {"b", "b", {"b0", "b1"}}, {"c", "c", {"c0", "c1"}}},
                            {{"a", {}, {{{}, {0.5, 0.5}}}},
                             {"b", {"a"}, {{{"a0"}, {1.0, 0.0}}, {{"a1"}, {0.5, 0.5}}}},
                             {"c", {}, {{{}, {0.5, 0.5}}}}});
  Rng rng(6);
  int both = 0;
  for (int i = 0; i < 2000; ++i) {
    const QePair qe = sample_qe(net, rng);
    const auto& b = qe.evidence.bindings;
    EXPECT_FALSE(b.count("a") && b.count("b") && b.at("a") == "a0" && b.at("b") == "b1");
    both += b.count("a") && b.count("b");
    EXPECT_GE(qe.gold, 0.0);
    EXPECT_LE(qe.gold, 1.0);
  }
  EXPECT_GT(both, 0);
}

TEST(Sampling, Errors) {
  Rng rng(7);
  const BayesianNetwork one({"one", ""}, {{"a", "a", {"t", "f"}}}, {{"a", {}, {{{}, {0.5, 0.5}}}}});
  EXPECT_THROW(sample_qe(one, rng), Error);
  SamplingOptions none;
  none.max_evidence_retries = 0;
  try {
    sample_qe(gallstone(), rng, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsatisfiableEvidence);
  }
}

TEST(Classify, VStructurePatterns) {
  const auto net = bayesqa::testing::v_structure();
  const auto causal = classify_reasoning(net, {{"X1", "t"}}, "X3");
  EXPECT_EQ(causal.types, std::vector<ReasoningType>{ReasoningType::Causal});
  EXPECT_EQ(causal.primary, ReasoningType::Causal);

  const auto evidential = classify_reasoning(net, {{"X3", "t"}}, "X1");
  EXPECT_EQ(evidential.types, std::vector<ReasoningType>{ReasoningType::Evidential});
  EXPECT_EQ(evidential.primary, ReasoningType::Evidential);

  const auto away = classify_reasoning(net, {{"X3", "t"}, {"X1", "t"}}, "X2");
  EXPECT_TRUE(away.has(ReasoningType::ExplainingAway));
  EXPECT_TRUE(away.has(ReasoningType::Evidential));
  EXPECT_FALSE(away.has(ReasoningType::Causal));
  EXPECT_EQ(away.primary, ReasoningType::ExplainingAway);
}

TEST(Classify, ChainEndIsUnlabeled) {
  const auto labels = classify_reasoning(bayesqa::testing::chain(), {{"A", "a0"}}, "C");
  EXPECT_TRUE(labels.types.empty());
  EXPECT_FALSE(labels.primary.has_value());
}

TEST(Generate, DeterministicAcrossRunsAndThreads) {
  const auto net = gallstone();
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const std::string one = to_jsonl(generate_dataset(net, 40, 42));
  omp_set_num_threads(4);
  const std::string four = to_jsonl(generate_dataset(net, 40, 42));
  const std::string again = to_jsonl(generate_dataset(net, 40, 42));
  omp_set_num_threads(saved);
  EXPECT_EQ(one, four);
  EXPECT_EQ(four, again);
  EXPECT_NE(one, to_jsonl(generate_dataset(net, 40, 43)));
}

TEST(Generate, InstancesAreIndependentOfCount) {
  const auto net = gallstone();
  const auto small = generate_dataset(net, 3, 9);
  const auto big = generate_dataset(net, 10, 9);
  EXPECT_EQ(to_jsonl(std::span(small)), to_jsonl(std::span(big).first(3)));
}

TEST(Generate, GoldMatchesEnumeration) {
  Rng rng(8);
  for (int n = 0; n < 5; ++n) {
    bayesqa::testing::RandomNetworkOptions opts;
    opts.zero_rate = 0.0;
    const auto net = bayesqa::testing::random_network(rng, opts);
    const auto data = generate_dataset(net, 30, 100 + n);
    for (const auto& inst : data) {
      const double oracle = conditional_query(net, {{inst.qe.query.first, inst.qe.query.second}}, inst.qe.evidence).probability;
      EXPECT_NEAR(inst.qe.gold, oracle, 1e-10);
      EXPECT_EQ(inst.qe.labels, classify_reasoning(net, inst.qe.evidence, inst.qe.query.first));
    }
  }
}

TEST(Generate, SharedPremisesAndIds) {
  const auto data = generate_dataset(gallstone(), 12, 1);
  ASSERT_EQ(data.size(), 12u);
  EXPECT_EQ(data[0].id, "gallstone-00000");
  EXPECT_EQ(data[11].id, "gallstone-00011");
  EXPECT_EQ(data[0].premises.get(), data[11].premises.get());
  EXPECT_EQ(data[0].premises->size(), 10u);
  EXPECT_EQ(data[0].network_premise_count, 5u);
  EXPECT_THROW(generate_dataset(gallstone(), 0, 1), Error);
}

TEST(Generate, TextProviderRewritesEverything) {
  struct Upper : TextProvider {
    std::string rewrite(std::string_view text, Role role) const override {
      return std::string(role == Role::Premise ? "P:" : role == Role::Evidence ? "E:" : "Q:") + std::string(text);
    }
  } upper;
  GenerationOptions options;
  options.text_provider = &upper;
  const auto data = generate_dataset(gallstone(), 3, 1, options);
  EXPECT_EQ(data[0].premises->front().text.rfind("P:", 0), 0u);
  EXPECT_EQ(data[0].qe.question_text.rfind("Q:", 0), 0u);
  EXPECT_EQ(data[2].qe.evidence_texts.front().rfind("E:", 0), 0u);
}

TEST(Jsonl, RoundTrip) {
  const auto data = generate_dataset(gallstone(), 8, 3);
  const std::string text = to_jsonl(data);
  const auto back = instances_from_jsonl(text);
  ASSERT_EQ(back.size(), data.size());
  EXPECT_EQ(to_jsonl(back), text);
  EXPECT_EQ(back[0].premises.get(), back[7].premises.get());
  EXPECT_THROW(instances_from_jsonl("{not json}\n"), Error);
}

TEST(Stats, Gallstone) {
  const std::vector<BayesianNetwork> nets{gallstone()};
  const auto s = dataset_stats(nets, {});
  EXPECT_EQ(s.premises_numeric, 5u);
  EXPECT_EQ(s.premises_wep, 5u);
  EXPECT_NEAR(s.states_per_variable.mean, 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.premises_per_network.mean, 5.0, 1e-12);
}

TEST(Stats, Means) {
  const std::vector<double> one{2.0};
  EXPECT_EQ(mean_std(one).mean, 2.0);
  EXPECT_EQ(mean_std(one).stddev, 0.0);
  const std::vector<double> sizes{3.0, 13.0};
  EXPECT_EQ(mean_std(sizes).mean, 8.0);
  EXPECT_EQ(mean_std(sizes).stddev, 5.0);
}

TEST(Stats, InstanceCounts) {
  const std::vector<BayesianNetwork> nets{gallstone()};
  const auto data = generate_dataset(gallstone(), 50, 5);
  const auto s = dataset_stats(nets, data);
  EXPECT_EQ(s.instances, 50u);
  EXPECT_EQ(s.queries, 50u);
  EXPECT_EQ(s.causal + s.evidential + s.explaining_away + s.unlabeled, 50u);
  std::size_t ev = 0;
  for (const auto& d : data) ev += d.qe.evidence.size();
  EXPECT_EQ(s.evidence_statements, ev);
}

#include <gtest/gtest.h>

#include "bayesqa/error.hpp"
#include "bayesqa/inference.hpp"
#include "bayesqa/subset.hpp"
#include "support.hpp"

using namespace bayesqa;

namespace {

// Every query over `vars` with every evidence pattern on the others.
void expect_same_queries(const BayesianNetwork& full, const BayesianNetwork& part, const std::vector<std::string>& vars,
                         double tol) {
  const std::size_t n = vars.size();
  for (std::size_t qi = 0; qi < n; ++qi) {
    const auto& qv = full.variable(vars[qi]);
    for (const auto& qs : qv.states) {
      // Evidence pattern: each other variable unobserved or bound to one state.
      std::vector<std::size_t> digit(n, 0);
      for (;;) {
        Assignment ev;
        for (std::size_t i = 0; i < n; ++i) {
          if (i != qi && digit[i] > 0) ev.bindings.emplace(vars[i], full.variable(vars[i]).states[digit[i] - 1]);
        }
        const Assignment q{{qv.id, qs}};
        EXPECT_NEAR(eliminate(full, q, ev).probability, eliminate(part, q, ev).probability, tol);
        std::size_t i = n;
        while (i-- > 0) {
          if (i == qi) continue;
          if (++digit[i] <= full.variable(vars[i]).cardinality()) break;
          digit[i] = 0;
        }
        if (i == SIZE_MAX) break;
      }
    }
  }
}

}  // namespace

TEST(Subset, FiveNodeKeepsQueries) {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto full = bayesqa::testing::five_node(rng);
    const auto result = subset(full, {{"C", "D", "E"}});
    EXPECT_TRUE(result.warnings.empty());
    EXPECT_EQ(result.network.size(), 3u);
    EXPECT_TRUE(parents(result.network, "C").empty());
    const auto prior = result.network.cpt("C").rows[0].distribution;
    for (std::size_t s = 0; s < prior.size(); ++s) {
      EXPECT_NEAR(prior[s], marginal(full, {{"C", full.variable("C").states[s]}}), 1e-12);
    }
    expect_same_queries(full, result.network, {"C", "D", "E"}, 1e-10);
  }
}

TEST(Subset, KeepAllIsIdentity) {
  const auto net = bayesqa::testing::gallstone();
  const auto result = subset(net, {{"gallstones", "amylase", "flatulence"}});
  for (const auto& cpt : net.cpts()) EXPECT_EQ(result.network.cpt(cpt.variable), cpt);
}

TEST(Subset, ChainDropsRoot) {
  const auto net = bayesqa::testing::chain();
  const auto result = subset(net, {{"B", "C"}});
  EXPECT_TRUE(parents(result.network, "B").empty());
  EXPECT_NEAR(result.network.cpt("B").rows[0].distribution[0], 0.41, 1e-15);
  expect_same_queries(net, result.network, {"B", "C"}, 1e-10);
}

TEST(Subset, WarnsAboutLostDependence) {
  // A -> B, A -> C; keeping {B, C} loses their common cause.
  const BayesianNetwork net({"fork", ""}, {{"A", "A", {"t", "f"}}, {"B", "B", {"t", "f"}}, {"C", "C", {"t", "f"}}},
                            {{"A", {}, {{{}, {0.5, 0.5}}}},
                             {"B", {"A"}, {{{"t"}, {0.9, 0.1}}, {{"f"}, {0.1, 0.9}}}},
                             {"C", {"A"}, {{{"t"}, {0.8, 0.2}}, {{"f"}, {0.3, 0.7}}}}});
  const auto result = subset(net, {{"B", "C"}});
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_NE(result.warnings[0].find("'A'"), std::string::npos);
}

TEST(Subset, Errors) {
  const auto net = bayesqa::testing::gallstone();
  EXPECT_THROW(subset(net, {}), Error);
  try {
    subset(net, {{"pain"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownVariable);
  }
}

TEST(MarginalPrior, Examples) {
  const auto net = bayesqa::testing::gallstone();
  const auto f = marginal_prior(net, "flatulence");
  EXPECT_NEAR(f[0], 0.42485158, 1e-12);
  EXPECT_NEAR(f[1], 0.57514842, 1e-12);
  EXPECT_EQ(marginal_prior(net, "gallstones"), (std::vector<double>{0.1531, 0.8469}));
  const BayesianNetwork coin({"c", ""}, {{"c", "c", {"h", "t"}}}, {{"c", {}, {{{}, {0.5, 0.5}}}}});
  EXPECT_EQ(marginal_prior(coin, "c"), (std::vector<double>{0.5, 0.5}));
}

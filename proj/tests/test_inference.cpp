#include <gtest/gtest.h>

#include <omp.h>

#include "bayesqa/error.hpp"
#include "bayesqa/inference.hpp"
#include "support.hpp"

using namespace bayesqa;
using bayesqa::testing::gallstone;

namespace {

// Exact values from rational arithmetic over the gallstone CPTs.
constexpr double kJointYes = 0.001123715725;       // 0.1531 * 0.3925 * 0.0187
constexpr double kJointNo = 0.003684074283;        // 0.8469 * 0.4307 * 0.0101
constexpr double kAmylaseAndFlat = 0.004807790008;
constexpr double kFlatulence = 0.42485158;
constexpr double kAnswer = 0.011316399030456706;   // kAmylaseAndFlat / kFlatulence

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InternalConsistency;
}

}  // namespace

TEST(Joint, GallstoneProducts) {
  const auto net = gallstone();
  EXPECT_NEAR(joint_probability(net, {{"gallstones", "yes"}, {"flatulence", "yes"}, {"amylase", "500-1400"}}), kJointYes, 1e-15);
  EXPECT_NEAR(joint_probability(net, {{"gallstones", "no"}, {"flatulence", "yes"}, {"amylase", "500-1400"}}), kJointNo, 1e-15);
}

TEST(Joint, ZeroEntryGivesZero) {
  auto net = bayesqa::testing::chain();
  auto cpts = net.cpts();
  cpts[1].rows[0].distribution = {1.0, 0.0};
  const BayesianNetwork z(net.metadata(), net.variables(), cpts);
  EXPECT_EQ(joint_probability(z, {{"A", "a0"}, {"B", "b1"}, {"C", "c0"}}), 0.0);
}

TEST(Joint, Errors) {
  const auto net = gallstone();
  EXPECT_EQ(kind_of([&] { joint_probability(net, {{"gallstones", "yes"}}); }), ErrorKind::IncompleteAssignment);
  EXPECT_EQ(kind_of([&] { joint_probability(net, {{"gallstones", "maybe"}, {"flatulence", "yes"}, {"amylase", "0-299"}}); }),
            ErrorKind::UnknownState);
  EXPECT_EQ(kind_of([&] { marginal(net, {{"pain", "yes"}}); }), ErrorKind::UnknownVariable);
}

TEST(Marginal, Gallstone) {
  const auto net = gallstone();
  EXPECT_NEAR(marginal(net, {{"flatulence", "yes"}, {"amylase", "500-1400"}}), kAmylaseAndFlat, 1e-15);
  EXPECT_NEAR(marginal(net, {{"flatulence", "yes"}}), kFlatulence, 1e-15);
  EXPECT_NEAR(marginal(net, {}), 1.0, 1e-15);
}

TEST(Conditional, GallstoneAnswer) {
  const auto net = gallstone();
  const Assignment q{{"amylase", "500-1400"}}, e{{"flatulence", "yes"}};
  EXPECT_NEAR(conditional_query(net, q, e).probability, kAnswer, 1e-15);
  EXPECT_NEAR(eliminate(net, q, e).probability, kAnswer, 1e-15);
  EXPECT_EQ(conditional_query(net, q, e).method, Method::Enumeration);
  EXPECT_EQ(eliminate(net, q, e).method, Method::Elimination);
}

TEST(Conditional, ChainHandSum) {
  // P(C=c0) = (0.3*0.9 + 0.7*0.2)*0.6 + (0.3*0.1 + 0.7*0.8)*0.25 = 0.41*0.6 + 0.59*0.25 = 0.3935
  const auto net = bayesqa::testing::chain();
  EXPECT_NEAR(conditional_query(net, {{"C", "c0"}}, {}).probability, 0.3935, 1e-15);
  EXPECT_NEAR(eliminate(net, {{"C", "c0"}}, {}).probability, 0.3935, 1e-15);
}

TEST(Conditional, SingleNode) {
  const BayesianNetwork net({"one", ""}, {{"a", "a", {"t", "f"}}}, {{"a", {}, {{{}, {0.7, 0.3}}}}});
  EXPECT_DOUBLE_EQ(conditional_query(net, {{"a", "t"}}, {}).probability, 0.7);
  EXPECT_DOUBLE_EQ(eliminate(net, {{"a", "f"}}, {}).probability, 0.3);
}

TEST(Conditional, Errors) {
  auto net = bayesqa::testing::chain();
  auto cpts = net.cpts();
  cpts[1].rows[0].distribution = {1.0, 0.0};
  cpts[1].rows[1].distribution = {1.0, 0.0};
  const BayesianNetwork z(net.metadata(), net.variables(), cpts);
  EXPECT_EQ(kind_of([&] { conditional_query(z, {{"C", "c0"}}, {{"B", "b1"}}); }), ErrorKind::ZeroProbabilityEvidence);
  EXPECT_EQ(kind_of([&] { eliminate(z, {{"C", "c0"}}, {{"B", "b1"}}); }), ErrorKind::ZeroProbabilityEvidence);
  EXPECT_EQ(kind_of([&] { conditional_query(net, {{"C", "c0"}}, {{"C", "c1"}}); }), ErrorKind::OverlappingBindings);
  EXPECT_EQ(kind_of([&] { eliminate(net, {{"C", "c0"}, {"A", "a0"}}, {}); }), ErrorKind::InvalidArgument);
}

TEST(Conditional, ParseBinding) {
  EXPECT_EQ(parse_binding("amylase='500-1400'"), (std::pair<std::string, std::string>{"amylase", "500-1400"}));
  EXPECT_EQ(parse_binding("f=yes"), (std::pair<std::string, std::string>{"f", "yes"}));
  EXPECT_THROW(parse_binding("novalue"), Error);
}

TEST(Elimination, ThirteenNodesMatchesEnumeration) {
  Rng rng(13);
  bayesqa::testing::RandomNetworkOptions opts;
  opts.min_variables = opts.max_variables = 13;
  opts.max_states = 3;
  opts.zero_rate = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const TabularNetwork net(bayesqa::testing::random_network(rng, opts));
    const auto q = bayesqa::testing::random_query(net.network(), rng);
    const Assignment query{{q.query.first, q.query.second}};
    EXPECT_NEAR(eliminate(net, query, q.evidence).probability, conditional_query(net, query, q.evidence).probability, 1e-10);
  }
}

TEST(Elimination, RandomNetworksAgree) {
  Rng rng(2024);
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    const TabularNetwork net(bayesqa::testing::random_network(rng));
    const auto q = bayesqa::testing::random_query(net.network(), rng);
    const Assignment query{{q.query.first, q.query.second}};
    double ve = -1.0, en = -2.0;
    bool ve_zero = false, en_zero = false;
    try { ve = eliminate(net, query, q.evidence).probability; } catch (const Error& e) { ve_zero = e.kind() == ErrorKind::ZeroProbabilityEvidence; }
    try { en = conditional_query(net, query, q.evidence).probability; } catch (const Error& e) { en_zero = e.kind() == ErrorKind::ZeroProbabilityEvidence; }
    EXPECT_EQ(ve_zero, en_zero);
    if (!ve_zero) {
      EXPECT_NEAR(ve, en, 1e-9);
      ++compared;
    }
  }
  EXPECT_GT(compared, 250);
}

TEST(Kernels, ParallelMatchesSerialBitwise) {
  Rng rng(5);
  bayesqa::testing::RandomNetworkOptions opts;
  opts.min_variables = opts.max_variables = 11;
  const TabularNetwork net(bayesqa::testing::random_network(rng, opts));
  const auto q = bayesqa::testing::random_query(net.network(), rng);
  const Evidence ev(net, q.evidence);
  const std::size_t var = net.var_index(q.query.first);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = kernels::enumerate_masses(net, var, ev);
  const double mass_one = kernels::enumerate_mass(net, ev);
  omp_set_num_threads(4);
  const auto four = kernels::enumerate_masses(net, var, ev);
  const double mass_four = kernels::enumerate_mass(net, ev);
  omp_set_num_threads(saved);

  EXPECT_EQ(one, four);
  EXPECT_EQ(mass_one, mass_four);
  const auto serial = kernels::enumerate_masses_serial(net, var, ev);
  ASSERT_EQ(serial.size(), one.size());
  for (std::size_t s = 0; s < serial.size(); ++s) EXPECT_NEAR(serial[s], one[s], 1e-15);
  EXPECT_NEAR(kernels::enumerate_mass_serial(net, ev), mass_one, 1e-15);
  const auto ve = kernels::eliminate_masses(net, var, ev);
  for (std::size_t s = 0; s < ve.size(); ++s) EXPECT_NEAR(ve[s], one[s], 1e-15);
}

TEST(Kernels, EliminationOrderSkipsObservedAndQuery) {
  const TabularNetwork net(gallstone());
  const Evidence ev(net, {{"flatulence", "yes"}});
  const auto order = kernels::elimination_order(net, net.var_index("amylase"), ev);
  for (std::size_t v : order) EXPECT_NE(v, net.var_index("amylase"));
}

TEST(Posterior, ExclusionEvidence) {
  const TabularNetwork net(gallstone());
  Evidence ev(net);
  ev.exclude(net.var_index("flatulence"), net.state_index(net.var_index("flatulence"), "no"));
  const auto p = posterior(net, net.var_index("amylase"), ev, Method::Enumeration);
  EXPECT_NEAR(p[2], kAnswer, 1e-15);
  const auto q = posterior(net, net.var_index("amylase"), ev, Method::Elimination);
  EXPECT_NEAR(q[2], kAnswer, 1e-15);
}

TEST(Clamp, Tolerance) {
  EXPECT_EQ(clamp_probability(1.0 + 1e-14), 1.0);
  EXPECT_EQ(clamp_probability(-1e-14), 0.0);
  EXPECT_THROW(clamp_probability(1.1), Error);
}

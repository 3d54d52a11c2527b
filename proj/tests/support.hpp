#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bayesqa/inference.hpp"
#include "bayesqa/network.hpp"
#include "bayesqa/rng.hpp"

namespace bayesqa::testing {

/// The gallstone / flatulence / amylase network, built in code.
BayesianNetwork gallstone();

/// Verbatim gallstone program text.
std::string gallstone_program();

/// X1 -> X3 <- X2, binary, fixed CPTs.
BayesianNetwork v_structure();

/// A -> B -> C, binary:
/// P(A=a0)=0.3; P(B=b0|a0)=0.9, P(B=b0|a1)=0.2; P(C=c0|b0)=0.6, P(C=c0|b1)=0.25.
BayesianNetwork chain();

/// A -> C <- B, C -> D, C -> E with random CPTs and 2-3 states per variable.
BayesianNetwork five_node(Rng& rng);

struct RandomNetworkOptions {
  std::size_t min_variables = 2;
  std::size_t max_variables = 8;
  std::size_t max_states = 4;
  std::size_t max_parents = 3;
  // Chance that a CPT row gets an exact zero entry.
  double zero_rate = 0.1;
};

/// Random DAG with CPT entries on a 1e-4 grid; variables are listed in
/// random order. State names include characters that need quoting.
BayesianNetwork random_network(Rng& rng, const RandomNetworkOptions& options = {});

struct RandomQuery {
  std::pair<std::string, std::string> query;
  Assignment evidence;
};

/// Query on one variable with 0..n-1 other variables observed.
RandomQuery random_query(const BayesianNetwork& network, Rng& rng);

/// Bindings of `original` renamed to the network compiled back from its
/// program: binary variables there have states "true" / "false".
Assignment to_compiled(const BayesianNetwork& original, const Assignment& a);

}  // namespace bayesqa::testing

#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bayesqa/network.hpp"

namespace bayesqa {

struct SubsetSpec {
  std::set<std::string> keep;
};

struct SubsetResult {
  BayesianNetwork network;
  // Dependencies the subset cannot represent, e.g. a removed ancestor shared
  // by two kept variables. Empty when the subset is exact for queries over
  // the kept variables.
  std::vector<std::string> warnings;
};

/// Keeps the listed variables. Edges among kept variables keep their CPTs; a
/// kept variable that lost parents gets P(v | kept parents) computed on the
/// original network (its marginal when no parent is kept).
/// Throws UnknownVariable, InvalidArgument (empty spec), ValidationError.
SubsetResult subset(const BayesianNetwork& network, const SubsetSpec& spec);

/// [P(var = s)] over the states of var. Throws UnknownVariable.
std::vector<double> marginal_prior(const BayesianNetwork& network, std::string_view var);

}  // namespace bayesqa

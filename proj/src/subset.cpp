#include "bayesqa/subset.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "bayesqa/error.hpp"
#include "bayesqa/inference.hpp"

namespace bayesqa {

namespace {

// Removed variables reachable upwards from `v` through removed variables only,
// and the kept variables met on the way.
void removed_ancestry(const TabularNetwork& net, std::size_t v, const std::vector<bool>& kept,
                      std::set<std::size_t>& removed, std::set<std::size_t>& kept_met) {
  std::vector<std::size_t> stack;
  for (std::size_t p : net.parents(v)) {
    if (!kept[p]) stack.push_back(p);
  }
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    if (!removed.insert(u).second) continue;
    for (std::size_t p : net.parents(u)) {
      if (kept[p]) kept_met.insert(p);
      else stack.push_back(p);
    }
  }
}

// P(v | kept parents = k) when the kept assignment itself has probability zero:
// average the original rows over the marginal of the removed parents.
std::vector<double> fallback_row(const TabularNetwork& net, std::size_t v, const std::vector<std::size_t>& kept_parents,
                                 const std::vector<std::size_t>& kept_states) {
  const auto all_parents = net.parents(v);
  std::vector<std::size_t> removed;
  for (std::size_t p : all_parents) {
    if (std::find(kept_parents.begin(), kept_parents.end(), p) == kept_parents.end()) removed.push_back(p);
  }
  std::vector<double> row(net.cardinality(v), 0.0);
  std::vector<std::size_t> digit(removed.size(), 0);
  std::vector<std::uint32_t> world(net.size(), 0);
  for (std::size_t i = 0; i < kept_parents.size(); ++i) world[kept_parents[i]] = static_cast<std::uint32_t>(kept_states[i]);
  for (;;) {
    Evidence e(net);
    for (std::size_t i = 0; i < removed.size(); ++i) {
      e.bind(removed[i], digit[i]);
      world[removed[i]] = static_cast<std::uint32_t>(digit[i]);
    }
    const double weight = evidence_mass(net, e, Method::Elimination);
    for (std::size_t s = 0; s < row.size(); ++s) {
      world[v] = static_cast<std::uint32_t>(s);
      row[s] += weight * net.local_probability(v, world);
    }
    std::size_t i = digit.size();
    while (i-- > 0) {
      if (++digit[i] < net.cardinality(removed[i])) break;
      digit[i] = 0;
    }
    if (i == SIZE_MAX) break;
  }
  double total = 0.0;
  for (double p : row) total += p;
  for (double& p : row) p /= total;
  return row;
}

}  // namespace

std::vector<double> marginal_prior(const BayesianNetwork& network, std::string_view var) {
  const TabularNetwork net(network);
  return posterior(net, net.var_index(var), Evidence(net), Method::Elimination);
}

SubsetResult subset(const BayesianNetwork& network, const SubsetSpec& spec) {
  if (spec.keep.empty()) throw Error(ErrorKind::InvalidArgument, "subset keeps no variables");
  const TabularNetwork net(network);
  std::vector<bool> kept(net.size(), false);
  for (const auto& id : spec.keep) kept[net.var_index(id)] = true;

  SubsetResult result;
  std::vector<RandomVariable> variables;
  std::vector<Cpt> cpts;
  std::map<std::size_t, std::set<std::size_t>> ancestry;

  for (std::size_t v = 0; v < net.size(); ++v) {
    if (!kept[v]) continue;
    const RandomVariable& var = network.variables()[v];
    variables.push_back(var);

    std::vector<std::size_t> kept_parents;
    bool lost_parent = false;
    for (std::size_t p : net.parents(v)) {
      if (kept[p]) kept_parents.push_back(p);
      else lost_parent = true;
    }
    if (!lost_parent) {
      cpts.push_back(network.cpt(var.id));
      continue;
    }

    std::set<std::size_t> removed, kept_met;
    removed_ancestry(net, v, kept, removed, kept_met);
    ancestry[v] = removed;
    for (std::size_t k : kept_met) {
      if (std::find(kept_parents.begin(), kept_parents.end(), k) == kept_parents.end()) {
        result.warnings.push_back(fmt::format(
            "dependence of '{}' on kept ancestor '{}' through removed variables is dropped", var.id, net.id(k)));
      }
    }

    Cpt cpt;
    cpt.variable = var.id;
    for (std::size_t p : kept_parents) cpt.parents.push_back(net.id(p));
    std::vector<std::size_t> digit(kept_parents.size(), 0);
    for (;;) {
      Evidence e(net);
      CptRow row;
      for (std::size_t i = 0; i < kept_parents.size(); ++i) {
        e.bind(kept_parents[i], digit[i]);
        row.parent_states.push_back(network.variables()[kept_parents[i]].states[digit[i]]);
      }
      try {
        row.distribution = posterior(net, v, e, Method::Elimination);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::ZeroProbabilityEvidence) throw;
        row.distribution = fallback_row(net, v, kept_parents, digit);
      }
      cpt.rows.push_back(std::move(row));

      std::size_t i = digit.size();
      while (i-- > 0) {
        if (++digit[i] < net.cardinality(kept_parents[i])) break;
        digit[i] = 0;
      }
      if (i == SIZE_MAX) break;
    }
    cpts.push_back(std::move(cpt));
  }

  // Removed ancestors feeding more than one boundary variable correlate them in
  // the original network; the subset treats them independently.
  std::map<std::size_t, std::vector<std::string>> fed;
  for (const auto& [boundary, removed] : ancestry) {
    for (std::size_t r : removed) fed[r].push_back(net.id(boundary));
  }
  for (const auto& [r, boundaries] : fed) {
    if (boundaries.size() > 1) {
      result.warnings.push_back(fmt::format("removed ancestor '{}' is shared by kept variables {}; their dependence is dropped",
                                            net.id(r), fmt::join(boundaries, ", ")));
    }
  }

  NetworkMetadata meta = network.metadata();
  std::vector<std::string> keep_list(spec.keep.begin(), spec.keep.end());
  meta.source = fmt::format("subset of '{}' keeping {}", network.metadata().name, fmt::join(keep_list, ", "));
  result.network = BayesianNetwork(std::move(meta), std::move(variables), std::move(cpts));

  const auto report = validate(result.network);
  if (!report.ok()) {
    throw Error(ErrorKind::InternalConsistency, fmt::format("subset network is invalid:\n{}", report.summary()));
  }
  return result;
}

}  // namespace bayesqa

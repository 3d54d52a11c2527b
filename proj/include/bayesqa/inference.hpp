#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bayesqa/network.hpp"

namespace bayesqa {

/// Variable id -> state name. A variable is bound at most once by construction.
struct Assignment {
  std::map<std::string, std::string> bindings;

  Assignment() = default;
  Assignment(std::initializer_list<std::pair<const std::string, std::string>> init) : bindings(init) {}

  bool empty() const noexcept { return bindings.empty(); }
  std::size_t size() const noexcept { return bindings.size(); }
  bool binds(std::string_view var) const { return bindings.contains(std::string(var)); }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Parses "var=state"; throws InvalidArgument.
std::pair<std::string, std::string> parse_binding(std::string_view text);

enum class Method { Enumeration, Elimination };
std::string_view to_string(Method method);

struct QueryResult {
  double probability = 0.0;
  Method method = Method::Enumeration;
};

/// Index-based view of a valid network used by the inference kernels.
/// Construction validates and throws ValidationError on a malformed network.
class TabularNetwork {
 public:
  explicit TabularNetwork(const BayesianNetwork& network);

  const BayesianNetwork& network() const noexcept { return network_; }
  std::size_t size() const noexcept { return cards_.size(); }
  std::size_t cardinality(std::size_t var) const { return cards_[var]; }
  std::span<const std::size_t> parents(std::size_t var) const { return parents_[var]; }
  std::span<const std::size_t> children(std::size_t var) const { return children_[var]; }
  const std::string& id(std::size_t var) const { return network_.variables()[var].id; }

  /// Throws UnknownVariable / UnknownState.
  std::size_t var_index(std::string_view id) const;
  std::size_t state_index(std::size_t var, std::string_view state) const;

  /// P(var = world[var] | parents as in world).
  double local_probability(std::size_t var, std::span<const std::uint32_t> world) const {
    std::size_t row = 0;
    for (std::size_t i = 0; i < parents_[var].size(); ++i) row += world[parents_[var][i]] * row_strides_[var][i];
    return tables_[var][row * cards_[var] + world[var]];
  }

  /// CPT of `var` flattened as [parent row][state]; parent rows in odometer
  /// order, last parent fastest.
  std::span<const double> table(std::size_t var) const { return tables_[var]; }

  /// Variable indices in topological order.
  std::span<const std::size_t> topological() const { return topo_; }

 private:
  BayesianNetwork network_;
  std::vector<std::size_t> cards_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> row_strides_;
  std::vector<std::vector<double>> tables_;
  std::vector<std::size_t> topo_;
};

/// Observations as a set of allowed states per variable. Generalizes an
/// Assignment so that "variable is not in state s" can be expressed.
class Evidence {
 public:
  explicit Evidence(const TabularNetwork& net);
  Evidence(const TabularNetwork& net, const Assignment& assignment);

  /// Restrict `var` to a single state.
  void bind(std::size_t var, std::size_t state);
  /// Remove `state` from the allowed states of `var`.
  void exclude(std::size_t var, std::size_t state);

  bool constrained(std::size_t var) const { return constrained_[var]; }
  bool allows(std::size_t var, std::size_t state) const { return allowed_[var][state] != 0; }
  std::size_t allowed_count(std::size_t var) const;
  std::size_t size() const noexcept { return allowed_.size(); }
  std::vector<std::size_t> constrained_variables() const;

 private:
  std::vector<std::vector<std::uint8_t>> allowed_;
  std::vector<bool> constrained_;
};

/// Probability of a full assignment: product of the selected CPT entries.
/// Throws IncompleteAssignment, UnknownVariable, UnknownState.
double joint_probability(const BayesianNetwork& network, const Assignment& full);
double joint_probability(const TabularNetwork& net, const Assignment& full);

/// Sum of joint probabilities over all completions of `partial`.
double marginal(const BayesianNetwork& network, const Assignment& partial);
double marginal(const TabularNetwork& net, const Assignment& partial);

/// P(query | evidence) by enumerating possible worlds.
/// Throws OverlappingBindings, ZeroProbabilityEvidence, UnknownVariable, UnknownState.
QueryResult conditional_query(const BayesianNetwork& network, const Assignment& query,
                              const Assignment& evidence);
QueryResult conditional_query(const TabularNetwork& net, const Assignment& query,
                              const Assignment& evidence);

/// Same contract as conditional_query, by variable elimination.
QueryResult eliminate(const BayesianNetwork& network, const Assignment& query,
                      const Assignment& evidence);
QueryResult eliminate(const TabularNetwork& net, const Assignment& query, const Assignment& evidence);

/// Normalized distribution of `var` given the evidence. The query variable
/// may itself be constrained. Throws ZeroProbabilityEvidence.
std::vector<double> posterior(const TabularNetwork& net, std::size_t var, const Evidence& evidence,
                              Method method = Method::Elimination);

/// Probability mass of the worlds consistent with the evidence.
double evidence_mass(const TabularNetwork& net, const Evidence& evidence,
                     Method method = Method::Enumeration);

namespace kernels {

/// Worlds are enumerated in fixed-size blocks whose partial sums are added in
/// block order, so the result does not depend on the OpenMP thread count.
inline constexpr std::size_t kWorldBlock = 4096;

/// Per-state mass of `var` over worlds consistent with `evidence`
/// (OpenMP-parallel over world blocks).
std::vector<double> enumerate_masses(const TabularNetwork& net, std::size_t var,
                                     const Evidence& evidence);
double enumerate_mass(const TabularNetwork& net, const Evidence& evidence);

/// Serial reference: walks the full world space in odometer order and skips
/// worlds violating the evidence. Kept for testing and benchmarking.
std::vector<double> enumerate_masses_serial(const TabularNetwork& net, std::size_t var,
                                            const Evidence& evidence);
double enumerate_mass_serial(const TabularNetwork& net, const Evidence& evidence);

/// Unnormalized per-state mass of `var` by variable elimination with a
/// min-degree order (ties broken by variable id).
std::vector<double> eliminate_masses(const TabularNetwork& net, std::size_t var,
                                     const Evidence& evidence);

/// Elimination order used for a query on `var`; exposed for tests.
std::vector<std::size_t> elimination_order(const TabularNetwork& net, std::size_t var,
                                           const Evidence& evidence);

}  // namespace kernels

/// Clamps float noise into [0,1]; throws InternalConsistency for anything
/// further than 1e-12 outside.
double clamp_probability(double p);

}  // namespace bayesqa

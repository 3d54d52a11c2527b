#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bayesqa {

/// Absolute tolerance for a CPT row to count as a distribution.
inline constexpr double kRowSumTolerance = 1e-6;

/// A categorical random variable. Two states make it Bernoulli.
struct RandomVariable {
  std::string id;
  std::string name;
  std::vector<std::string> states;

  std::size_t cardinality() const noexcept { return states.size(); }
  std::optional<std::size_t> state_index(std::string_view state) const;

  friend bool operator==(const RandomVariable&, const RandomVariable&) = default;
};

/// One row of a CPT. `parent_states[i]` is the state of `Cpt::parents[i]`.
struct CptRow {
  std::vector<std::string> parent_states;
  std::vector<double> distribution;

  friend bool operator==(const CptRow&, const CptRow&) = default;
};

struct Cpt {
  std::string variable;
  std::vector<std::string> parents;
  std::vector<CptRow> rows;

  friend bool operator==(const Cpt&, const Cpt&) = default;
};

struct NetworkMetadata {
  std::string name;
  std::string source;
  // Constant used for the subject argument when the network is rendered as
  // a logic program (e.g. `patient`).
  std::string entity = "entity";

  friend bool operator==(const NetworkMetadata&, const NetworkMetadata&) = default;
};

/// Variables, one CPT per variable and metadata. Construction only indexes
/// the records; it does not check them (see `validate`), so malformed
/// networks can still be inspected and reported on.
class BayesianNetwork {
 public:
  BayesianNetwork() = default;
  BayesianNetwork(NetworkMetadata metadata, std::vector<RandomVariable> variables,
                  std::vector<Cpt> cpts);

  const NetworkMetadata& metadata() const noexcept { return metadata_; }
  const std::vector<RandomVariable>& variables() const noexcept { return variables_; }
  const std::vector<Cpt>& cpts() const noexcept { return cpts_; }
  std::size_t size() const noexcept { return variables_.size(); }

  std::optional<std::size_t> index_of(std::string_view id) const;
  const RandomVariable* find_variable(std::string_view id) const;
  const Cpt* find_cpt(std::string_view variable) const;

  /// Throws UnknownVariable.
  const RandomVariable& variable(std::string_view id) const;
  /// Throws UnknownVariable when the variable or its CPT is missing.
  const Cpt& cpt(std::string_view variable) const;

  friend bool operator==(const BayesianNetwork& a, const BayesianNetwork& b) {
    return a.metadata_ == b.metadata_ && a.variables_ == b.variables_ && a.cpts_ == b.cpts_;
  }

 private:
  NetworkMetadata metadata_;
  std::vector<RandomVariable> variables_;
  std::vector<Cpt> cpts_;
  std::unordered_map<std::string, std::size_t> variable_index_;
  std::unordered_map<std::string, std::size_t> cpt_index_;
};

struct Violation {
  enum class Kind {
    DuplicateVariable,
    TooFewStates,
    BadStateName,
    MissingCpt,
    DuplicateCpt,
    CptForUnknownVariable,
    DanglingParent,
    DuplicateParent,
    RowShape,
    UnknownParentState,
    MissingRow,
    DuplicateRow,
    ProbabilityRange,
    RowSum,
    Cycle,
  };

  Kind kind;
  std::string location;
  std::string message;
};

std::string_view to_string(Violation::Kind kind);

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(Violation::Kind kind) const;
  std::string summary() const;
};

ValidationReport validate(const BayesianNetwork& network);

/// Kahn order; among ready variables the lexicographically smallest id goes
/// first. Throws CycleDetected.
std::vector<std::string> topological_order(const BayesianNetwork& network);

/// Parent ids in CPT order. Throws UnknownVariable.
std::vector<std::string> parents(const BayesianNetwork& network, std::string_view var);
/// Ids of all variables listing `var` as a parent, sorted. Throws UnknownVariable.
std::vector<std::string> children(const BayesianNetwork& network, std::string_view var);

/// Number of CPT rows summed over all variables.
std::size_t cpt_row_count(const BayesianNetwork& network);

struct LoadOptions {
  // Rescale each CPT row to sum to one before validating.
  bool renormalize = false;
};

/// Network interchange format (JSON, see docs/network-format.md).
/// `from_json_text` throws ParseError (with line/column) or ValidationError.
BayesianNetwork from_json_text(std::string_view text, const LoadOptions& options = {});
std::string to_json_text(const BayesianNetwork& network);

BayesianNetwork load_network(const std::filesystem::path& path, const LoadOptions& options = {});
void save_network(const BayesianNetwork& network, const std::filesystem::path& path);

/// Same network with variables and CPTs in canonical (topological) order.
BayesianNetwork canonicalized(const BayesianNetwork& network);

}  // namespace bayesqa

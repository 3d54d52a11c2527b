#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bayesqa/inference.hpp"
#include "bayesqa/network.hpp"

namespace bayesqa::problog {

/// Argument of an atom. Constants are stored unquoted; logic variables
/// (capitalized names) are parsed but fall outside the evaluated fragment.
struct Term {
  enum class Kind { Constant, Variable };
  Kind kind = Kind::Constant;
  std::string name;

  static Term constant(std::string name) { return {Kind::Constant, std::move(name)}; }

  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool ground() const;
  friend bool operator==(const Atom&, const Atom&) = default;
};

Atom make_atom(std::string predicate, std::vector<std::string> constants);

/// Source form: `amylase(patient, '500-1400')`.
std::string to_string(const Atom& atom);
/// Solver output form, no space after commas: `amylase(patient,'500-1400')`.
std::string to_compact_string(const Atom& atom);
/// A constant as it must be written in source (quoted when needed).
std::string render_constant(std::string_view value);

struct Literal {
  Atom atom;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct ProbHead {
  double probability = 1.0;
  Atom atom;

  friend bool operator==(const ProbHead&, const ProbHead&) = default;
};

/// One head is a probabilistic fact or rule; several heads form an
/// annotated disjunction.
struct Clause {
  std::vector<ProbHead> heads;
  std::vector<Literal> body;

  double head_mass() const;
  friend bool operator==(const Clause&, const Clause&) = default;
};

struct EvidenceItem {
  Atom atom;
  bool value = true;

  friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct Program {
  std::vector<Clause> clauses;
  std::vector<EvidenceItem> evidence;
  std::vector<Atom> queries;

  friend bool operator==(const Program&, const Program&) = default;
};

/// Throws SyntaxError with line/column and the expected token.
Program parse(std::string_view text);

/// Canonical text: one statement per line, a blank line between statements,
/// probabilities with at most 6 fractional digits.
std::string serialize(const Program& program);
std::string format_probability(double p);

/// Problems with head probabilities (range, per-clause sum above 1 + 1e-6).
std::vector<std::string> check_probabilities(const Program& program);

// --- Bayesian network <-> program -------------------------------------------

/// Predicate used for a variable id; throws UnrepresentableName.
std::string predicate_for(std::string_view variable_id);

/// Binary variables become single-head clauses on their first-listed state
/// with `not` for the second state of a binary parent; categorical variables
/// become one annotated disjunction per CPT row. Clauses follow topological
/// order, then CPT row order, so clause i matches premise i.
Program bn_to_problog(const BayesianNetwork& network);
Program bn_to_problog(const BayesianNetwork& network, std::string_view entity);

/// Atom asserting `var = state` in the encoding above, with the polarity an
/// evidence statement needs (binary second states are `false` evidence on
/// the positive atom).
EvidenceItem state_evidence(const BayesianNetwork& network, std::string_view var,
                            std::string_view state, std::string_view entity);

/// Full program for one query: the network clauses, evidence and a query.
/// A query on the second state of a binary variable adds the helper rules
/// `0.0::<pred>_<state>(e) :- <pred>(e).` and
/// `1.0::<pred>_<state>(e) :- not <pred>(e).` and queries the helper atom.
Program query_program(const BayesianNetwork& network, const Assignment& evidence,
                      const std::pair<std::string, std::string>& query);

/// Network compiled from a program together with the atom meanings.
struct CompiledProgram {
  BayesianNetwork network;
  struct AtomMeaning {
    std::size_t variable;
    std::size_t state;
  };
  /// Meaning of a head atom, nullopt when the atom is not defined.
  std::optional<AtomMeaning> lookup(const Atom& atom) const;

  std::vector<std::pair<std::string, AtomMeaning>> atoms;  // keyed by to_string(atom)
};

/// Throws UnsupportedFragment, UnknownClause, InvalidProbability.
CompiledProgram compile(const Program& program);
BayesianNetwork problog_to_bn(const Program& program);

struct QueryAnswer {
  Atom atom;
  double probability = 0.0;
};

/// Answers every query given all evidence via the compiled network.
/// Throws everything `compile` throws, plus ZeroProbabilityEvidence.
std::vector<QueryAnswer> evaluate(const Program& program, Method method = Method::Elimination);

struct WorldEnumerationOptions {
  // Maximum number of probabilistic choices made along one world.
  std::size_t max_choices = 20;
};

/// Distribution-semantics oracle: enumerates total choices over the ground
/// clauses (lazily, only for clauses whose body holds) and computes the
/// stratified minimal model of each world.
/// Throws EnumerationBound, UnstratifiedNegation, UnsupportedFragment,
/// UnknownClause, ZeroProbabilityEvidence.
std::vector<QueryAnswer> enumerate_worlds(const Program& program,
                                          const WorldEnumerationOptions& options = {});

}  // namespace bayesqa::problog

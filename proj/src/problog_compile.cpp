#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "bayesqa/error.hpp"
#include "bayesqa/problog.hpp"

namespace bayesqa::problog {

namespace {

// Bodies whose states per parent are given as allowed sets.
using StateSet = std::vector<std::uint8_t>;

void require_ground(const Program& program) {
  auto check = [](const Atom& atom, std::string_view where) {
    if (!atom.ground()) {
      throw Error(ErrorKind::UnsupportedFragment,
                  fmt::format("non-ground atom {} in {}", to_string(atom), where));
    }
  };
  for (const auto& clause : program.clauses) {
    for (const auto& h : clause.heads) check(h.atom, "a clause head");
    for (const auto& l : clause.body) check(l.atom, "a clause body");
  }
  for (const auto& e : program.evidence) check(e.atom, "evidence");
  for (const auto& q : program.queries) check(q, "a query");
}

void require_valid_probabilities(const Program& program) {
  const auto problems = check_probabilities(program);
  if (!problems.empty()) {
    throw Error(ErrorKind::InvalidProbability, fmt::format("{}", fmt::join(problems, "; ")));
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  std::size_t add() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

const BayesianNetwork& require_valid(const BayesianNetwork& network) {
  const auto report = validate(network);
  if (!report.ok()) {
    throw Error(ErrorKind::ValidationError,
                fmt::format("network '{}' is invalid:\n{}", network.metadata().name, report.summary()));
  }
  return network;
}

Atom positive_atom(const RandomVariable& var, std::string_view entity) {
  return make_atom(predicate_for(var.id), {std::string(entity)});
}

Atom state_atom(const RandomVariable& var, std::size_t state, std::string_view entity) {
  if (var.cardinality() == 2) return positive_atom(var, entity);
  return make_atom(predicate_for(var.id), {std::string(entity), var.states[state]});
}

Literal state_literal(const RandomVariable& var, std::size_t state, std::string_view entity) {
  if (var.cardinality() == 2) return {positive_atom(var, entity), state != 0};
  return {state_atom(var, state, entity), false};
}

void check_entity(std::string_view entity) {
  if (entity.empty()) throw Error(ErrorKind::UnrepresentableName, "entity constant is empty");
}

}  // namespace

std::string predicate_for(std::string_view variable_id) {
  std::string out;
  for (char c : variable_id) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out += static_cast<char>(std::tolower(u));
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty()) {
    throw Error(ErrorKind::UnrepresentableName,
                fmt::format("variable id '{}' has no characters usable in a predicate", variable_id));
  }
  if (!std::islower(static_cast<unsigned char>(out[0]))) out = "v_" + out;
  return out;
}

Program bn_to_problog(const BayesianNetwork& network) {
  return bn_to_problog(network, network.metadata().entity);
}

Program bn_to_problog(const BayesianNetwork& network, std::string_view entity) {
  require_valid(network);
  check_entity(entity);

  std::map<std::string, std::string> owner;
  for (const auto& v : network.variables()) {
    const std::string pred = predicate_for(v.id);
    if (pred == "query" || pred == "evidence" || pred == "not") {
      throw Error(ErrorKind::UnrepresentableName, fmt::format("variable '{}' maps to reserved predicate '{}'", v.id, pred));
    }
    auto [it, inserted] = owner.try_emplace(pred, v.id);
    if (!inserted) {
      throw Error(ErrorKind::UnrepresentableName,
                  fmt::format("variables '{}' and '{}' both map to predicate '{}'", it->second, v.id, pred));
    }
    for (const auto& s : v.states) {
      if (s.empty()) {
        throw Error(ErrorKind::UnrepresentableName, fmt::format("variable '{}' has an empty state name", v.id));
      }
    }
  }

  const BayesianNetwork canon = canonicalized(network);
  Program program;
  for (const auto& var : canon.variables()) {
    const Cpt& cpt = canon.cpt(var.id);
    std::vector<const RandomVariable*> parent_vars;
    for (const auto& p : cpt.parents) parent_vars.push_back(&network.variable(p));

    for (const auto& row : cpt.rows) {
      Clause clause;
      if (var.cardinality() == 2) {
        clause.heads.push_back({row.distribution[0], positive_atom(var, entity)});
      } else {
        for (std::size_t s = 0; s < var.cardinality(); ++s) {
          clause.heads.push_back({row.distribution[s], state_atom(var, s, entity)});
        }
      }
      for (std::size_t i = 0; i < parent_vars.size(); ++i) {
        clause.body.push_back(state_literal(*parent_vars[i], *parent_vars[i]->state_index(row.parent_states[i]), entity));
      }
      program.clauses.push_back(std::move(clause));
    }
  }
  return program;
}

EvidenceItem state_evidence(const BayesianNetwork& network, std::string_view var, std::string_view state,
                            std::string_view entity) {
  const RandomVariable& v = network.variable(var);
  const auto s = v.state_index(state);
  if (!s) throw Error(ErrorKind::UnknownState, fmt::format("'{}' is not a state of '{}'", state, var));
  if (v.cardinality() == 2) return {positive_atom(v, entity), *s == 0};
  return {state_atom(v, *s, entity), true};
}

Program query_program(const BayesianNetwork& network, const Assignment& evidence,
                      const std::pair<std::string, std::string>& query) {
  const std::string entity = network.metadata().entity;
  Program program = bn_to_problog(network, entity);
  for (const auto& [var, state] : evidence.bindings) {
    program.evidence.push_back(state_evidence(network, var, state, entity));
  }

  const RandomVariable& qv = network.variable(query.first);
  const auto qs = qv.state_index(query.second);
  if (!qs) {
    throw Error(ErrorKind::UnknownState, fmt::format("'{}' is not a state of '{}'", query.second, query.first));
  }
  if (qv.cardinality() != 2 || *qs == 0) {
    program.queries.push_back(state_atom(qv, *qs, entity));
    return program;
  }

  std::set<std::string> taken;
  for (const auto& v : network.variables()) taken.insert(predicate_for(v.id));
  std::string helper = predicate_for(qv.id + "_" + qv.states[1]);
  while (taken.contains(helper)) helper += "_";
  // Two rules so the bodies cover both states of the queried variable.
  for (const bool negated : {false, true}) {
    Clause rule;
    rule.heads.push_back({negated ? 1.0 : 0.0, make_atom(helper, {entity})});
    rule.body.push_back({positive_atom(qv, entity), negated});
    program.clauses.push_back(std::move(rule));
  }
  program.queries.push_back(make_atom(helper, {entity}));
  return program;
}

std::optional<CompiledProgram::AtomMeaning> CompiledProgram::lookup(const Atom& atom) const {
  const std::string key = to_string(atom);
  for (const auto& [text, meaning] : atoms) {
    if (text == key) return meaning;
  }
  return std::nullopt;
}

CompiledProgram compile(const Program& program) {
  require_ground(program);
  require_valid_probabilities(program);

  // Intern head atoms; heads of one annotated disjunction describe one variable.
  std::map<std::string, std::size_t> head_id;
  std::vector<const Atom*> head_atoms;
  UnionFind groups;
  for (const auto& clause : program.clauses) {
    std::size_t first = SIZE_MAX;
    for (const auto& h : clause.heads) {
      const std::string key = to_string(h.atom);
      auto [it, inserted] = head_id.try_emplace(key, head_atoms.size());
      if (inserted) {
        head_atoms.push_back(&h.atom);
        groups.add();
      }
      if (first == SIZE_MAX) first = it->second;
      else groups.unite(first, it->second);
    }
  }

  // Variables in order of first appearance.
  std::map<std::size_t, std::size_t> var_of_root;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t a = 0; a < head_atoms.size(); ++a) {
    auto [it, inserted] = var_of_root.try_emplace(groups.find(a), members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(a);
  }
  const std::size_t n = members.size();

  std::vector<std::size_t> clause_var(program.clauses.size());
  std::vector<std::vector<std::size_t>> clauses_of(n);
  for (std::size_t c = 0; c < program.clauses.size(); ++c) {
    const std::size_t a = head_id.at(to_string(program.clauses[c].heads.front().atom));
    clause_var[c] = var_of_root.at(groups.find(a));
    clauses_of[clause_var[c]].push_back(c);
  }

  std::map<std::string, std::size_t> predicate_uses;
  for (std::size_t v = 0; v < n; ++v) ++predicate_uses[head_atoms[members[v].front()]->predicate];

  std::vector<RandomVariable> variables(n);
  std::vector<CompiledProgram::AtomMeaning> meaning(head_atoms.size());
  for (std::size_t v = 0; v < n; ++v) {
    RandomVariable& var = variables[v];
    const Atom& first = *head_atoms[members[v].front()];
    if (members[v].size() == 1) {
      var.id = predicate_uses[first.predicate] == 1 ? first.predicate : to_compact_string(first);
      var.states = {"true", "false"};
      meaning[members[v].front()] = {v, 0};
    } else {
      // Heads sharing predicate and all but the last argument name their state by that argument.
      bool shared_prefix = true;
      for (std::size_t a : members[v]) {
        const Atom& atom = *head_atoms[a];
        shared_prefix = shared_prefix && !atom.args.empty() && atom.predicate == first.predicate &&
                        atom.args.size() == first.args.size() &&
                        std::equal(atom.args.begin(), atom.args.end() - 1, first.args.begin());
      }
      if (shared_prefix) {
        Atom prefix{first.predicate, {first.args.begin(), first.args.end() - 1}};
        var.id = predicate_uses[first.predicate] == 1 ? first.predicate : to_compact_string(prefix);
      } else {
        var.id = to_compact_string(first);
      }
      for (std::size_t a : members[v]) {
        meaning[a] = {v, var.states.size()};
        var.states.push_back(shared_prefix ? head_atoms[a]->args.back().name : to_compact_string(*head_atoms[a]));
      }
      // Annotated disjunctions with leftover mass choose no head: an extra state.
      bool leftover = false;
      for (std::size_t c : clauses_of[v]) leftover = leftover || program.clauses[c].head_mass() < 1.0 - 1e-6;
      if (leftover) {
        std::string none = "none";
        while (std::find(var.states.begin(), var.states.end(), none) != var.states.end()) none += "_";
        var.states.push_back(none);
      }
    }
    var.name = var.id;
  }

  auto resolve = [&](const Atom& atom, std::string_view where) {
    auto it = head_id.find(to_string(atom));
    if (it == head_id.end()) {
      throw Error(ErrorKind::UnknownClause,
                  fmt::format("{} uses {}, which no clause defines", where, to_string(atom)));
    }
    return meaning[it->second];
  };

  std::vector<Cpt> cpts(n);
  for (std::size_t v = 0; v < n; ++v) {
    const RandomVariable& var = variables[v];
    Cpt& cpt = cpts[v];
    cpt.variable = var.id;

    // Parents in order of first appearance in the bodies.
    std::vector<std::size_t> parent_vars;
    std::vector<std::vector<StateSet>> body_sets;
    for (std::size_t c : clauses_of[v]) {
      for (const auto& lit : program.clauses[c].body) {
        const auto m = resolve(lit.atom, fmt::format("the body of a clause for {}", var.id));
        if (m.variable == v) {
          throw Error(ErrorKind::UnsupportedFragment,
                      fmt::format("cyclic dependency: {} depends on itself", var.id));
        }
        if (std::find(parent_vars.begin(), parent_vars.end(), m.variable) == parent_vars.end()) {
          parent_vars.push_back(m.variable);
        }
      }
    }
    for (std::size_t c : clauses_of[v]) {
      std::vector<StateSet> sets;
      for (std::size_t p : parent_vars) sets.emplace_back(variables[p].cardinality(), 1);
      for (const auto& lit : program.clauses[c].body) {
        const auto m = resolve(lit.atom, "a clause body");
        const std::size_t slot = static_cast<std::size_t>(
            std::find(parent_vars.begin(), parent_vars.end(), m.variable) - parent_vars.begin());
        for (std::size_t s = 0; s < sets[slot].size(); ++s) {
          const bool holds = lit.negated ? s != m.state : s == m.state;
          if (!holds) sets[slot][s] = 0;
        }
      }
      body_sets.push_back(std::move(sets));
    }
    for (std::size_t p : parent_vars) cpt.parents.push_back(variables[p].id);

    std::vector<std::size_t> digit(parent_vars.size(), 0);
    std::size_t rows = 1;
    for (std::size_t p : parent_vars) rows *= variables[p].cardinality();
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<std::size_t> matching;
      for (std::size_t k = 0; k < body_sets.size(); ++k) {
        bool covers = true;
        for (std::size_t i = 0; i < digit.size() && covers; ++i) covers = body_sets[k][i][digit[i]] != 0;
        if (covers) matching.push_back(clauses_of[v][k]);
      }
      std::vector<std::string> given;
      for (std::size_t i = 0; i < digit.size(); ++i) given.push_back(variables[parent_vars[i]].states[digit[i]]);
      const std::string where = given.empty()
                                    ? var.id
                                    : fmt::format("{} given ({})", var.id, fmt::join(given, ", "));
      if (matching.empty()) {
        throw Error(ErrorKind::UnsupportedFragment,
                    fmt::format("no clause covers {}: bodies must be exhaustive", where));
      }
      if (matching.size() > 1) {
        throw Error(ErrorKind::UnsupportedFragment,
                    fmt::format("clauses {} overlap on {}: bodies must be disjoint", fmt::join(matching, " and "), where));
      }

      const Clause& clause = program.clauses[matching.front()];
      std::vector<double> dist(var.cardinality(), 0.0);
      if (members[v].size() == 1) {
        dist[0] = clause.heads.front().probability;
        dist[1] = 1.0 - dist[0];
      } else {
        double mass = 0.0;
        for (const auto& h : clause.heads) {
          dist[meaning[head_id.at(to_string(h.atom))].state] += h.probability;
          mass += h.probability;
        }
        if (var.cardinality() > members[v].size()) dist.back() = std::max(0.0, 1.0 - mass);
      }
      cpt.rows.push_back({std::move(given), std::move(dist)});

      for (std::size_t i = digit.size(); i-- > 0;) {
        if (++digit[i] < variables[parent_vars[i]].cardinality()) break;
        digit[i] = 0;
      }
    }
  }

  for (const auto& e : program.evidence) resolve(e.atom, "evidence");
  for (const auto& q : program.queries) resolve(q, "a query");

  NetworkMetadata meta{"problog", "compiled from a ProbLog program", "entity"};
  std::set<std::string> first_args;
  for (const Atom* a : head_atoms) first_args.insert(a->args.empty() ? std::string() : a->args.front().name);
  if (first_args.size() == 1 && !first_args.begin()->empty()) meta.entity = *first_args.begin();

  CompiledProgram out{BayesianNetwork(std::move(meta), std::move(variables), std::move(cpts)), {}};
  const auto report = validate(out.network);
  if (report.count(Violation::Kind::Cycle) > 0) {
    throw Error(ErrorKind::UnsupportedFragment,
                fmt::format("cyclic dependencies: {}", report.violations.back().location));
  }
  if (!report.ok()) {
    throw Error(ErrorKind::UnsupportedFragment, fmt::format("compiled network is invalid:\n{}", report.summary()));
  }
  for (const auto& [key, id] : head_id) out.atoms.emplace_back(key, meaning[id]);
  return out;
}

BayesianNetwork problog_to_bn(const Program& program) { return compile(program).network; }

std::vector<QueryAnswer> evaluate(const Program& program, Method method) {
  if (program.queries.empty()) throw Error(ErrorKind::InvalidArgument, "program has no query/1 statement");
  const CompiledProgram compiled = compile(program);
  const TabularNetwork net(compiled.network);

  Evidence evidence(net);
  for (const auto& e : program.evidence) {
    const auto m = *compiled.lookup(e.atom);
    if (e.value) evidence.bind(m.variable, m.state);
    else evidence.exclude(m.variable, m.state);
  }

  std::vector<QueryAnswer> answers;
  for (const auto& q : program.queries) {
    const auto m = *compiled.lookup(q);
    answers.push_back({q, posterior(net, m.variable, evidence, method)[m.state]});
  }
  return answers;
}

}  // namespace bayesqa::problog

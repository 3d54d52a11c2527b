// Possible-world oracle for ground programs. It works on the program text
// alone and never builds a Bayesian network, so it can cross-check `evaluate`.
//
// Each clause is an independent choice among its heads (plus "no head" when
// the head probabilities sum below one). A choice only matters once the
// clause body holds, so choices are made lazily: within each stratum we
// repeatedly pick the first undecided clause whose body is satisfied, branch
// on its options, and stop when no further clause fires. Clauses that never
// fire contribute a factor of one.

#include <algorithm>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "bayesqa/error.hpp"
#include "bayesqa/problog.hpp"

namespace bayesqa::problog {

namespace {

struct GroundLiteral {
  std::size_t atom;
  bool negated;
};

struct GroundClause {
  std::vector<std::pair<std::size_t, double>> heads;
  double none = 0.0;  // probability that no head is chosen
  std::vector<GroundLiteral> body;
};

// Tarjan SCC over atoms; components come out dependencies-first.
std::vector<std::size_t> strongly_connected(const std::vector<std::vector<std::size_t>>& succ,
                                            std::size_t& count) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX), stack;
  std::vector<bool> on_stack(n, false);
  std::size_t next = 0;
  count = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = next++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : succ[v]) {
      if (index[w] == SIZE_MAX) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      for (;;) {
        const std::size_t w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = count;
        if (w == v) break;
      }
      ++count;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] == SIZE_MAX) visit(v);
  }
  // Tarjan emits sinks first; edges run body -> head, so reverse.
  for (auto& c : comp) c = count - 1 - c;
  return comp;
}

class WorldEnumerator {
 public:
  WorldEnumerator(const Program& program, const WorldEnumerationOptions& options)
      : options_(options) {
    for (const auto& c : program.clauses) {
      for (const auto& h : c.heads) intern(h.atom, true);
    }
    auto lookup = [&](const Atom& atom, std::string_view where) {
      auto it = ids_.find(to_string(atom));
      if (it == ids_.end() || !defined_[it->second]) {
        throw Error(ErrorKind::UnknownClause,
                    fmt::format("{} uses {}, which no clause defines", where, to_string(atom)));
      }
      return it->second;
    };

    for (const auto& c : program.clauses) {
      GroundClause g;
      double mass = 0.0;
      for (const auto& h : c.heads) {
        g.heads.emplace_back(ids_.at(to_string(h.atom)), h.probability);
        mass += h.probability;
      }
      g.none = std::max(0.0, 1.0 - mass);
      for (const auto& l : c.body) g.body.push_back({lookup(l.atom, "a clause body"), l.negated});
      clauses_.push_back(std::move(g));
    }
    for (const auto& e : program.evidence) evidence_.emplace_back(lookup(e.atom, "evidence"), e.value);
    for (const auto& q : program.queries) queries_.push_back(lookup(q, "a query"));

    stratify();
    truth_.assign(defined_.size(), 0);
    decided_.assign(clauses_.size(), 0);
    query_mass_.assign(queries_.size(), 0.0);
  }

  std::vector<double> run() {
    explore(0, 1.0, 0);
    if (!(evidence_mass_ > 0.0)) {
      throw Error(ErrorKind::ZeroProbabilityEvidence, "the evidence has probability zero");
    }
    std::vector<double> out;
    for (double m : query_mass_) out.push_back(std::clamp(m / evidence_mass_, 0.0, 1.0));
    return out;
  }

 private:
  std::size_t intern(const Atom& atom, bool defining) {
    auto [it, inserted] = ids_.try_emplace(to_string(atom), defined_.size());
    if (inserted) defined_.push_back(0);
    if (defining) defined_[it->second] = 1;
    return it->second;
  }

  void stratify() {
    const std::size_t n = defined_.size();
    std::vector<std::vector<std::size_t>> succ(n);
    for (const auto& c : clauses_) {
      for (const auto& l : c.body) {
        for (const auto& [h, p] : c.heads) succ[l.atom].push_back(h);
      }
      // Heads of one disjunction are decided together, so keep them in one stratum.
      for (std::size_t i = 1; i < c.heads.size(); ++i) {
        succ[c.heads[0].first].push_back(c.heads[i].first);
        succ[c.heads[i].first].push_back(c.heads[0].first);
      }
    }
    std::size_t count = 0;
    const auto comp = strongly_connected(succ, count);
    for (const auto& c : clauses_) {
      for (const auto& l : c.body) {
        if (l.negated && comp[l.atom] == comp[c.heads[0].first]) {
          throw Error(ErrorKind::UnstratifiedNegation,
                      fmt::format("negation inside a recursive cycle through atom #{}", l.atom));
        }
      }
    }
    strata_.assign(count, {});
    for (std::size_t i = 0; i < clauses_.size(); ++i) strata_[comp[clauses_[i].heads[0].first]].push_back(i);
  }

  bool body_holds(const GroundClause& c) const {
    for (const auto& l : c.body) {
      if ((truth_[l.atom] != 0) == l.negated) return false;
    }
    return true;
  }

  void explore(std::size_t stratum, double weight, std::size_t depth) {
    while (stratum < strata_.size()) {
      const GroundClause* fire = nullptr;
      std::size_t fire_index = 0;
      for (std::size_t i : strata_[stratum]) {
        if (!decided_[i] && body_holds(clauses_[i])) {
          fire = &clauses_[i];
          fire_index = i;
          break;
        }
      }
      if (!fire) {
        ++stratum;
        continue;
      }

      bool all_true = true;
      for (const auto& [h, p] : fire->heads) all_true = all_true && truth_[h];
      decided_[fire_index] = 1;
      if (all_true) {
        // Every option leaves the world unchanged; the options sum to one.
        explore(stratum, weight, depth);
      } else {
        if (depth + 1 > options_.max_choices) {
          throw Error(ErrorKind::EnumerationBound,
                      fmt::format("more than {} probabilistic choices in one world", options_.max_choices));
        }
        for (const auto& [h, p] : fire->heads) {
          if (p <= 0.0) continue;
          const bool was = truth_[h] != 0;
          truth_[h] = 1;
          explore(stratum, weight * p, depth + 1);
          truth_[h] = was ? 1 : 0;
        }
        if (fire->none > 0.0) explore(stratum, weight * fire->none, depth + 1);
      }
      decided_[fire_index] = 0;
      return;
    }
    leaf(weight);
  }

  void leaf(double weight) {
    for (const auto& [atom, value] : evidence_) {
      if ((truth_[atom] != 0) != value) return;
    }
    evidence_mass_ += weight;
    for (std::size_t q = 0; q < queries_.size(); ++q) {
      if (truth_[queries_[q]]) query_mass_[q] += weight;
    }
  }

  WorldEnumerationOptions options_;
  std::map<std::string, std::size_t> ids_;
  std::vector<std::uint8_t> defined_;
  std::vector<GroundClause> clauses_;
  std::vector<std::pair<std::size_t, bool>> evidence_;
  std::vector<std::size_t> queries_;
  std::vector<std::vector<std::size_t>> strata_;

  std::vector<std::uint8_t> truth_;
  std::vector<std::uint8_t> decided_;
  double evidence_mass_ = 0.0;
  std::vector<double> query_mass_;
};

}  // namespace

std::vector<QueryAnswer> enumerate_worlds(const Program& program, const WorldEnumerationOptions& options) {
  if (program.queries.empty()) throw Error(ErrorKind::InvalidArgument, "program has no query/1 statement");
  for (const auto& c : program.clauses) {
    for (const auto& h : c.heads) {
      if (!h.atom.ground()) throw Error(ErrorKind::UnsupportedFragment, "non-ground atom " + to_string(h.atom));
    }
    for (const auto& l : c.body) {
      if (!l.atom.ground()) throw Error(ErrorKind::UnsupportedFragment, "non-ground atom " + to_string(l.atom));
    }
  }
  const auto problems = check_probabilities(program);
  if (!problems.empty()) throw Error(ErrorKind::InvalidProbability, problems.front());

  const auto probabilities = WorldEnumerator(program, options).run();
  std::vector<QueryAnswer> out;
  for (std::size_t q = 0; q < program.queries.size(); ++q) out.push_back({program.queries[q], probabilities[q]});
  return out;
}

}  // namespace bayesqa::problog

#include "support.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "bayesqa/problog.hpp"

namespace bayesqa::testing {

BayesianNetwork gallstone() {
  std::vector<RandomVariable> vars{
      {"gallstones", "gallstones", {"yes", "no"}},
      {"flatulence", "flatulence", {"yes", "no"}},
      {"amylase", "amylase level", {"0-299", "300-499", "500-1400"}},
  };
  std::vector<Cpt> cpts{
      {"gallstones", {}, {{{}, {0.1531, 0.8469}}}},
      {"flatulence", {"gallstones"}, {{{"yes"}, {0.3925, 0.6075}}, {{"no"}, {0.4307, 0.5693}}}},
      {"amylase", {"gallstones"}, {{{"yes"}, {0.9346, 0.0467, 0.0187}}, {{"no"}, {0.973, 0.0169, 0.0101}}}},
  };
  return BayesianNetwork({"gallstone", "test fixture", "patient"}, std::move(vars), std::move(cpts));
}

std::string gallstone_program() {
  return "0.1531::gallstones(patient).\n"
         "0.3925::flatulence(patient) :- gallstones(patient).\n"
         "0.4307::flatulence(patient) :- not gallstones(patient).\n"
         "0.9346::amylase(patient, '0-299'); 0.0467::amylase(patient, '300-499'); "
         "0.0187::amylase(patient, '500-1400') :- gallstones(patient).\n"
         "0.9730::amylase(patient, '0-299'); 0.0169::amylase(patient, '300-499'); "
         "0.0101::amylase(patient, '500-1400') :- not gallstones(patient).\n"
         "evidence(flatulence(patient), true).\n"
         "query(amylase(patient, '500-1400')).\n";
}

BayesianNetwork v_structure() {
  std::vector<RandomVariable> vars{
      {"X1", "X1", {"t", "f"}},
      {"X2", "X2", {"t", "f"}},
      {"X3", "X3", {"t", "f"}},
  };
  std::vector<Cpt> cpts{
      {"X1", {}, {{{}, {0.3, 0.7}}}},
      {"X2", {}, {{{}, {0.6, 0.4}}}},
      {"X3",
       {"X1", "X2"},
       {{{"t", "t"}, {0.95, 0.05}}, {{"t", "f"}, {0.8, 0.2}}, {{"f", "t"}, {0.5, 0.5}}, {{"f", "f"}, {0.1, 0.9}}}},
  };
  return BayesianNetwork({"v-structure", "test fixture"}, std::move(vars), std::move(cpts));
}

BayesianNetwork chain() {
  std::vector<RandomVariable> vars{
      {"A", "A", {"a0", "a1"}},
      {"B", "B", {"b0", "b1"}},
      {"C", "C", {"c0", "c1"}},
  };
  std::vector<Cpt> cpts{
      {"A", {}, {{{}, {0.3, 0.7}}}},
      {"B", {"A"}, {{{"a0"}, {0.9, 0.1}}, {{"a1"}, {0.2, 0.8}}}},
      {"C", {"B"}, {{{"b0"}, {0.6, 0.4}}, {{"b1"}, {0.25, 0.75}}}},
  };
  return BayesianNetwork({"chain", "test fixture"}, std::move(vars), std::move(cpts));
}

namespace {

std::vector<double> random_row(Rng& rng, std::size_t k, double zero_rate) {
  std::vector<std::size_t> cuts{0, 10000};
  for (std::size_t i = 0; i + 1 < k; ++i) cuts.push_back(rng.uniform_index(10001));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> units(k);
  for (std::size_t i = 0; i < k; ++i) units[i] = cuts[i + 1] - cuts[i];
  if (rng.bernoulli(zero_rate)) {
    const std::size_t from = rng.uniform_index(k);
    const std::size_t to = (from + 1 + rng.uniform_index(k - 1)) % k;
    units[to] += units[from];
    units[from] = 0;
  }
  std::vector<double> row(k);
  for (std::size_t i = 0; i < k; ++i) row[i] = static_cast<double>(units[i]) / 10000.0;
  return row;
}

Cpt random_cpt(Rng& rng, const RandomVariable& var, const std::vector<const RandomVariable*>& parents, double zero_rate) {
  Cpt cpt;
  cpt.variable = var.id;
  for (const auto* p : parents) cpt.parents.push_back(p->id);
  std::vector<std::size_t> digit(parents.size(), 0);
  for (;;) {
    CptRow row;
    for (std::size_t i = 0; i < parents.size(); ++i) row.parent_states.push_back(parents[i]->states[digit[i]]);
    row.distribution = random_row(rng, var.cardinality(), zero_rate);
    cpt.rows.push_back(std::move(row));
    std::size_t i = digit.size();
    while (i-- > 0) {
      if (++digit[i] < parents[i]->cardinality()) break;
      digit[i] = 0;
    }
    if (i == SIZE_MAX) break;
  }
  return cpt;
}

const std::vector<std::string> kStatePool{"low", "high", "0-299", "Mid", "n'a", "x y", "s6", "_t"};

}  // namespace

BayesianNetwork five_node(Rng& rng) {
  std::vector<RandomVariable> vars;
  for (const char* id : {"A", "B", "C", "D", "E"}) {
    const std::size_t k = 2 + rng.uniform_index(2);
    RandomVariable v{id, id, {}};
    for (std::size_t s = 0; s < k; ++s) v.states.push_back(fmt::format("{}{}", static_cast<char>(id[0] + 32), s));
    vars.push_back(std::move(v));
  }
  std::vector<Cpt> cpts{
      random_cpt(rng, vars[0], {}, 0.0),
      random_cpt(rng, vars[1], {}, 0.0),
      random_cpt(rng, vars[2], {&vars[0], &vars[1]}, 0.0),
      random_cpt(rng, vars[3], {&vars[2]}, 0.0),
      random_cpt(rng, vars[4], {&vars[2]}, 0.0),
  };
  return BayesianNetwork({"five-node", "test fixture"}, std::move(vars), std::move(cpts));
}

BayesianNetwork random_network(Rng& rng, const RandomNetworkOptions& options) {
  const std::size_t n = rng.uniform_between(options.min_variables, options.max_variables);
  std::vector<RandomVariable> vars(n);
  for (std::size_t i = 0; i < n; ++i) {
    vars[i].id = fmt::format("v{}", i);
    vars[i].name = fmt::format("variable {}", i);
    const std::size_t k = rng.uniform_between(2, options.max_states);
    std::vector<std::string> pool = kStatePool;
    for (std::size_t s = 0; s < k; ++s) {
      std::swap(pool[s], pool[s + rng.uniform_index(pool.size() - s)]);
      vars[i].states.push_back(pool[s]);
    }
  }
  std::vector<Cpt> cpts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> candidates(i);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    const std::size_t m = rng.uniform_index(std::min(i, options.max_parents) + 1);
    std::vector<const RandomVariable*> parents;
    for (std::size_t j = 0; j < m; ++j) {
      std::swap(candidates[j], candidates[j + rng.uniform_index(candidates.size() - j)]);
      parents.push_back(&vars[candidates[j]]);
    }
    cpts.push_back(random_cpt(rng, vars[i], parents, options.zero_rate));
  }
  // Declaration order independent of the topology.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  std::vector<RandomVariable> shuffled_vars;
  std::vector<Cpt> shuffled_cpts;
  for (std::size_t i : order) {
    shuffled_vars.push_back(vars[i]);
    shuffled_cpts.push_back(cpts[i]);
  }
  return BayesianNetwork({"random", "test fixture"}, std::move(shuffled_vars), std::move(shuffled_cpts));
}

RandomQuery random_query(const BayesianNetwork& network, Rng& rng) {
  const auto& vars = network.variables();
  std::vector<std::size_t> order(vars.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  RandomQuery q;
  const RandomVariable& qv = vars[order[0]];
  q.query = {qv.id, qv.states[rng.uniform_index(qv.cardinality())]};
  const std::size_t j = rng.uniform_index(vars.size());
  for (std::size_t i = 1; i <= j; ++i) {
    const RandomVariable& ev = vars[order[i]];
    q.evidence.bindings.emplace(ev.id, ev.states[rng.uniform_index(ev.cardinality())]);
  }
  return q;
}

Assignment to_compiled(const BayesianNetwork& original, const Assignment& a) {
  Assignment out;
  for (const auto& [var, state] : a.bindings) {
    const RandomVariable& v = original.variable(var);
    std::string mapped = state;
    if (v.cardinality() == 2) mapped = *v.state_index(state) == 0 ? "true" : "false";
    out.bindings.emplace(problog::predicate_for(var), mapped);
  }
  return out;
}

}  // namespace bayesqa::testing

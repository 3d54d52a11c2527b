#include "bayesqa/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "bayesqa/error.hpp"
#include "factor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bayesqa {

namespace {

// Enumeration refuses world spaces beyond this many worlds.
constexpr std::size_t kMaxWorlds = std::size_t{1} << 36;

}  // namespace

std::pair<std::string, std::string> parse_binding(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size()) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("expected var=state, got '{}'", text));
  }
  std::string state(text.substr(eq + 1));
  // Shell-friendly: allow 'quoted' states.
  if (state.size() >= 2 && state.front() == '\'' && state.back() == '\'') state = state.substr(1, state.size() - 2);
  return {std::string(text.substr(0, eq)), state};
}

std::string_view to_string(Method method) {
  return method == Method::Enumeration ? "enumeration" : "elimination";
}

double clamp_probability(double p) {
  constexpr double kNoise = 1e-12;
  if (std::isnan(p) || p < -kNoise || p > 1.0 + kNoise) {
    throw Error(ErrorKind::InternalConsistency, fmt::format("probability {} outside [0,1]", p));
  }
  return std::clamp(p, 0.0, 1.0);
}

TabularNetwork::TabularNetwork(const BayesianNetwork& network) : network_(network) {
  const auto report = validate(network_);
  if (!report.ok()) {
    throw Error(ErrorKind::ValidationError,
                fmt::format("network '{}' is invalid:\n{}", network_.metadata().name, report.summary()));
  }
  const std::size_t n = network_.size();
  cards_.resize(n);
  parents_.resize(n);
  children_.resize(n);
  row_strides_.resize(n);
  tables_.resize(n);
  for (std::size_t v = 0; v < n; ++v) cards_[v] = network_.variables()[v].cardinality();

  for (std::size_t v = 0; v < n; ++v) {
    const auto& var = network_.variables()[v];
    const Cpt& cpt = network_.cpt(var.id);
    for (const auto& p : cpt.parents) parents_[v].push_back(*network_.index_of(p));
    for (std::size_t p : parents_[v]) children_[p].push_back(v);

    auto& strides = row_strides_[v];
    strides.assign(parents_[v].size(), 1);
    std::size_t rows = 1;
    for (std::size_t i = parents_[v].size(); i-- > 0;) {
      strides[i] = rows;
      rows *= cards_[parents_[v][i]];
    }
    tables_[v].assign(rows * cards_[v], 0.0);
    for (const auto& row : cpt.rows) {
      std::size_t r = 0;
      for (std::size_t i = 0; i < parents_[v].size(); ++i) {
        const auto& pv = network_.variables()[parents_[v][i]];
        r += *pv.state_index(row.parent_states[i]) * strides[i];
      }
      std::copy(row.distribution.begin(), row.distribution.end(),
                tables_[v].begin() + static_cast<std::ptrdiff_t>(r * cards_[v]));
    }
  }
  for (auto& kids : children_) std::sort(kids.begin(), kids.end());
  for (const auto& id : topological_order(network_)) topo_.push_back(*network_.index_of(id));
}

std::size_t TabularNetwork::var_index(std::string_view id) const {
  if (auto index = network_.index_of(id)) return *index;
  throw Error(ErrorKind::UnknownVariable, fmt::format("no variable '{}'", id));
}

std::size_t TabularNetwork::state_index(std::size_t var, std::string_view state) const {
  const auto& v = network_.variables()[var];
  if (auto s = v.state_index(state)) return *s;
  throw Error(ErrorKind::UnknownState,
              fmt::format("'{}' is not a state of '{}' (states: {})", state, v.id, fmt::join(v.states, ", ")));
}

Evidence::Evidence(const TabularNetwork& net) : constrained_(net.size(), false) {
  allowed_.reserve(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) allowed_.emplace_back(net.cardinality(v), 1);
}

Evidence::Evidence(const TabularNetwork& net, const Assignment& assignment) : Evidence(net) {
  for (const auto& [var, state] : assignment.bindings) {
    const std::size_t v = net.var_index(var);
    bind(v, net.state_index(v, state));
  }
}

void Evidence::bind(std::size_t var, std::size_t state) {
  for (std::size_t s = 0; s < allowed_[var].size(); ++s) {
    if (s != state) allowed_[var][s] = 0;
  }
  constrained_[var] = true;
}

void Evidence::exclude(std::size_t var, std::size_t state) {
  allowed_[var][state] = 0;
  constrained_[var] = true;
}

std::size_t Evidence::allowed_count(std::size_t var) const {
  return static_cast<std::size_t>(std::count(allowed_[var].begin(), allowed_[var].end(), 1));
}

std::vector<std::size_t> Evidence::constrained_variables() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < constrained_.size(); ++v) {
    if (constrained_[v]) out.push_back(v);
  }
  return out;
}

namespace kernels {

namespace {

double joint_of(const TabularNetwork& net, std::span<const std::uint32_t> world) {
  double p = 1.0;
  for (std::size_t v = 0; v < net.size() && p != 0.0; ++v) p *= net.local_probability(v, world);
  return p;
}

std::size_t checked_world_count(const std::vector<std::size_t>& radix) {
  std::size_t total = 1;
  for (std::size_t r : radix) {
    if (r != 0 && total > kMaxWorlds / r) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("world space exceeds {} worlds; use elimination", kMaxWorlds));
    }
    total *= r;
  }
  return total;
}

}  // namespace

std::vector<double> enumerate_masses(const TabularNetwork& net, std::size_t var,
                                     const Evidence& evidence) {
  const std::size_t n = net.size();
  const std::size_t k = net.cardinality(var);

  // Only allowed states are visited; digit d of variable v selects allowed[v][d].
  std::vector<std::vector<std::uint32_t>> allowed(n);
  std::vector<std::size_t> radix(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t s = 0; s < net.cardinality(v); ++s) {
      if (evidence.allows(v, s)) allowed[v].push_back(static_cast<std::uint32_t>(s));
    }
    radix[v] = allowed[v].size();
  }
  const std::size_t total = checked_world_count(radix);
  if (total == 0) return std::vector<double>(k, 0.0);

  const std::size_t blocks = (total + kWorldBlock - 1) / kWorldBlock;
  std::vector<double> partial(blocks * k, 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kWorldBlock;
    const std::size_t end = std::min(begin + kWorldBlock, total);

    std::vector<std::size_t> digit(n);
    std::vector<std::uint32_t> world(n);
    std::size_t rest = begin;
    for (std::size_t v = n; v-- > 0;) {
      digit[v] = rest % radix[v];
      rest /= radix[v];
      world[v] = allowed[v][digit[v]];
    }
    double* out = partial.data() + static_cast<std::size_t>(b) * k;
    for (std::size_t w = begin; w < end; ++w) {
      out[world[var]] += joint_of(net, world);
      for (std::size_t v = n; v-- > 0;) {
        if (++digit[v] < radix[v]) {
          world[v] = allowed[v][digit[v]];
          break;
        }
        digit[v] = 0;
        world[v] = allowed[v][0];
      }
    }
  }

  std::vector<double> masses(k, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t s = 0; s < k; ++s) masses[s] += partial[b * k + s];
  }
  return masses;
}

double enumerate_mass(const TabularNetwork& net, const Evidence& evidence) {
  if (net.size() == 0) return 1.0;
  const auto masses = enumerate_masses(net, 0, evidence);
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

std::vector<double> enumerate_masses_serial(const TabularNetwork& net, std::size_t var,
                                            const Evidence& evidence) {
  const std::size_t n = net.size();
  std::vector<std::size_t> radix(n);
  for (std::size_t v = 0; v < n; ++v) radix[v] = net.cardinality(v);
  const std::size_t total = checked_world_count(radix);

  std::vector<double> masses(net.cardinality(var), 0.0);
  std::vector<std::uint32_t> world(n, 0);
  for (std::size_t w = 0; w < total; ++w) {
    bool consistent = true;
    for (std::size_t v = 0; v < n && consistent; ++v) consistent = evidence.allows(v, world[v]);
    if (consistent) {
      double p = 1.0;
      for (std::size_t v = 0; v < n; ++v) p *= net.local_probability(v, world);
      masses[world[var]] += p;
    }
    for (std::size_t v = n; v-- > 0;) {
      if (++world[v] < radix[v]) break;
      world[v] = 0;
    }
  }
  return masses;
}

double enumerate_mass_serial(const TabularNetwork& net, const Evidence& evidence) {
  if (net.size() == 0) return 1.0;
  const auto masses = enumerate_masses_serial(net, 0, evidence);
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

namespace {

// Query, evidence and all their ancestors; everything else sums to one.
std::vector<bool> relevant_variables(const TabularNetwork& net, std::size_t var, const Evidence& evidence) {
  std::vector<bool> keep(net.size(), false);
  std::vector<std::size_t> stack = evidence.constrained_variables();
  stack.push_back(var);
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (keep[v]) continue;
    keep[v] = true;
    for (std::size_t p : net.parents(v)) stack.push_back(p);
  }
  return keep;
}

detail::Factor cpt_factor(const TabularNetwork& net, std::size_t v, const Evidence& evidence) {
  detail::Factor f;
  f.vars.assign(net.parents(v).begin(), net.parents(v).end());
  f.vars.push_back(v);
  std::sort(f.vars.begin(), f.vars.end());
  std::size_t size = 1;
  for (std::size_t u : f.vars) {
    f.cards.push_back(net.cardinality(u));
    size *= net.cardinality(u);
  }
  f.values.resize(size);

  std::vector<std::uint32_t> world(net.size(), 0);
  std::vector<std::size_t> digit(f.vars.size(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < f.vars.size(); ++j) world[f.vars[j]] = static_cast<std::uint32_t>(digit[j]);
    bool allowed = true;
    for (std::size_t u : f.vars) {
      // Each evidence indicator is folded into exactly one factor: the variable's own CPT.
      if (u == v && !evidence.allows(u, world[u])) allowed = false;
    }
    f.values[i] = allowed ? net.local_probability(v, world) : 0.0;
    for (std::size_t j = 0; j < digit.size(); ++j) {
      if (++digit[j] < f.cards[j]) break;
      digit[j] = 0;
    }
  }
  return f;
}

std::size_t pick_next(const TabularNetwork& net, const std::vector<detail::Factor>& factors,
                      const std::set<std::size_t>& remaining) {
  std::size_t best = *remaining.begin();
  std::size_t best_degree = SIZE_MAX;
  for (std::size_t v : remaining) {
    std::set<std::size_t> neighbours;
    for (const auto& f : factors) {
      if (f.contains(v)) neighbours.insert(f.vars.begin(), f.vars.end());
    }
    const std::size_t degree = neighbours.empty() ? 0 : neighbours.size() - 1;
    if (degree < best_degree || (degree == best_degree && net.id(v) < net.id(best))) {
      best = v;
      best_degree = degree;
    }
  }
  return best;
}

struct EliminationRun {
  std::vector<double> masses;
  std::vector<std::size_t> order;
};

EliminationRun run_elimination(const TabularNetwork& net, std::size_t var, const Evidence& evidence) {
  const auto keep = relevant_variables(net, var, evidence);
  std::vector<detail::Factor> factors;
  std::set<std::size_t> remaining;
  for (std::size_t v = 0; v < net.size(); ++v) {
    if (!keep[v]) continue;
    factors.push_back(cpt_factor(net, v, evidence));
    if (v != var) remaining.insert(v);
  }

  EliminationRun run;
  while (!remaining.empty()) {
    const std::size_t v = pick_next(net, factors, remaining);
    remaining.erase(v);
    run.order.push_back(v);

    detail::Factor merged = detail::scalar_factor(1.0);
    std::vector<detail::Factor> rest;
    for (auto& f : factors) {
      if (f.contains(v)) merged = detail::multiply(merged, f);
      else rest.push_back(std::move(f));
    }
    rest.push_back(detail::sum_out(merged, v));
    factors = std::move(rest);
  }

  detail::Factor result = detail::scalar_factor(1.0);
  for (const auto& f : factors) result = detail::multiply(result, f);
  run.masses = result.values;
  return run;
}

}  // namespace

std::vector<double> eliminate_masses(const TabularNetwork& net, std::size_t var, const Evidence& evidence) {
  return run_elimination(net, var, evidence).masses;
}

std::vector<std::size_t> elimination_order(const TabularNetwork& net, std::size_t var,
                                           const Evidence& evidence) {
  return run_elimination(net, var, evidence).order;
}

}  // namespace kernels

std::vector<double> posterior(const TabularNetwork& net, std::size_t var, const Evidence& evidence,
                              Method method) {
  auto masses = method == Method::Enumeration ? kernels::enumerate_masses(net, var, evidence)
                                              : kernels::eliminate_masses(net, var, evidence);
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorKind::ZeroProbabilityEvidence, "the evidence has probability zero");
  }
  for (double& m : masses) m = clamp_probability(m / total);
  return masses;
}

double evidence_mass(const TabularNetwork& net, const Evidence& evidence, Method method) {
  if (method == Method::Enumeration) return kernels::enumerate_mass(net, evidence);
  if (net.size() == 0) return 1.0;
  const auto masses = kernels::eliminate_masses(net, 0, evidence);
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

double joint_probability(const TabularNetwork& net, const Assignment& full) {
  std::vector<std::uint32_t> world(net.size(), 0);
  std::vector<bool> bound(net.size(), false);
  for (const auto& [var, state] : full.bindings) {
    const std::size_t v = net.var_index(var);
    world[v] = static_cast<std::uint32_t>(net.state_index(v, state));
    bound[v] = true;
  }
  std::vector<std::string> missing;
  for (std::size_t v = 0; v < net.size(); ++v) {
    if (!bound[v]) missing.push_back(net.id(v));
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::IncompleteAssignment,
                fmt::format("unbound variables: {}", fmt::join(missing, ", ")));
  }
  double p = 1.0;
  for (std::size_t v = 0; v < net.size(); ++v) p *= net.local_probability(v, world);
  return p;
}

double joint_probability(const BayesianNetwork& network, const Assignment& full) {
  return joint_probability(TabularNetwork(network), full);
}

double marginal(const TabularNetwork& net, const Assignment& partial) {
  return clamp_probability(kernels::enumerate_mass(net, Evidence(net, partial)));
}

double marginal(const BayesianNetwork& network, const Assignment& partial) {
  return marginal(TabularNetwork(network), partial);
}

namespace {

QueryResult answer(const TabularNetwork& net, const Assignment& query, const Assignment& evidence,
                   Method method) {
  if (query.size() != 1) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("query must bind exactly one variable, got {}", query.size()));
  }
  const auto& [qvar, qstate] = *query.bindings.begin();
  if (evidence.binds(qvar)) {
    throw Error(ErrorKind::OverlappingBindings,
                fmt::format("query variable '{}' is also bound in the evidence", qvar));
  }
  const std::size_t v = net.var_index(qvar);
  const std::size_t s = net.state_index(v, qstate);
  const auto dist = posterior(net, v, Evidence(net, evidence), method);
  return QueryResult{dist[s], method};
}

}  // namespace

QueryResult conditional_query(const TabularNetwork& net, const Assignment& query, const Assignment& evidence) {
  return answer(net, query, evidence, Method::Enumeration);
}

QueryResult conditional_query(const BayesianNetwork& network, const Assignment& query,
                              const Assignment& evidence) {
  return conditional_query(TabularNetwork(network), query, evidence);
}

QueryResult eliminate(const TabularNetwork& net, const Assignment& query, const Assignment& evidence) {
  return answer(net, query, evidence, Method::Elimination);
}

QueryResult eliminate(const BayesianNetwork& network, const Assignment& query, const Assignment& evidence) {
  return eliminate(TabularNetwork(network), query, evidence);
}

}  // namespace bayesqa

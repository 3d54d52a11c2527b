#include "bayesqa/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "bayesqa/error.hpp"
#include "bayesqa/io.hpp"

namespace bayesqa {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kFormatTag = "bayesqa.network";
constexpr int kFormatVersion = 1;

bool row_sum_ok(double sum) {
  // A little slack over the tolerance so a row like {0.500001, 0.5} that sums
  // to 1.000001 in decimal is not rejected by binary rounding.
  return std::abs(sum - 1.0) <= kRowSumTolerance + 1e-12;
}

}  // namespace

std::optional<std::size_t> RandomVariable::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == state) return i;
  }
  return std::nullopt;
}

BayesianNetwork::BayesianNetwork(NetworkMetadata metadata, std::vector<RandomVariable> variables,
                                 std::vector<Cpt> cpts)
    : metadata_(std::move(metadata)), variables_(std::move(variables)), cpts_(std::move(cpts)) {
  for (std::size_t i = 0; i < variables_.size(); ++i) variable_index_.try_emplace(variables_[i].id, i);
  for (std::size_t i = 0; i < cpts_.size(); ++i) cpt_index_.try_emplace(cpts_[i].variable, i);
}

std::optional<std::size_t> BayesianNetwork::index_of(std::string_view id) const {
  auto it = variable_index_.find(std::string(id));
  if (it == variable_index_.end()) return std::nullopt;
  return it->second;
}

const RandomVariable* BayesianNetwork::find_variable(std::string_view id) const {
  auto index = index_of(id);
  return index ? &variables_[*index] : nullptr;
}

const Cpt* BayesianNetwork::find_cpt(std::string_view variable) const {
  auto it = cpt_index_.find(std::string(variable));
  return it == cpt_index_.end() ? nullptr : &cpts_[it->second];
}

const RandomVariable& BayesianNetwork::variable(std::string_view id) const {
  if (const auto* v = find_variable(id)) return *v;
  throw Error(ErrorKind::UnknownVariable, fmt::format("no variable '{}'", id));
}

const Cpt& BayesianNetwork::cpt(std::string_view variable) const {
  if (!find_variable(variable)) {
    throw Error(ErrorKind::UnknownVariable, fmt::format("no variable '{}'", variable));
  }
  if (const auto* c = find_cpt(variable)) return *c;
  throw Error(ErrorKind::UnknownVariable, fmt::format("variable '{}' has no CPT", variable));
}

std::string_view to_string(Violation::Kind kind) {
  using K = Violation::Kind;
  switch (kind) {
    case K::DuplicateVariable: return "duplicate-variable";
    case K::TooFewStates: return "too-few-states";
    case K::BadStateName: return "bad-state-name";
    case K::MissingCpt: return "missing-cpt";
    case K::DuplicateCpt: return "duplicate-cpt";
    case K::CptForUnknownVariable: return "cpt-for-unknown-variable";
    case K::DanglingParent: return "dangling-parent";
    case K::DuplicateParent: return "duplicate-parent";
    case K::RowShape: return "row-shape";
    case K::UnknownParentState: return "unknown-parent-state";
    case K::MissingRow: return "missing-row";
    case K::DuplicateRow: return "duplicate-row";
    case K::ProbabilityRange: return "probability-range";
    case K::RowSum: return "row-sum";
    case K::Cycle: return "cycle";
  }
  return "unknown";
}

std::size_t ValidationReport::count(Violation::Kind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    out += fmt::format("{} at {}: {}\n", to_string(v.kind), v.location, v.message);
  }
  return out;
}

namespace {

// Kahn's algorithm over declared variables, ignoring undeclared parents.
// Returns the ordered ids and the ids left over (nonempty iff there is a cycle).
std::pair<std::vector<std::string>, std::vector<std::string>> kahn(const BayesianNetwork& network) {
  std::map<std::string, std::set<std::string>> pending_parents;
  std::map<std::string, std::set<std::string>> kids;
  for (const auto& v : network.variables()) pending_parents[v.id];
  for (const auto& v : network.variables()) {
    const Cpt* cpt = network.find_cpt(v.id);
    if (!cpt) continue;
    for (const auto& p : cpt->parents) {
      if (!pending_parents.contains(p)) continue;
      pending_parents[v.id].insert(p);
      kids[p].insert(v.id);
    }
  }

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, ps] : pending_parents) {
    if (ps.empty()) ready.push(id);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& child : kids[id]) {
      auto& ps = pending_parents[child];
      ps.erase(id);
      if (ps.empty()) ready.push(child);
    }
  }
  std::vector<std::string> stuck;
  if (order.size() != pending_parents.size()) {
    std::set<std::string> placed(order.begin(), order.end());
    for (const auto& [id, ps] : pending_parents) {
      if (!placed.contains(id)) stuck.push_back(id);
    }
  }
  return {std::move(order), std::move(stuck)};
}

void check_rows(const BayesianNetwork& network, const Cpt& cpt, const RandomVariable& child,
                std::vector<Violation>& out) {
  using K = Violation::Kind;
  const std::string where = fmt::format("cpt '{}'", cpt.variable);

  std::vector<const RandomVariable*> parent_vars;
  bool parents_known = true;
  for (const auto& p : cpt.parents) {
    const auto* pv = network.find_variable(p);
    parents_known = parents_known && pv != nullptr;
    parent_vars.push_back(pv);
  }

  std::set<std::vector<std::size_t>> seen;
  for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
    const auto& row = cpt.rows[r];
    const std::string row_where = fmt::format("{} row {}", where, r);

    if (row.distribution.size() != child.cardinality()) {
      out.push_back({K::RowShape, row_where,
                     fmt::format("{} probabilities for {} states", row.distribution.size(),
                                 child.cardinality())});
    } else {
      double sum = 0.0;
      bool in_range = true;
      for (double p : row.distribution) {
        if (!(p >= 0.0 && p <= 1.0)) in_range = false;
        sum += p;
      }
      if (!in_range) {
        out.push_back({K::ProbabilityRange, row_where,
                       fmt::format("probabilities [{}] outside [0,1]",
                                   fmt::join(row.distribution, ", "))});
      }
      if (!row_sum_ok(sum)) {
        out.push_back({K::RowSum, row_where, fmt::format("row sums to {:.9g}", sum)});
      }
    }

    if (row.parent_states.size() != cpt.parents.size()) {
      out.push_back({K::RowShape, row_where,
                     fmt::format("{} parent states for {} parents", row.parent_states.size(),
                                 cpt.parents.size())});
      continue;
    }
    if (!parents_known) continue;
    std::vector<std::size_t> key;
    bool states_ok = true;
    for (std::size_t i = 0; i < cpt.parents.size(); ++i) {
      auto s = parent_vars[i]->state_index(row.parent_states[i]);
      if (!s) {
        out.push_back({K::UnknownParentState, row_where,
                       fmt::format("'{}' is not a state of '{}'", row.parent_states[i],
                                   cpt.parents[i])});
        states_ok = false;
      } else {
        key.push_back(*s);
      }
    }
    if (states_ok && !seen.insert(key).second) {
      out.push_back({K::DuplicateRow, row_where,
                     fmt::format("parent assignment ({}) listed twice",
                                 fmt::join(row.parent_states, ", "))});
    }
  }

  if (!parents_known) return;
  std::size_t expected = 1;
  for (const auto* pv : parent_vars) expected *= pv->cardinality();
  if (seen.size() < expected) {
    // Name the first missing assignment to make the report actionable.
    std::vector<std::size_t> key(parent_vars.size(), 0);
    std::vector<std::string> first_missing;
    for (std::size_t n = 0; n < expected; ++n) {
      if (!seen.contains(key)) {
        for (std::size_t i = 0; i < key.size(); ++i) first_missing.push_back(parent_vars[i]->states[key[i]]);
        break;
      }
      for (std::size_t i = key.size(); i-- > 0;) {
        if (++key[i] < parent_vars[i]->cardinality()) break;
        key[i] = 0;
      }
    }
    out.push_back({K::MissingRow, where,
                   fmt::format("{} of {} parent assignments missing, first ({})",
                               expected - seen.size(), expected, fmt::join(first_missing, ", "))});
  }
}

}  // namespace

ValidationReport validate(const BayesianNetwork& network) {
  using K = Violation::Kind;
  ValidationReport report;
  auto& out = report.violations;

  std::set<std::string> ids;
  for (const auto& v : network.variables()) {
    const std::string where = fmt::format("variable '{}'", v.id);
    if (!ids.insert(v.id).second) out.push_back({K::DuplicateVariable, where, "id declared twice"});
    if (v.states.size() < 2) {
      out.push_back({K::TooFewStates, where, fmt::format("{} state(s), need at least 2", v.states.size())});
    }
    std::set<std::string> names;
    for (const auto& s : v.states) {
      if (s.empty()) out.push_back({K::BadStateName, where, "empty state name"});
      else if (!names.insert(s).second) {
        out.push_back({K::BadStateName, where, fmt::format("state '{}' listed twice", s)});
      }
    }
  }

  std::set<std::string> with_cpt;
  for (const auto& cpt : network.cpts()) {
    const std::string where = fmt::format("cpt '{}'", cpt.variable);
    const auto* child = network.find_variable(cpt.variable);
    if (!child) {
      out.push_back({K::CptForUnknownVariable, where, "variable is not declared"});
      continue;
    }
    if (!with_cpt.insert(cpt.variable).second) {
      out.push_back({K::DuplicateCpt, where, "variable has more than one CPT"});
      continue;
    }
    std::set<std::string> seen_parents;
    for (const auto& p : cpt.parents) {
      if (!network.find_variable(p)) {
        out.push_back({K::DanglingParent, where, fmt::format("parent '{}' is not declared", p)});
      }
      if (!seen_parents.insert(p).second) {
        out.push_back({K::DuplicateParent, where, fmt::format("parent '{}' listed twice", p)});
      }
    }
    check_rows(network, cpt, *child, out);
  }
  for (const auto& v : network.variables()) {
    if (!with_cpt.contains(v.id)) {
      out.push_back({K::MissingCpt, fmt::format("variable '{}'", v.id), "no CPT"});
    }
  }

  auto [order, stuck] = kahn(network);
  if (!stuck.empty()) {
    out.push_back({K::Cycle, fmt::format("variables {{{}}}", fmt::join(stuck, ", ")),
                   "parent relation is cyclic"});
  }
  return report;
}

std::vector<std::string> topological_order(const BayesianNetwork& network) {
  auto [order, stuck] = kahn(network);
  if (!stuck.empty()) {
    throw Error(ErrorKind::CycleDetected,
                fmt::format("cycle among variables {{{}}}", fmt::join(stuck, ", ")));
  }
  return order;
}

std::vector<std::string> parents(const BayesianNetwork& network, std::string_view var) {
  return network.cpt(var).parents;
}

std::vector<std::string> children(const BayesianNetwork& network, std::string_view var) {
  network.variable(var);
  std::vector<std::string> out;
  for (const auto& cpt : network.cpts()) {
    if (std::find(cpt.parents.begin(), cpt.parents.end(), var) != cpt.parents.end()) {
      out.push_back(cpt.variable);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t cpt_row_count(const BayesianNetwork& network) {
  std::size_t n = 0;
  for (const auto& cpt : network.cpts()) n += cpt.rows.size();
  return n;
}

BayesianNetwork canonicalized(const BayesianNetwork& network) {
  std::vector<std::string> order;
  try {
    order = topological_order(network);
  } catch (const Error&) {
    for (const auto& v : network.variables()) order.push_back(v.id);
  }

  std::vector<RandomVariable> variables;
  std::vector<Cpt> cpts;
  for (const auto& id : order) {
    variables.push_back(network.variable(id));
    const Cpt* source = network.find_cpt(id);
    if (!source) continue;
    Cpt cpt = *source;
    // Rows in odometer order over parent states (last parent fastest).
    auto rank = [&](const CptRow& row) {
      std::vector<std::size_t> key;
      for (std::size_t i = 0; i < cpt.parents.size() && i < row.parent_states.size(); ++i) {
        const auto* pv = network.find_variable(cpt.parents[i]);
        auto s = pv ? pv->state_index(row.parent_states[i]) : std::nullopt;
        key.push_back(s.value_or(SIZE_MAX));
      }
      return key;
    };
    std::stable_sort(cpt.rows.begin(), cpt.rows.end(),
                     [&](const CptRow& a, const CptRow& b) { return rank(a) < rank(b); });
    cpts.push_back(std::move(cpt));
  }
  // Records not reachable through the declared variables keep their place at the end.
  for (const auto& cpt : network.cpts()) {
    if (!network.find_variable(cpt.variable)) cpts.push_back(cpt);
  }
  return BayesianNetwork(network.metadata(), std::move(variables), std::move(cpts));
}

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

const ordered_json& require(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(fmt::format("{}: expected an object", where));
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(fmt::format("{}: missing field '{}'", where, key));
  return *it;
}

std::string require_string(const ordered_json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) schema_error(fmt::format("{}: field '{}' must be a string", where, key));
  return v.get<std::string>();
}

std::vector<std::string> require_strings(const ordered_json& obj, const char* key,
                                         const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_array()) schema_error(fmt::format("{}: field '{}' must be a list", where, key));
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) schema_error(fmt::format("{}: field '{}' must hold strings", where, key));
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string optional_string(const ordered_json& obj, const char* key, std::string fallback) {
  auto it = obj.find(key);
  return (it != obj.end() && it->is_string()) ? it->get<std::string>() : fallback;
}

}  // namespace

BayesianNetwork from_json_text(std::string_view text, const LoadOptions& options) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto pos = position_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::ParseError,
                fmt::format("line {}, column {}: malformed JSON ({})", pos.line, pos.column, e.what()));
  }
  if (!doc.is_object()) schema_error("document: expected an object");
  if (auto it = doc.find("format"); it != doc.end() && *it != kFormatTag) {
    schema_error(fmt::format("document: unexpected format tag {}", it->dump()));
  }

  NetworkMetadata meta;
  meta.name = require_string(doc, "name", "document");
  meta.source = optional_string(doc, "source", "");
  meta.entity = optional_string(doc, "entity", "entity");

  std::vector<RandomVariable> variables;
  const auto& vars = require(doc, "variables", "document");
  if (!vars.is_array()) schema_error("document: field 'variables' must be a list");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    std::string where = fmt::format("variables[{}]", i);
    RandomVariable v;
    v.id = require_string(vars[i], "id", where);
    where = fmt::format("variable '{}'", v.id);
    v.name = optional_string(vars[i], "name", v.id);
    v.states = require_strings(vars[i], "states", where);
    variables.push_back(std::move(v));
  }

  std::vector<Cpt> cpts;
  const auto& tables = require(doc, "cpts", "document");
  if (!tables.is_array()) schema_error("document: field 'cpts' must be a list");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    std::string where = fmt::format("cpts[{}]", i);
    Cpt cpt;
    cpt.variable = require_string(tables[i], "variable", where);
    where = fmt::format("cpt '{}'", cpt.variable);
    cpt.parents = tables[i].contains("parents") ? require_strings(tables[i], "parents", where)
                                                : std::vector<std::string>{};
    const auto& rows = require(tables[i], "rows", where);
    if (!rows.is_array()) schema_error(fmt::format("{}: field 'rows' must be a list", where));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string row_where = fmt::format("{} row {}", where, r);
      CptRow row;
      row.parent_states = rows[r].contains("given") ? require_strings(rows[r], "given", row_where)
                                                    : std::vector<std::string>{};
      const auto& probs = require(rows[r], "p", row_where);
      if (!probs.is_array()) schema_error(fmt::format("{}: field 'p' must be a list", row_where));
      for (const auto& p : probs) {
        if (!p.is_number()) schema_error(fmt::format("{}: probabilities must be numbers", row_where));
        row.distribution.push_back(p.get<double>());
      }
      if (options.renormalize) {
        double sum = 0.0;
        for (double p : row.distribution) sum += p;
        if (sum > 0.0) {
          for (double& p : row.distribution) p /= sum;
        }
      }
      cpt.rows.push_back(std::move(row));
    }
    cpts.push_back(std::move(cpt));
  }

  BayesianNetwork network(std::move(meta), std::move(variables), std::move(cpts));
  auto report = validate(network);
  if (!report.ok()) {
    throw Error(ErrorKind::ValidationError,
                fmt::format("network '{}' is invalid:\n{}", network.metadata().name, report.summary()));
  }
  return network;
}

std::string to_json_text(const BayesianNetwork& network) {
  const BayesianNetwork canon = canonicalized(network);
  ordered_json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kFormatVersion;
  doc["name"] = canon.metadata().name;
  doc["source"] = canon.metadata().source;
  doc["entity"] = canon.metadata().entity;
  doc["variables"] = ordered_json::array();
  for (const auto& v : canon.variables()) {
    ordered_json jv;
    jv["id"] = v.id;
    jv["name"] = v.name;
    jv["states"] = v.states;
    doc["variables"].push_back(std::move(jv));
  }
  doc["cpts"] = ordered_json::array();
  for (const auto& cpt : canon.cpts()) {
    ordered_json jc;
    jc["variable"] = cpt.variable;
    jc["parents"] = cpt.parents;
    jc["rows"] = ordered_json::array();
    for (const auto& row : cpt.rows) {
      ordered_json jr;
      jr["given"] = row.parent_states;
      jr["p"] = row.distribution;
      jc["rows"].push_back(std::move(jr));
    }
    doc["cpts"].push_back(std::move(jc));
  }
  return doc.dump(2) + "\n";
}

BayesianNetwork load_network(const std::filesystem::path& path, const LoadOptions& options) {
  const std::string text = read_text_file(path);
  try {
    return from_json_text(text, options);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.detail()));
  }
}

void save_network(const BayesianNetwork& network, const std::filesystem::path& path) {
  write_text_file(path, to_json_text(network));
}

}  // namespace bayesqa

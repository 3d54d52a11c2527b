#include "bayesqa/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "bayesqa/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bayesqa {

std::string_view to_string(PremiseKind kind) { return kind == PremiseKind::Numeric ? "numeric" : "wep"; }

PremiseKind premise_kind_from(std::string_view text) {
  if (text == "numeric") return PremiseKind::Numeric;
  if (text == "wep") return PremiseKind::Wep;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown premise kind '{}'", text));
}

std::string_view to_string(ReasoningType type) {
  switch (type) {
    case ReasoningType::Causal: return "causal";
    case ReasoningType::Evidential: return "evidential";
    case ReasoningType::ExplainingAway: return "explaining_away";
  }
  return "unknown";
}

ReasoningType reasoning_type_from(std::string_view text) {
  if (text == "causal") return ReasoningType::Causal;
  if (text == "evidential") return ReasoningType::Evidential;
  if (text == "explaining_away") return ReasoningType::ExplainingAway;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown reasoning type '{}'", text));
}

bool ReasoningLabels::has(ReasoningType t) const {
  return std::find(types.begin(), types.end(), t) != types.end();
}

namespace {

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string percent(double p) {
  std::string s = fmt::format("{:.4f}", p * 100.0);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s + "%";
}

// "a", "a and b", "a, b and c"
std::string join_list(const std::vector<std::string>& items, std::string_view last_sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? std::string(last_sep) : std::string(", ");
    out += items[i];
  }
  return out;
}

std::string condition_prefix(const BayesianNetwork& network, const std::vector<std::pair<std::string, std::string>>& given) {
  if (given.empty()) return "";
  std::vector<std::string> parts;
  for (const auto& [parent, state] : given) parts.push_back(fmt::format("{} is {}", network.variable(parent).name, state));
  return fmt::format("If {}, then ", fmt::join(parts, " and "));
}

std::string numeric_text(const BayesianNetwork& network, const RandomVariable& var, const CptRow& row,
                         const std::vector<std::pair<std::string, std::string>>& given) {
  std::vector<std::string> parts;
  for (std::size_t s = 0; s < var.cardinality(); ++s) {
    parts.push_back(fmt::format("{} with probability {}", var.states[s], percent(row.distribution[s])));
  }
  return capitalized(fmt::format("{}{} is {}.", condition_prefix(network, given), var.name, join_list(parts, " and ")));
}

std::string wep_text(const BayesianNetwork& network, const RandomVariable& var, const CptRow& row,
                     const std::vector<std::pair<std::string, std::string>>& given, Rng& rng,
                     const wep::WepOptions& options) {
  const auto verbal = wep::verbalize_distribution(row.distribution, rng, options);
  const std::string prefix = condition_prefix(network, given);
  if (verbal.equally_likely) {
    return capitalized(fmt::format("{}all values of {} ({}) are equally likely.", prefix, var.name,
                                   fmt::join(var.states, ", ")));
  }
  std::vector<std::string> parts;
  for (std::size_t s = 0; s < var.cardinality(); ++s) {
    parts.push_back(fmt::format("it is {} that {} is {}", verbal.phrases[s].phrase, var.name, var.states[s]));
  }
  std::string text = capitalized(fmt::format("{}{}.", prefix, join_list(parts, " and ")));
  if (!verbal.most_likely.empty()) {
    std::vector<std::string> names;
    for (std::size_t s : verbal.most_likely) names.push_back(var.states[s]);
    text += fmt::format(" The most likely value of {} is {}.", var.name, join_list(names, " or "));
  }
  return text;
}

}  // namespace

std::vector<Premise> template_premises(const BayesianNetwork& network, PremiseKind kind, Rng& rng,
                                       const wep::WepOptions& options) {
  const auto report = validate(network);
  if (!report.ok()) {
    throw Error(ErrorKind::ValidationError,
                fmt::format("network '{}' is invalid:\n{}", network.metadata().name, report.summary()));
  }
  const BayesianNetwork canon = canonicalized(network);
  std::vector<Premise> out;
  std::size_t clause = 0;
  for (const auto& var : canon.variables()) {
    const Cpt& cpt = canon.cpt(var.id);
    for (const auto& row : cpt.rows) {
      Premise premise;
      premise.variable = var.id;
      for (std::size_t i = 0; i < cpt.parents.size(); ++i) premise.given.emplace_back(cpt.parents[i], row.parent_states[i]);
      premise.kind = kind;
      premise.text = kind == PremiseKind::Numeric ? numeric_text(canon, var, row, premise.given)
                                                  : wep_text(canon, var, row, premise.given, rng, options);
      premise.clause_ref = clause++;
      out.push_back(std::move(premise));
    }
  }
  return out;
}

std::string evidence_text(const RandomVariable& var, std::string_view state) {
  return capitalized(fmt::format("{} is {}.", var.name, state));
}

std::string question_text(const RandomVariable& var, std::string_view state) {
  return fmt::format("What is the likelihood of {} having the value {}?", var.name, state);
}

QePair sample_qe(const TabularNetwork& net, Rng& rng, const SamplingOptions& options) {
  const std::size_t n = net.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "sampling needs a network with at least two variables");
  const BayesianNetwork& network = net.network();

  std::vector<std::size_t> order(n);
  Assignment evidence;
  std::size_t evidence_count = 0;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == options.max_evidence_retries) {
      throw Error(ErrorKind::UnsatisfiableEvidence,
                  fmt::format("no evidence with positive probability after {} draws", attempt));
    }
    evidence_count = rng.uniform_between(1, n - 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first evidence_count slots are the evidence.
    for (std::size_t i = 0; i < evidence_count; ++i) std::swap(order[i], order[i + rng.uniform_index(n - i)]);

    evidence.bindings.clear();
    Evidence mask(net);
    for (std::size_t i = 0; i < evidence_count; ++i) {
      const std::size_t v = order[i];
      const std::size_t s = rng.uniform_index(net.cardinality(v));
      mask.bind(v, s);
      evidence.bindings.emplace(net.id(v), network.variables()[v].states[s]);
    }
    if (evidence_mass(net, mask, Method::Elimination) > 0.0) break;
  }

  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(evidence_count), order.end());
  std::sort(rest.begin(), rest.end());
  const std::size_t qv = rest[rng.uniform_index(rest.size())];
  const std::size_t qs = rng.uniform_index(net.cardinality(qv));
  const RandomVariable& qvar = network.variables()[qv];

  QePair qe;
  qe.evidence = std::move(evidence);
  for (const auto& [var, state] : qe.evidence.bindings) qe.evidence_texts.push_back(evidence_text(network.variable(var), state));
  qe.query = {qvar.id, qvar.states[qs]};
  qe.question_text = question_text(qvar, qvar.states[qs]);
  qe.gold = conditional_query(net, Assignment{{qe.query.first, qe.query.second}}, qe.evidence).probability;
  qe.labels = classify_reasoning(network, qe.evidence, qvar.id);
  return qe;
}

QePair sample_qe(const BayesianNetwork& network, Rng& rng, const SamplingOptions& options) {
  return sample_qe(TabularNetwork(network), rng, options);
}

ReasoningLabels classify_reasoning(const BayesianNetwork& network, const Assignment& evidence,
                                   std::string_view query_variable) {
  const auto query_parents = parents(network, query_variable);
  const auto query_children = children(network, query_variable);

  bool causal = false;
  for (const auto& p : query_parents) causal = causal || evidence.binds(p);

  bool evidential = false;
  bool explaining_away = false;
  for (const auto& c : query_children) {
    if (!evidence.binds(c)) continue;
    evidential = true;
    for (const auto& co_parent : parents(network, c)) {
      if (co_parent != query_variable && evidence.binds(co_parent)) explaining_away = true;
    }
  }

  ReasoningLabels labels;
  if (causal) labels.types.push_back(ReasoningType::Causal);
  if (evidential) labels.types.push_back(ReasoningType::Evidential);
  if (explaining_away) labels.types.push_back(ReasoningType::ExplainingAway);
  if (explaining_away) labels.primary = ReasoningType::ExplainingAway;
  else if (evidential) labels.primary = ReasoningType::Evidential;
  else if (causal) labels.primary = ReasoningType::Causal;
  return labels;
}

std::vector<DatasetInstance> generate_dataset(const BayesianNetwork& network, std::size_t count, std::uint64_t seed,
                                              const GenerationOptions& options) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "count must be at least 1");
  const TabularNetwork net(network);

  auto premises = std::make_shared<std::vector<Premise>>();
  Rng premise_rng = Rng::stream(seed, kPremiseStream);
  for (PremiseKind kind : options.kinds) {
    auto part = template_premises(network, kind, premise_rng, options.wep);
    premises->insert(premises->end(), part.begin(), part.end());
  }
  if (options.text_provider) {
    for (auto& p : *premises) p.text = options.text_provider->rewrite(p.text, TextProvider::Role::Premise);
  }
  const std::size_t rows = cpt_row_count(network);
  std::shared_ptr<const std::vector<Premise>> shared = std::move(premises);

  std::vector<DatasetInstance> out(count);
  std::vector<std::exception_ptr> failures(count);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const auto index = static_cast<std::uint64_t>(i);
    try {
      Rng rng = Rng::stream(seed, index);
      DatasetInstance& inst = out[static_cast<std::size_t>(i)];
      inst.id = fmt::format("{}-{:05d}", network.metadata().name, index);
      inst.network_id = network.metadata().name;
      inst.premises = shared;
      inst.network_premise_count = rows;
      inst.qe = sample_qe(net, rng, options.sampling);
      inst.seed = seed;
      inst.index = index;
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("instance {}: {}", i, e.detail()));
    }
  }

  if (options.text_provider) {
    for (auto& inst : out) {
      for (auto& t : inst.qe.evidence_texts) t = options.text_provider->rewrite(t, TextProvider::Role::Evidence);
      inst.qe.question_text = options.text_provider->rewrite(inst.qe.question_text, TextProvider::Role::Question);
    }
  }
  return out;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json instance_json(const DatasetInstance& inst) {
  ordered_json j;
  j["id"] = inst.id;
  j["network_id"] = inst.network_id;
  j["seed"] = inst.seed;
  j["index"] = inst.index;
  j["network_premise_count"] = inst.network_premise_count;
  ordered_json premises = ordered_json::array();
  if (inst.premises) {
    for (const auto& p : *inst.premises) {
      ordered_json jp;
      jp["kind"] = to_string(p.kind);
      jp["variable"] = p.variable;
      ordered_json given = ordered_json::object();
      for (const auto& [parent, state] : p.given) given[parent] = state;
      jp["given"] = std::move(given);
      jp["text"] = p.text;
      jp["clause_ref"] = p.clause_ref;
      premises.push_back(std::move(jp));
    }
  }
  j["premises"] = std::move(premises);
  ordered_json bindings = ordered_json::object();
  for (const auto& [var, state] : inst.qe.evidence.bindings) bindings[var] = state;
  j["evidence"] = {{"bindings", std::move(bindings)}, {"texts", inst.qe.evidence_texts}};
  j["question"] = {{"text", inst.qe.question_text}, {"variable", inst.qe.query.first}, {"state", inst.qe.query.second}};
  j["gold"] = inst.qe.gold;
  ordered_json types = ordered_json::array();
  for (auto t : inst.qe.labels.types) types.push_back(to_string(t));
  j["reasoning_types"] = std::move(types);
  j["primary_type"] = inst.qe.labels.primary ? ordered_json(to_string(*inst.qe.labels.primary)) : ordered_json(nullptr);
  return j;
}

}  // namespace

std::string to_jsonl(std::span<const DatasetInstance> instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += instance_json(inst).dump();
    out += '\n';
  }
  return out;
}

std::vector<DatasetInstance> instances_from_jsonl(std::string_view text) {
  std::vector<DatasetInstance> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  // Instances of one network share their premise list when it is identical.
  std::map<std::string, std::shared_ptr<const std::vector<Premise>>> premise_cache;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = ordered_json::parse(line);
      DatasetInstance inst;
      inst.id = j.at("id").get<std::string>();
      inst.network_id = j.value("network_id", std::string());
      inst.seed = j.value("seed", std::uint64_t{0});
      inst.index = j.value("index", std::uint64_t{0});
      inst.network_premise_count = j.value("network_premise_count", std::size_t{0});
      auto premises = std::make_shared<std::vector<Premise>>();
      if (j.contains("premises")) {
        for (const auto& jp : j.at("premises")) {
          Premise p;
          p.kind = premise_kind_from(jp.at("kind").get<std::string>());
          p.variable = jp.value("variable", std::string());
          if (jp.contains("given")) {
            for (const auto& [k, v] : jp.at("given").items()) p.given.emplace_back(k, v.get<std::string>());
          }
          p.text = jp.at("text").get<std::string>();
          p.clause_ref = jp.value("clause_ref", std::size_t{0});
          premises->push_back(std::move(p));
        }
      }
      auto& cached = premise_cache[inst.network_id];
      if (cached && *cached == *premises) inst.premises = cached;
      else inst.premises = cached = std::move(premises);
      if (j.contains("evidence")) {
        for (const auto& [k, v] : j.at("evidence").at("bindings").items()) inst.qe.evidence.bindings.emplace(k, v.get<std::string>());
        inst.qe.evidence_texts = j.at("evidence").value("texts", std::vector<std::string>{});
      }
      const auto& q = j.at("question");
      inst.qe.question_text = q.value("text", std::string());
      inst.qe.query = {q.at("variable").get<std::string>(), q.at("state").get<std::string>()};
      inst.qe.gold = j.at("gold").get<double>();
      for (const auto& t : j.value("reasoning_types", std::vector<std::string>{})) {
        inst.qe.labels.types.push_back(reasoning_type_from(t));
      }
      if (j.contains("primary_type") && j.at("primary_type").is_string()) {
        inst.qe.labels.primary = reasoning_type_from(j.at("primary_type").get<std::string>());
      }
      out.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, fmt::format("dataset line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, fmt::format("dataset line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

DatasetStats dataset_stats(std::span<const BayesianNetwork> networks, std::span<const DatasetInstance> instances) {
  DatasetStats stats;
  std::vector<double> states, variables, premises;
  for (const auto& network : networks) {
    ++stats.networks;
    stats.variables += network.size();
    variables.push_back(static_cast<double>(network.size()));
    for (const auto& v : network.variables()) states.push_back(static_cast<double>(v.cardinality()));
    const std::size_t rows = cpt_row_count(network);
    premises.push_back(static_cast<double>(rows));
    stats.premises_numeric += rows;
    stats.premises_wep += rows;
  }
  for (const auto& inst : instances) {
    ++stats.instances;
    ++stats.queries;
    stats.evidence_statements += inst.qe.evidence.size();
    if (!inst.qe.labels.primary) {
      ++stats.unlabeled;
      continue;
    }
    switch (*inst.qe.labels.primary) {
      case ReasoningType::Causal: ++stats.causal; break;
      case ReasoningType::Evidential: ++stats.evidential; break;
      case ReasoningType::ExplainingAway: ++stats.explaining_away; break;
    }
  }
  stats.states_per_variable = mean_std(states);
  stats.variables_per_network = mean_std(variables);
  stats.premises_per_network = mean_std(premises);
  return stats;
}

}  // namespace bayesqa

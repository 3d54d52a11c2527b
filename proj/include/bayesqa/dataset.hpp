#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bayesqa/inference.hpp"
#include "bayesqa/network.hpp"
#include "bayesqa/rng.hpp"
#include "bayesqa/wep.hpp"

namespace bayesqa {

enum class PremiseKind { Numeric, Wep };
std::string_view to_string(PremiseKind kind);
PremiseKind premise_kind_from(std::string_view text);

/// Verbalization of one CPT row.
struct Premise {
  std::string variable;
  std::vector<std::pair<std::string, std::string>> given;  // parent id, state
  PremiseKind kind = PremiseKind::Numeric;
  std::string text;
  std::size_t clause_ref = 0;  // index of the matching clause in bn_to_problog

  friend bool operator==(const Premise&, const Premise&) = default;
};

enum class ReasoningType { Causal, Evidential, ExplainingAway };
std::string_view to_string(ReasoningType type);
ReasoningType reasoning_type_from(std::string_view text);

struct ReasoningLabels {
  std::vector<ReasoningType> types;  // in enum order
  std::optional<ReasoningType> primary;

  bool has(ReasoningType t) const;
  friend bool operator==(const ReasoningLabels&, const ReasoningLabels&) = default;
};

struct QePair {
  Assignment evidence;
  std::vector<std::string> evidence_texts;  // one per binding, in variable-id order
  std::pair<std::string, std::string> query;
  std::string question_text;
  double gold = 0.0;
  ReasoningLabels labels;
};

struct DatasetInstance {
  std::string id;
  std::string network_id;
  std::shared_ptr<const std::vector<Premise>> premises;
  std::size_t network_premise_count = 0;  // CPT rows, i.e. premises of one kind
  QePair qe;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Hook for rewriting template text (e.g. an external paraphrasing model).
/// Called serially, in instance order.
class TextProvider {
 public:
  enum class Role { Premise, Evidence, Question };
  virtual ~TextProvider() = default;
  virtual std::string rewrite(std::string_view text, Role role) const = 0;
};

/// One premise per CPT row, topological variable order then row order.
/// Numeric premises: "If <parent> is <state> and ..., then <child> is <s1>
/// with probability <p1>%, <s2> with probability <p2>%." Root rows omit the
/// condition. WEP premises replace each probability by "it is <phrase> that
/// <child> is <state>"; `rng` is only drawn from for WEP premises.
std::vector<Premise> template_premises(const BayesianNetwork& network, PremiseKind kind, Rng& rng,
                                       const wep::WepOptions& options = {});

struct SamplingOptions {
  std::size_t max_evidence_retries = 1000;
};

/// Evidence of 1..n-1 distinct variables with uniform states (resampled while
/// it has probability zero), then a uniform query variable and state among
/// the rest. Throws InvalidArgument (n < 2), UnsatisfiableEvidence.
QePair sample_qe(const TabularNetwork& net, Rng& rng, const SamplingOptions& options = {});
QePair sample_qe(const BayesianNetwork& network, Rng& rng, const SamplingOptions& options = {});

/// Direct parent/child relations only. Primary type priority:
/// explaining-away > evidential > causal.
ReasoningLabels classify_reasoning(const BayesianNetwork& network, const Assignment& evidence,
                                   std::string_view query_variable);

std::string evidence_text(const RandomVariable& var, std::string_view state);
std::string question_text(const RandomVariable& var, std::string_view state);

struct GenerationOptions {
  std::vector<PremiseKind> kinds{PremiseKind::Numeric, PremiseKind::Wep};
  wep::WepOptions wep;
  SamplingOptions sampling;
  const TextProvider* text_provider = nullptr;
};

/// Instance i draws from Rng::stream(seed, i); premises draw from a separate
/// stream. Instances are generated in parallel; output does not depend on
/// the thread count. Throws InvalidArgument (count = 0) and sampling errors
/// tagged with the instance index.
std::vector<DatasetInstance> generate_dataset(const BayesianNetwork& network, std::size_t count,
                                              std::uint64_t seed, const GenerationOptions& options = {});

/// Stream index reserved for premise verbalization.
inline constexpr std::uint64_t kPremiseStream = ~std::uint64_t{0};

// --- files ------------------------------------------------------------------

/// JSON Lines, one instance per line.
std::string to_jsonl(std::span<const DatasetInstance> instances);
std::vector<DatasetInstance> instances_from_jsonl(std::string_view text);

// --- statistics -------------------------------------------------------------

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;
};
MeanStd mean_std(std::span<const double> values);

struct DatasetStats {
  std::size_t networks = 0;
  std::size_t variables = 0;
  std::size_t premises_numeric = 0;
  std::size_t premises_wep = 0;
  std::size_t instances = 0;
  std::size_t evidence_statements = 0;
  std::size_t queries = 0;
  std::size_t causal = 0;
  std::size_t evidential = 0;
  std::size_t explaining_away = 0;
  std::size_t unlabeled = 0;
  MeanStd states_per_variable;
  MeanStd variables_per_network;
  MeanStd premises_per_network;
};

/// Premise counts come from the networks (one premise per CPT row and kind);
/// evidence, query and reasoning-type counts from the instances.
DatasetStats dataset_stats(std::span<const BayesianNetwork> networks, std::span<const DatasetInstance> instances);

}  // namespace bayesqa

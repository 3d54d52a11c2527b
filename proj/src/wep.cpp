#include "bayesqa/wep.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "bayesqa/error.hpp"

namespace bayesqa::wep {

namespace {

constexpr std::array<WepEntry, 17> kTable{{
    {"certain", 1.00, 0.0},
    {"almost certain", 0.95, 0.109},
    {"highly likely", 0.90, 0.084},
    {"very good chance", 0.80, 0.108},
    {"likely", 0.70, 0.113},
    {"probably", 0.70, 0.129},
    {"probable", 0.70, 0.147},
    {"better than even", 0.60, 0.091},
    {"about even", 0.50, 0.049},
    {"probably not", 0.25, 0.144},
    {"unlikely", 0.20, 0.150},
    {"little chance", 0.10, 0.122},
    {"chances are slight", 0.10, 0.109},
    {"improbable", 0.10, 0.175},
    {"highly unlikely", 0.05, 0.173},
    {"almost no chance", 0.02, 0.170},
    {"impossible", 0.00, 0.0},
}};

constexpr std::string_view kAboutEven = "about even";
constexpr std::string_view kProbablyNot = "probably not";

// Distances closer than this count as ties (0.75 is as far from 0.7 as from 0.8).
constexpr double kTieTolerance = 1e-12;

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidProbability, fmt::format("{} is not a probability", p));
  }
}

// Phrases grouped by distance from p: [0] closest, [1] second closest.
std::array<std::vector<const WepEntry*>, 2> candidates(double p) {
  std::vector<double> distances;
  for (const auto& e : kTable) distances.push_back(std::abs(p - e.anchor));
  std::vector<double> levels = distances;
  std::sort(levels.begin(), levels.end());
  std::vector<double> distinct;
  for (double d : levels) {
    if (distinct.empty() || d - distinct.back() > kTieTolerance) distinct.push_back(d);
  }

  std::array<std::vector<const WepEntry*>, 2> out;
  for (std::size_t rank = 0; rank < 2 && rank < distinct.size(); ++rank) {
    for (std::size_t i = 0; i < kTable.size(); ++i) {
      if (std::abs(distances[i] - distinct[rank]) <= kTieTolerance) out[rank].push_back(&kTable[i]);
    }
  }
  return out;
}

std::string_view apply_about_even_rule(std::string_view phrase, double p) {
  return (phrase == kAboutEven && p < kAboutEvenFloor) ? kProbablyNot : phrase;
}

}  // namespace

std::span<const WepEntry> table() { return kTable; }

WepSelection prob_to_wep(double p, Rng& rng, const WepOptions& options) {
  require_probability(p);
  if (p == 1.0) return {"certain", false};
  if (p == 0.0) return {"impossible", false};

  const auto sets = candidates(p);
  const bool second = rng.uniform01() < options.second_closest_rate && !sets[1].empty();
  const auto& pool = second ? sets[1] : sets[0];
  const WepEntry* pick = pool[rng.uniform_index(pool.size())];
  return {std::string(apply_about_even_rule(pick->phrase, p)), second};
}

double primary_anchor(double p) {
  require_probability(p);
  const auto sets = candidates(p);
  // Ties among the closest phrases share one anchor value.
  const WepEntry* closest = sets[0].front();
  return apply_about_even_rule(closest->phrase, p) == kProbablyNot ? wep_to_prob(kProbablyNot) : closest->anchor;
}

double wep_to_prob(std::string_view phrase) {
  auto trimmed = phrase;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);
  for (const auto& e : kTable) {
    if (e.phrase.size() != trimmed.size()) continue;
    const bool same = std::equal(e.phrase.begin(), e.phrase.end(), trimmed.begin(), [](char a, char b) {
      return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    if (same) return e.anchor;
  }
  throw Error(ErrorKind::UnknownPhrase, fmt::format("'{}' is not in the phrase table", phrase));
}

Verbalization verbalize_distribution(std::span<const double> probabilities, Rng& rng, const WepOptions& options) {
  if (probabilities.empty()) throw Error(ErrorKind::InvalidDistribution, "empty distribution");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidDistribution, fmt::format("{} is not a probability", p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorKind::InvalidDistribution, fmt::format("probabilities sum to {}", sum));
  }

  Verbalization out;
  const auto [lo, hi] = std::minmax_element(probabilities.begin(), probabilities.end());
  if (probabilities.size() > 1 && *hi - *lo <= 1e-9) {
    out.equally_likely = true;
    return out;
  }
  for (double p : probabilities) out.phrases.push_back(prob_to_wep(p, rng, options));

  if (primary_anchor(*hi) <= wep_to_prob(kProbablyNot)) {
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
      if (*hi - probabilities[i] <= 1e-9) out.most_likely.push_back(i);
    }
  }
  return out;
}

}  // namespace bayesqa::wep

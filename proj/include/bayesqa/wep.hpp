#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bayesqa/rng.hpp"

namespace bayesqa::wep {

/// A word of estimative probability and the probability it stands for.
/// `spread` is the reported ± range; it is informational only.
struct WepEntry {
  std::string_view phrase;
  double anchor;
  double spread;
};

/// The 17 phrases, ordered from "certain" down to "impossible".
std::span<const WepEntry> table();

inline constexpr double kDefaultSecondClosestRate = 0.10;
/// Values below this never verbalize as "about even".
inline constexpr double kAboutEvenFloor = 0.45;

struct WepSelection {
  std::string phrase;
  bool used_second_closest = false;

  friend bool operator==(const WepSelection&, const WepSelection&) = default;
};

struct WepOptions {
  // Probability of picking from the second-closest anchor instead of the closest.
  double second_closest_rate = kDefaultSecondClosestRate;
};

/// Closest phrase (uniform among ties), or with probability
/// `second_closest_rate` a phrase of the next-closest anchor. A selected
/// "about even" for p < 0.45 becomes "probably not". p = 0 and p = 1 map to
/// "impossible" and "certain" without drawing. Throws InvalidProbability.
WepSelection prob_to_wep(double p, Rng& rng, const WepOptions& options = {});

/// Anchor of the closest phrase with the "about even" exception applied and
/// no randomness.
double primary_anchor(double p);

/// Case-insensitive lookup. Throws UnknownPhrase.
double wep_to_prob(std::string_view phrase);

struct Verbalization {
  // All states equally probable: one "equally likely" statement, no phrases.
  bool equally_likely = false;
  std::vector<WepSelection> phrases;
  // Indices of the most likely state(s), filled when even the largest
  // probability verbalizes at or below "probably not".
  std::vector<std::size_t> most_likely;
};

/// Throws InvalidDistribution.
Verbalization verbalize_distribution(std::span<const double> probabilities, Rng& rng,
                                     const WepOptions& options = {});

}  // namespace bayesqa::wep

#pragma once

#include <cstddef>
#include <vector>

namespace bayesqa::detail {

/// Table factor over a sorted set of variable indices. Values are laid out
/// with the first variable varying fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  std::size_t stride_of(std::size_t var) const;
  bool contains(std::size_t var) const;
};

Factor scalar_factor(double value);
Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, std::size_t var);

}  // namespace bayesqa::detail

#include "factor.hpp"

#include <algorithm>
#include <cassert>

namespace bayesqa::detail {

std::size_t Factor::stride_of(std::size_t var) const {
  std::size_t stride = 1;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] == var) return stride;
    stride *= cards[i];
  }
  return 0;
}

bool Factor::contains(std::size_t var) const {
  return std::binary_search(vars.begin(), vars.end(), var);
}

Factor scalar_factor(double value) { return Factor{{}, {}, {value}}; }

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  std::size_t size = 1;
  std::vector<std::size_t> stride_a, stride_b;
  for (std::size_t v : out.vars) {
    std::size_t card = 0;
    for (std::size_t i = 0; i < a.vars.size(); ++i)
      if (a.vars[i] == v) card = a.cards[i];
    for (std::size_t i = 0; i < b.vars.size(); ++i)
      if (b.vars[i] == v) card = b.cards[i];
    out.cards.push_back(card);
    stride_a.push_back(a.stride_of(v));
    stride_b.push_back(b.stride_of(v));
    size *= card;
  }

  out.values.resize(size);
  std::vector<std::size_t> digit(out.vars.size(), 0);
  std::size_t j = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < size; ++i) {
    out.values[i] = a.values[j] * b.values[k];
    for (std::size_t l = 0; l < digit.size(); ++l) {
      if (++digit[l] == out.cards[l]) {
        digit[l] = 0;
        j -= (out.cards[l] - 1) * stride_a[l];
        k -= (out.cards[l] - 1) * stride_b[l];
      } else {
        j += stride_a[l];
        k += stride_b[l];
        break;
      }
    }
  }
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  auto it = std::find(f.vars.begin(), f.vars.end(), var);
  assert(it != f.vars.end());
  const std::size_t pos = static_cast<std::size_t>(it - f.vars.begin());
  const std::size_t stride = f.stride_of(var);
  const std::size_t card = f.cards[pos];

  Factor out;
  out.vars = f.vars;
  out.cards = f.cards;
  out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
  out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
  out.values.assign(f.values.size() / card, 0.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const std::size_t low = i % stride;
    const std::size_t high = i / (stride * card);
    out.values[high * stride + low] += f.values[i];
  }
  return out;
}

}  // namespace bayesqa::detail

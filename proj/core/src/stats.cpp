#include "gower/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/sort/spreadsort/integer_sort.hpp>

namespace gower {
namespace {

// Order-preserving map from IEEE doubles to unsigned integers.
std::uint64_t sortable_key(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  return (bits & 0x8000000000000000ULL) ? ~bits : bits | 0x8000000000000000ULL;
}

}  // namespace

void sort_order(std::span<const double> values, std::vector<std::uint64_t>& keys,
                std::vector<std::uint32_t>& order) {
  const std::size_t n = values.size();
  keys.resize(n);
  order.resize(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = sortable_key(values[i]);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  // integer_sort is not stable; break ties on index to keep the order total.
  boost::sort::spreadsort::integer_sort(
      order.begin(), order.end(),
      [&](std::uint32_t idx, unsigned offset) { return keys[idx] >> offset; },
      [&](std::uint32_t a, std::uint32_t b) {
        return keys[a] < keys[b] || (keys[a] == keys[b] && a < b);
      });
}

void average_ranks(std::span<const double> values, std::span<double> ranks,
                   std::vector<std::uint64_t>& keys, std::vector<std::uint32_t>& order) {
  const std::size_t n = values.size();
  if (ranks.size() != n) throw std::invalid_argument("average_ranks: size mismatch");
  sort_order(values, keys, order);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i+1 .. j share their mean
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<double> ranks(values.size());
  std::vector<std::uint64_t> keys;
  std::vector<std::uint32_t> order;
  average_ranks(values, ranks, keys, order);
  return ranks;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty sequence");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("sample_sd needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sequence");
  if (level < 0.0 || level > 1.0) throw std::invalid_argument("quantile level outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace gower

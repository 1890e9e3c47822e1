#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gower {

/// Fractional (average) ranks, 1-based: tied values share the mean of the
/// positions they occupy. NaN inputs are not allowed.
std::vector<double> average_ranks(std::span<const double> values);

/// Same as average_ranks, writing into caller-owned buffers so hot loops do
/// not allocate. `order` is scratch space.
void average_ranks(std::span<const double> values, std::span<double> ranks,
                   std::vector<std::uint64_t>& keys, std::vector<std::uint32_t>& order);

/// Indices of `values` in ascending order; ties keep index order.
void sort_order(std::span<const double> values, std::vector<std::uint64_t>& keys,
                std::vector<std::uint32_t>& order);

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator). Requires n >= 2.
double sample_sd(std::span<const double> values);

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" estimator). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double level);

}  // namespace gower

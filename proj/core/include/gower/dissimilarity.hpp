#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gower/dataset.hpp"

namespace gower {

/// Sentinel for pairs whose dissimilarity is undefined (no variable
/// contributes). Nearest-neighbour consumers treat it as farther than any
/// defined value.
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool is_defined(double d) { return !std::isnan(d); }

/// Condensed (i < j) pair indexing over n units, m = n(n-1)/2 slots,
/// row-major: (0,1), (0,2), ..., (0,n-1), (1,2), ...
struct PairIndex {
  std::size_t i = 0;
  std::size_t j = 0;

  static std::size_t count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }
  static std::size_t offset(std::size_t n, std::size_t i, std::size_t j);
  static PairIndex from_offset(std::size_t n, std::size_t offset);

  bool operator==(const PairIndex&) const = default;
};

/// Per-variable result of comparing two cells.
struct VariableDissim {
  double d = 0.0;
  bool delta = false;  // false: the variable does not contribute
};

/// How a column is compared after preparation.
enum class CompareRule {
  kMatching,     // binary-symmetric and nominal: simple matching
  kJaccard,      // binary-asymmetric: double absence does not count
  kRangeScaled,  // numeric, and ordinal after transform
};

/// Per-variable comparison rule. Missing operands are std::nullopt.
/// For kRangeScaled, `range` must be > 0 and the result is clamped to 1.
VariableDissim variable_dissim(CompareRule rule, std::optional<double> xi, std::optional<double> xj,
                               double range = 0.0);

/// Kind-level convenience matching the table rows: binary-asymmetric
/// presence is level index 1.
VariableDissim variable_dissim(ColumnKind kind, std::optional<double> xi, std::optional<double> xj,
                               double range = 0.0);

enum class OrdinalTreatment { kKaufmanRousseeuw, kPodani };

struct DissimilarityOptions {
  OrdinalTreatment ordinal = OrdinalTreatment::kKaufmanRousseeuw;
  bool declared_levels = false;  // KR max(o) from declared levels
};

/// A table mapped onto comparable per-column values.
struct EncodedColumn {
  CompareRule rule = CompareRule::kMatching;
  double range = 0.0;  // kRangeScaled only; 0 means every pair compares as 0
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
};

struct EncodedTable {
  std::size_t rows = 0;
  std::vector<EncodedColumn> columns;
};

/// Scaling fitted on a reference table: ranges and ordinal transforms are
/// frozen so that query tables are measured on the same yardstick.
class GowerModel {
 public:
  static GowerModel fit(const DataTable& reference, const DissimilarityOptions& options = {});

  const Schema& schema() const noexcept { return schema_; }
  std::size_t variables() const noexcept { return columns_.size(); }
  CompareRule rule(std::size_t t) const { return columns_.at(t).rule; }
  double range(std::size_t t) const { return columns_.at(t).range; }
  /// Warnings raised while fitting (zero ranges, degenerate ordinals).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Throws gower::Error when the table schema differs from the reference.
  EncodedTable encode(const DataTable& table) const;

 private:
  struct Scaling {
    CompareRule rule = CompareRule::kMatching;
    double range = 0.0;
    std::vector<double> level_values;  // ordinal: level index -> transformed value
  };
  Schema schema_;
  std::vector<Scaling> columns_;
  std::vector<std::string> warnings_;
};

/// d_ijt and delta_ijt for a set of unit pairs and every variable. Stored
/// variable-major so each variable's pair vector is contiguous.
class PerVariableDissimilarity {
 public:
  PerVariableDissimilarity() = default;
  PerVariableDissimilarity(std::size_t units, std::size_t pairs, std::size_t variables,
                           bool condensed);

  std::size_t units() const noexcept { return units_; }
  std::size_t pairs() const noexcept { return pairs_; }
  std::size_t variables() const noexcept { return variables_; }
  /// True when the pairs are all n(n-1)/2 pairs in condensed order.
  bool condensed() const noexcept { return condensed_; }
  /// True when every delta is 1.
  bool complete() const;

  std::span<const double> d(std::size_t t) const {
    return {d_.data() + t * pairs_, pairs_};
  }
  std::span<const std::uint8_t> delta(std::size_t t) const {
    return {delta_.data() + t * pairs_, pairs_};
  }
  std::span<double> d(std::size_t t) { return {d_.data() + t * pairs_, pairs_}; }
  std::span<std::uint8_t> delta(std::size_t t) { return {delta_.data() + t * pairs_, pairs_}; }

 private:
  std::size_t units_ = 0;
  std::size_t pairs_ = 0;
  std::size_t variables_ = 0;
  bool condensed_ = false;
  std::vector<double> d_;
  std::vector<std::uint8_t> delta_;
};

/// All pairs of one table (ranges fitted on that table).
PerVariableDissimilarity per_variable_matrix(const DataTable& table,
                                             const DissimilarityOptions& options = {},
                                             unsigned threads = 1);
/// All pairs of an already encoded table.
PerVariableDissimilarity per_variable_matrix(const EncodedTable& encoded, unsigned threads = 1);
/// Selected pairs only (e.g. a subsample); the result is not condensed.
PerVariableDissimilarity per_variable_matrix(const EncodedTable& encoded,
                                             std::span<const PairIndex> pairs,
                                             unsigned threads = 1);

/// Condensed symmetric dissimilarity matrix with kUndefined for pairs that
/// share no contributing variable.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  DissimilarityMatrix(std::size_t units, std::vector<double> condensed);

  std::size_t units() const noexcept { return units_; }
  std::size_t pairs() const noexcept { return values_.size(); }
  std::span<const double> condensed() const noexcept { return values_; }
  /// 0 on the diagonal.
  double operator()(std::size_t i, std::size_t j) const;

 private:
  std::size_t units_ = 0;
  std::vector<double> values_;
};

/// rows x cols dissimilarities, row-major (rows = queries/recipients,
/// cols = reference units/donors).
class RectangularMatrix {
 public:
  RectangularMatrix() = default;
  RectangularMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Weighted average over contributing variables for every pair of `pvd`;
/// kUndefined where the contributing weight is zero. Weights must be
/// non-negative, sized p, not all zero. Equal weights take the unweighted
/// path, so uniform weights reproduce gower_unweighted bit for bit.
std::vector<double> aggregate(const PerVariableDissimilarity& pvd, std::span<const double> weights);
void aggregate(const PerVariableDissimilarity& pvd, std::span<const double> weights,
               std::span<double> out);

/// sum_t delta d / sum_t delta.
DissimilarityMatrix gower_unweighted(const PerVariableDissimilarity& pvd);
/// sum_t delta d w / sum_t delta w.
DissimilarityMatrix gower_weighted(const PerVariableDissimilarity& pvd,
                                   std::span<const double> weights);

/// Query-vs-reference weighted Gower. Ranges and ordinal transforms come
/// from the reference; range-scaled terms are clamped to [0, 1].
RectangularMatrix cross_dissimilarity(const DataTable& reference, const DataTable& query,
                                      std::span<const double> weights,
                                      const DissimilarityOptions& options = {},
                                      unsigned threads = 1);
RectangularMatrix cross_dissimilarity(const GowerModel& model, const EncodedTable& reference,
                                      const EncodedTable& query, std::span<const double> weights,
                                      unsigned threads = 1);

/// Checks weights are finite, non-negative, sized p and not all zero.
void check_weights(std::span<const double> weights, std::size_t variables);

}  // namespace gower

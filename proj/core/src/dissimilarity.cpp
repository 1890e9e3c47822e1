#include "gower/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gower/error.hpp"
#include "gower/parallel.hpp"
#include "gower/stats.hpp"

namespace gower {
namespace {

// Per-variable comparison on encoded values. Zero range compares as 0.
inline VariableDissim compare(CompareRule rule, double range, double a, bool a_missing, double b,
                              bool b_missing) {
  if (a_missing || b_missing) return {0.0, false};
  switch (rule) {
    case CompareRule::kMatching:
      return {a == b ? 0.0 : 1.0, true};
    case CompareRule::kJaccard: {
      const bool pa = a == 1.0;
      const bool pb = b == 1.0;
      if (!pa && !pb) return {0.0, false};
      return {pa && pb ? 0.0 : 1.0, true};
    }
    case CompareRule::kRangeScaled:
      if (range <= 0.0) return {0.0, true};
      return {std::min(1.0, std::fabs(a - b) / range), true};
  }
  return {0.0, false};
}

bool all_equal(std::span<const double> w) {
  return std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); });
}

CompareRule rule_for(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kBinarySymmetric:
    case ColumnKind::kNominal:
      return CompareRule::kMatching;
    case ColumnKind::kBinaryAsymmetric:
      return CompareRule::kJaccard;
    case ColumnKind::kOrdinal:
    case ColumnKind::kNumeric:
      return CompareRule::kRangeScaled;
  }
  return CompareRule::kMatching;
}

}  // namespace

std::size_t PairIndex::offset(std::size_t n, std::size_t i, std::size_t j) {
  if (i == j || i >= n || j >= n) throw Error("PairIndex: invalid pair");
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

PairIndex PairIndex::from_offset(std::size_t n, std::size_t k) {
  const std::size_t m = count(n);
  if (k >= m) throw Error("PairIndex: offset out of range");
  // Row i starts at i*n - i*(i+1)/2; estimate i, then correct for rounding.
  const double nn = static_cast<double>(n);
  const double disc = (2.0 * nn - 1.0) * (2.0 * nn - 1.0) - 8.0 * static_cast<double>(k);
  auto i = static_cast<std::size_t>(std::max(0.0, std::floor(((2.0 * nn - 1.0) - std::sqrt(disc)) / 2.0)));
  auto row_start = [n](std::size_t r) { return r * n - r * (r + 1) / 2; };
  while (i > 0 && row_start(i) > k) --i;
  while (i + 1 < n && row_start(i + 1) <= k) ++i;
  return {i, k - row_start(i) + i + 1};
}

VariableDissim variable_dissim(CompareRule rule, std::optional<double> xi, std::optional<double> xj,
                               double range) {
  if (rule == CompareRule::kRangeScaled && range <= 0.0)
    throw Error("variable_dissim: range must be positive for range-scaled variables");
  return compare(rule, range, xi.value_or(0.0), !xi, xj.value_or(0.0), !xj);
}

VariableDissim variable_dissim(ColumnKind kind, std::optional<double> xi, std::optional<double> xj,
                               double range) {
  return variable_dissim(rule_for(kind), xi, xj, range);
}

GowerModel GowerModel::fit(const DataTable& reference, const DissimilarityOptions& options) {
  GowerModel model;
  model.schema_ = reference.schema();
  for (std::size_t t = 0; t < reference.cols(); ++t) {
    const auto& spec = reference.column_schema(t);
    const auto& col = reference.column(t);
    Scaling s;
    s.rule = rule_for(spec.kind);
    const bool any_present =
        std::any_of(col.missing.begin(), col.missing.end(), [](auto m) { return m == 0; });
    if (spec.kind == ColumnKind::kNumeric) {
      if (any_present) s.range = column_range(col.values, col.missing);
    } else if (spec.kind == ColumnKind::kOrdinal && any_present) {
      const std::size_t levels = spec.levels.size();
      s.level_values.assign(levels, 0.0);
      if (options.ordinal == OrdinalTreatment::kKaufmanRousseeuw) {
        std::size_t lo = levels, hi = 0;
        for (std::size_t i = 0; i < reference.rows(); ++i) {
          if (col.is_missing(i)) continue;
          lo = std::min(lo, col.code(i));
          hi = std::max(hi, col.code(i));
        }
        const double max_position = options.declared_levels ? static_cast<double>(levels)
                                                            : static_cast<double>(hi + 1);
        if (max_position > 1.0) {
          for (std::size_t c = 0; c < levels; ++c)
            s.level_values[c] = static_cast<double>(c) / (max_position - 1.0);
          s.range = s.level_values[hi] - s.level_values[lo];
        }
      } else {
        // Average ranks of the observed cells; a level that never occurs in
        // the reference sits half a rank above everything below it.
        std::vector<double> present;
        for (std::size_t i = 0; i < reference.rows(); ++i)
          if (!col.is_missing(i)) present.push_back(col.values[i]);
        const auto ranks = average_ranks(present);
        std::map<std::size_t, double> level_rank;
        for (std::size_t k = 0; k < present.size(); ++k)
          level_rank[static_cast<std::size_t>(present[k])] = ranks[k];
        for (std::size_t c = 0; c < levels; ++c) {
          if (auto it = level_rank.find(c); it != level_rank.end()) {
            s.level_values[c] = it->second;
          } else {
            const auto below = std::count_if(present.begin(), present.end(),
                                             [c](double v) { return v < static_cast<double>(c); });
            s.level_values[c] = static_cast<double>(below) + 0.5;
          }
        }
        const auto [mn, mx] = std::minmax_element(ranks.begin(), ranks.end());
        s.range = *mx - *mn;
      }
    }
    if (s.rule == CompareRule::kRangeScaled) {
      if (!any_present)
        model.warnings_.push_back("column '" + spec.name + "' is entirely missing");
      else if (s.range <= 0.0)
        model.warnings_.push_back("column '" + spec.name +
                                  "' has zero range; its dissimilarities are 0");
    }
    model.columns_.push_back(std::move(s));
  }
  return model;
}

EncodedTable GowerModel::encode(const DataTable& table) const {
  if (table.schema() != schema_) throw Error("schema mismatch between reference and query tables");
  EncodedTable out;
  out.rows = table.rows();
  out.columns.resize(columns_.size());
  for (std::size_t t = 0; t < columns_.size(); ++t) {
    const auto& s = columns_[t];
    const auto& col = table.column(t);
    auto& e = out.columns[t];
    e.rule = s.rule;
    e.range = s.range;
    e.missing = col.missing;
    e.values = col.values;
    if (!s.level_values.empty()) {
      for (std::size_t i = 0; i < table.rows(); ++i)
        if (!col.is_missing(i)) e.values[i] = s.level_values[col.code(i)];
    }
  }
  return out;
}

PerVariableDissimilarity::PerVariableDissimilarity(std::size_t units, std::size_t pairs,
                                                   std::size_t variables, bool condensed)
    : units_(units),
      pairs_(pairs),
      variables_(variables),
      condensed_(condensed),
      d_(pairs * variables, 0.0),
      delta_(pairs * variables, 0) {
  if (condensed && pairs != PairIndex::count(units))
    throw Error("condensed pair count does not match unit count");
}

bool PerVariableDissimilarity::complete() const {
  return std::all_of(delta_.begin(), delta_.end(), [](auto v) { return v != 0; });
}

PerVariableDissimilarity per_variable_matrix(const EncodedTable& encoded, unsigned threads) {
  const std::size_t n = encoded.rows;
  const std::size_t p = encoded.columns.size();
  PerVariableDissimilarity pvd(n, PairIndex::count(n), p, true);
  parallel_for(n, worker_count(threads, n), [&](std::size_t i, std::size_t) {
    if (i + 1 >= n) return;
    const std::size_t base = PairIndex::offset(n, i, i + 1);
    for (std::size_t t = 0; t < p; ++t) {
      const auto& c = encoded.columns[t];
      auto d = pvd.d(t);
      auto delta = pvd.delta(t);
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto r = compare(c.rule, c.range, c.values[i], c.missing[i], c.values[j], c.missing[j]);
        d[base + j - i - 1] = r.d;
        delta[base + j - i - 1] = r.delta ? 1 : 0;
      }
    }
  });
  return pvd;
}

PerVariableDissimilarity per_variable_matrix(const EncodedTable& encoded,
                                             std::span<const PairIndex> pairs, unsigned threads) {
  const std::size_t p = encoded.columns.size();
  PerVariableDissimilarity pvd(encoded.rows, pairs.size(), p, false);
  for (const auto& pr : pairs)
    if (pr.i >= encoded.rows || pr.j >= encoded.rows || pr.i == pr.j)
      throw Error("per_variable_matrix: invalid pair");
  parallel_for(p, worker_count(threads, p), [&](std::size_t t, std::size_t) {
    const auto& c = encoded.columns[t];
    auto d = pvd.d(t);
    auto delta = pvd.delta(t);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      const auto r = compare(c.rule, c.range, c.values[i], c.missing[i], c.values[j], c.missing[j]);
      d[k] = r.d;
      delta[k] = r.delta ? 1 : 0;
    }
  });
  return pvd;
}

PerVariableDissimilarity per_variable_matrix(const DataTable& table,
                                             const DissimilarityOptions& options,
                                             unsigned threads) {
  const auto model = GowerModel::fit(table, options);
  return per_variable_matrix(model.encode(table), threads);
}

void check_weights(std::span<const double> weights, std::size_t variables) {
  if (weights.size() != variables)
    throw Error("weight vector has " + std::to_string(weights.size()) + " entries, expected " +
                std::to_string(variables));
  bool any_positive = false;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw Error("weights must be finite and non-negative");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw Error("weights are all zero");
}

void aggregate(const PerVariableDissimilarity& pvd, std::span<const double> weights,
               std::span<double> out) {
  check_weights(weights, pvd.variables());
  const std::size_t m = pvd.pairs();
  const std::size_t p = pvd.variables();
  if (out.size() != m) throw Error("aggregate: output size mismatch");
  const bool uniform = all_equal(weights);
  for (std::size_t k = 0; k < m; ++k) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < p; ++t) {
      if (!pvd.delta(t)[k]) continue;
      const double w = uniform ? 1.0 : weights[t];
      num += pvd.d(t)[k] * w;
      den += w;
    }
    out[k] = den > 0.0 ? num / den : kUndefined;
  }
}

std::vector<double> aggregate(const PerVariableDissimilarity& pvd, std::span<const double> weights) {
  std::vector<double> out(pvd.pairs());
  aggregate(pvd, weights, out);
  return out;
}

DissimilarityMatrix::DissimilarityMatrix(std::size_t units, std::vector<double> condensed)
    : units_(units), values_(std::move(condensed)) {
  if (values_.size() != PairIndex::count(units)) throw Error("condensed size does not match units");
}

double DissimilarityMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i == j) {
    if (i >= units_) throw Error("DissimilarityMatrix: index out of range");
    return 0.0;
  }
  return values_[PairIndex::offset(units_, i, j)];
}

RectangularMatrix::RectangularMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) throw Error("rectangular matrix size mismatch");
}

DissimilarityMatrix gower_unweighted(const PerVariableDissimilarity& pvd) {
  if (!pvd.condensed()) throw Error("gower_unweighted needs the full set of pairs");
  std::vector<double> ones(pvd.variables(), 1.0);
  return DissimilarityMatrix(pvd.units(), aggregate(pvd, ones));
}

DissimilarityMatrix gower_weighted(const PerVariableDissimilarity& pvd,
                                   std::span<const double> weights) {
  if (!pvd.condensed()) throw Error("gower_weighted needs the full set of pairs");
  return DissimilarityMatrix(pvd.units(), aggregate(pvd, weights));
}

RectangularMatrix cross_dissimilarity(const GowerModel& model, const EncodedTable& reference,
                                      const EncodedTable& query, std::span<const double> weights,
                                      unsigned threads) {
  const std::size_t p = model.variables();
  check_weights(weights, p);
  if (reference.columns.size() != p || query.columns.size() != p)
    throw Error("cross_dissimilarity: encoded tables do not match the model");
  const bool uniform = all_equal(weights);
  const std::size_t rows = query.rows;
  const std::size_t cols = reference.rows;
  std::vector<double> out(rows * cols);
  parallel_for(rows, worker_count(threads, rows), [&](std::size_t q, std::size_t) {
    for (std::size_t r = 0; r < cols; ++r) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t t = 0; t < p; ++t) {
        const auto& qc = query.columns[t];
        const auto& rc = reference.columns[t];
        // reference unit plays the "i" role so that a table against itself
        // reproduces the condensed arithmetic exactly
        const auto v = compare(rc.rule, rc.range, rc.values[r], rc.missing[r], qc.values[q],
                               qc.missing[q]);
        if (!v.delta) continue;
        const double w = uniform ? 1.0 : weights[t];
        num += v.d * w;
        den += w;
      }
      out[q * cols + r] = den > 0.0 ? num / den : kUndefined;
    }
  });
  return RectangularMatrix(rows, cols, std::move(out));
}

RectangularMatrix cross_dissimilarity(const DataTable& reference, const DataTable& query,
                                      std::span<const double> weights,
                                      const DissimilarityOptions& options, unsigned threads) {
  const auto model = GowerModel::fit(reference, options);
  return cross_dissimilarity(model, model.encode(reference), model.encode(query), weights, threads);
}

}  // namespace gower

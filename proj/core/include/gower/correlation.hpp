#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gower/dissimilarity.hpp"

namespace gower {

/// How the overall weighted dissimilarity is correlated with each
/// per-variable dissimilarity.
enum class CorrelationMode {
  kPearson,           // wPG: Pearson for every variable
  kPearsonBiserial,   // wPbG: Brogden biserial for 0/1 variables, Pearson otherwise
  kSpearman,          // wSG: Spearman for every variable
  kSpearmanBiserial,  // wSbG: rank biserial for 0/1 variables, Spearman otherwise
};

std::string_view mode_name(CorrelationMode mode);
/// Accepts the names case-insensitively (wPG, wPbG, wSG, wSbG).
CorrelationMode parse_mode(std::string_view text);

/// Selection mask: nonzero entries are used. An empty mask selects all.
using Mask = std::span<const std::uint8_t>;

// All estimators return std::nullopt when undefined (too few points, zero
// variance, an empty group).

std::optional<double> pearson(std::span<const double> x, std::span<const double> y, Mask mask = {});
std::optional<double> spearman(std::span<const double> x, std::span<const double> y,
                               Mask mask = {});

/// Mean difference over the sample standard deviation scaled by
/// sqrt(m/(m-1) p(1-p)); identical to Pearson against a 0/1 variable.
std::optional<double> point_biserial(std::span<const double> dwg, std::span<const double> dt,
                                     Mask mask = {});

/// Which quantity sets h in Brogden's D_h.
enum class BrogdenSplit {
  kGroupMeans,  // h = floor(m * max(mean0, mean1)), group means of dwg
  kProportion,  // h = floor(m * proportion of ones)
};

struct BrogdenOptions {
  BrogdenSplit split = BrogdenSplit::kGroupMeans;
  bool clip = false;  // clamp the estimate into [-1, 1]
};

/// Brogden's biserial estimator (mean1 - mean0) / D_h, with D_h the mean of
/// the h largest dwg values minus the mean of the rest; h is clamped into
/// [1, m-1]. Unclipped values can exceed 1 in magnitude.
std::optional<double> brogden_biserial(std::span<const double> dwg, std::span<const double> dt,
                                       Mask mask = {}, BrogdenOptions options = {});

/// 2 (mean rank of ones - mean rank of zeros) / m, average ranks of dwg.
std::optional<double> rank_biserial(std::span<const double> dwg, std::span<const double> dt,
                                    Mask mask = {});

struct CorrelationOptions {
  BrogdenOptions brogden;
};

struct CorrelationProfile {
  std::vector<double> r;                   // NaN where undefined
  std::vector<std::uint8_t> defined;
  std::vector<std::uint8_t> dichotomous;   // d_t only takes values 0 and 1

  std::size_t size() const { return r.size(); }
  std::size_t undefined_count() const;
};

/// Reusable evaluator of the correlation profile for one set of pair
/// dissimilarities. Per-variable quantities that do not depend on the
/// weights are computed once. `evaluate` is const and thread-safe as long
/// as each thread passes its own Workspace.
class ProfileEvaluator {
 public:
  struct Workspace {
    std::vector<double> dwg;
    std::vector<double> dwg_ranks;
    std::vector<double> scratch;
    std::vector<double> x, y, rx;
    std::vector<std::uint64_t> keys;
    std::vector<std::uint32_t> order;
    bool ranks_ready = false;
  };

  ProfileEvaluator(const PerVariableDissimilarity& pvd, CorrelationMode mode,
                   CorrelationOptions options = {});

  CorrelationMode mode() const noexcept { return mode_; }
  std::size_t variables() const noexcept { return vars_.size(); }
  bool dichotomous(std::size_t t) const { return vars_.at(t).dichotomous; }
  const PerVariableDissimilarity& pvd() const noexcept { return *pvd_; }

  void evaluate(std::span<const double> weights, Workspace& ws, CorrelationProfile& out) const;
  CorrelationProfile evaluate(std::span<const double> weights) const;

 private:
  struct VariableInfo {
    bool dichotomous = false;
    bool all_delta = false;          // every pair contributes
    std::vector<double> ranks;       // ranks of d_t over its contributing pairs (Spearman)
  };

  std::optional<double> correlate(std::size_t t, std::span<const double> weights,
                                  Workspace& ws) const;

  const PerVariableDissimilarity* pvd_;
  CorrelationMode mode_;
  CorrelationOptions options_;
  std::vector<VariableInfo> vars_;
};

CorrelationProfile correlation_profile(const PerVariableDissimilarity& pvd,
                                       std::span<const double> weights, CorrelationMode mode,
                                       CorrelationOptions options = {});

}  // namespace gower

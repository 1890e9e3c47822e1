#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gower/correlation.hpp"
#include "gower/dataset.hpp"
#include "gower/dissimilarity.hpp"

namespace gower {

/// Non-negative variable weights normalized to sum to one.
class WeightVector {
 public:
  WeightVector() = default;

  static WeightVector uniform(std::size_t p);
  /// Throws gower::Error on negative, non-finite or all-zero input.
  static WeightVector normalized(std::vector<double> raw);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t t) const { return w_[t]; }
  std::span<const double> values() const noexcept { return w_; }
  operator std::span<const double>() const noexcept { return w_; }

 private:
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

/// The five dissimilarity variants compared in the experiments: unweighted
/// Gower plus one fitted weighting per correlation mode.
enum class Weighting { kUnweighted, kPearson, kPearsonBiserial, kSpearman, kSpearmanBiserial };

std::string_view weighting_name(Weighting w);
Weighting parse_weighting(std::string_view text);  // "unwG", "wPG", ... (case-insensitive)
std::optional<CorrelationMode> correlation_mode(Weighting w);
std::vector<Weighting> all_weightings();

struct GaConfig {
  std::size_t population = 50;
  std::size_t generations = 200;
  double crossover = 0.8;
  double mutation = 0.1;        // per-gene probability
  double mutation_scale = 0.1;  // sd of the Gaussian perturbation
  double blend_alpha = 0.5;     // BLX-alpha extension on each side
  std::size_t elitism = 1;
  std::size_t stall = 50;       // generations without improvement before stopping
  std::uint64_t seed = 1;
  unsigned threads = 1;         // fitness evaluation workers; results do not depend on it

  void check() const;
};

/// Smaller search budget used by the repeated-fit simulation drivers.
inline GaConfig simulation_ga() {
  GaConfig cfg;
  cfg.population = 30;
  cfg.generations = 60;
  cfg.stall = 20;
  return cfg;
}

struct ObjectiveOptions {
  bool absolute = false;            // spread of |r| instead of signed r
  double undefined_penalty = 0.5;   // added per undefined correlation during search
};

struct ObjectiveValue {
  double spread = 0.0;  // sample sd of the defined correlations; NaN when < 2 defined
  std::size_t defined = 0;
  std::size_t undefined = 0;

  bool ok() const { return defined >= 2; }
  /// Search criterion: spread plus the undefined penalty; +inf when !ok().
  double penalized(double penalty) const;
};

ObjectiveValue profile_spread(const CorrelationProfile& profile, bool absolute = false);

/// Sample sd of the correlation profile at `weights`. Throws gower::Error
/// when fewer than two correlations are defined.
double objective(const PerVariableDissimilarity& pvd, std::span<const double> weights,
                 CorrelationMode mode, const CorrelationOptions& corr = {},
                 const ObjectiveOptions& options = {});

struct AnalyticSolution {
  std::vector<double> weights;  // sums to 1, may contain negatives
  double kappa = 0.0;           // common value of cov(dwg, d_t) / sd(d_t)
  bool feasible = false;        // all weights >= 0
};

/// Equal-Pearson-correlation weights for complete data, from the linear
/// system  sum_s w_s cov(d_s, d_t) - kappa sd(d_t) = 0 (every t),
/// sum_t w_t = 1. Throws gower::Error when a pair contributes partially,
/// a column is constant, two columns are perfectly correlated, or the
/// system is singular.
AnalyticSolution solve_analytic(const PerVariableDissimilarity& pvd);

struct GaResult {
  WeightVector weights;
  double objective = 0.0;            // spread at `weights` (NaN for p == 1)
  std::size_t undefined = 0;         // undefined correlations at `weights`
  std::vector<double> trace;         // best penalized objective per generation
  std::size_t generations = 0;       // generations run after generation 0
  std::size_t evaluations = 0;
};

/// Real-coded elitist GA over the probability simplex. Generation 0 holds
/// the uniform vector plus Dirichlet(1) draws, so the result is never worse
/// than uniform weights.
GaResult search_ga(const PerVariableDissimilarity& pvd, CorrelationMode mode, const GaConfig& cfg,
                   const CorrelationOptions& corr = {}, const ObjectiveOptions& options = {});

enum class FitPath { kTrivial, kAnalytic, kGenetic };
std::string_view path_name(FitPath path);

struct FitOptions {
  DissimilarityOptions dissimilarity;
  CorrelationOptions correlation;
  ObjectiveOptions objective;
  std::size_t max_pairs = 200'000;  // larger pair sets are subsampled
  bool allow_analytic = true;
};

struct FitResult {
  WeightVector weights;
  FitPath path = FitPath::kGenetic;
  double objective = 0.0;          // spread at the fitted weights
  double uniform_objective = 0.0;  // spread at uniform weights
  CorrelationProfile profile;      // at the fitted weights
  std::vector<double> trace;
  std::size_t pairs_used = 0;
  std::vector<std::string> notes;
};

/// Front door: builds the pair dissimilarities (subsampled above
/// max_pairs), takes the analytic route for Pearson on complete data when
/// it gives non-negative weights, and runs the GA otherwise.
FitResult fit_weights(const DataTable& table, CorrelationMode mode, const GaConfig& cfg,
                      const FitOptions& options = {});
FitResult fit_weights(const PerVariableDissimilarity& pvd, CorrelationMode mode,
                      const GaConfig& cfg, const FitOptions& options = {});

/// Uniformly sampled distinct pairs (sorted by condensed offset).
std::vector<PairIndex> sample_pairs(std::size_t units, std::size_t count, std::uint64_t seed);

}  // namespace gower

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gower/dataset.hpp"
#include "gower/dissimilarity.hpp"
#include "gower/random.hpp"
#include "gower/weights.hpp"

namespace gower {

/// Synthetic single-person household survey: income, expenditure,
/// education (ordinal, 8 levels), marital (nominal, 4), working (nominal,
/// 3: employed, retired, not-employed). Income and expenditure are
/// lognormal with status-dependent location; log expenditure is linear in
/// log income plus noise.
DataTable generate_survey_proxy(std::uint64_t seed, std::size_t units = 477);

/// Same table with education declared nominal.
DataTable with_nominal_education(const DataTable& proxy);

struct MarConfig {
  std::string target = "expenditure";
  std::string conditioning = "working";
  std::map<std::string, double> probabilities{{"employed", 0.5}};
  double default_probability = 0.1;  // categories absent from the map
  std::uint64_t seed = 1;

  void check() const;
};

struct MarSplit {
  std::vector<std::size_t> recipients;  // ascending unit indices with the target masked
  std::vector<std::size_t> donors;      // ascending
  std::vector<double> truth;            // target value of each recipient
};

/// Masks the target of each unit with its conditioning category's
/// probability. Throws when no donor remains.
MarSplit simulate_mar(const DataTable& table, const MarConfig& cfg);

/// Index of the nearest donor for every recipient row of `dissim`
/// (recipients x donors). Exact ties are broken uniformly at random.
std::vector<std::size_t> nearest_donors(const RectangularMatrix& dissim, Rng& rng);

/// Nearest-neighbour donor imputation: each recipient receives the target
/// value of its least dissimilar donor (weighted Gower on the auxiliary
/// columns, ranges from the donors).
std::vector<double> nnd_impute(const DataTable& recipients, const DataTable& donors,
                               std::span<const double> donor_values,
                               std::span<const double> weights, Rng& rng,
                               const DissimilarityOptions& options = {}, unsigned threads = 1);

struct TotalsMetrics {
  double srb = 0.0;
  double srrmse = 0.0;
};

/// Relative bias and relative RMSE of reconstructed totals against the
/// true total. Throws when the true total is 0 or no totals are given.
TotalsMetrics metric_totals(double true_total, std::span<const double> reconstructed_totals);

inline constexpr std::array<double, 6> kSdqLevels{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

/// Mean absolute gap between the kSdqLevels quantiles of two samples.
double quantile_gap(std::span<const double> truth, std::span<const double> reconstructed);

/// quantile_gap averaged over replications.
double metric_sdq(std::span<const double> truth,
                  std::span<const std::vector<double>> reconstructed);

struct ImputationMetrics {
  double srb = 0.0;
  double srrmse = 0.0;
  double sdq = 0.0;
  std::size_t replications = 0;
};

/// All three metrics from full reconstructed target vectors.
ImputationMetrics imputation_metrics(std::span<const double> truth,
                                     std::span<const std::vector<double>> reconstructed);

struct ImputeExperimentConfig {
  std::size_t units = 477;
  std::size_t variables = 4;  // 2: income, education; 4: + marital, working
  std::vector<Weighting> weightings = all_weightings();
  std::size_t replications = 250;
  MarConfig mar;                 // seed is replaced per replication
  bool fit_all_units = false;    // fit weights on every unit instead of donors only
  bool education_nominal = false;
  GaConfig ga = simulation_ga();
  FitOptions fit{.max_pairs = 10'000};
  std::uint64_t seed = 1;
  unsigned threads = 1;  // replications run in parallel; output does not depend on it

  void check() const;
};

struct ImputeSummaryRow {
  Weighting weighting = Weighting::kUnweighted;
  std::vector<double> mean_weights;
  ImputationMetrics metrics;
};

struct ImputeSummary {
  std::vector<std::string> variables;  // auxiliary columns, weight order
  std::vector<ImputeSummaryRow> rows;
  std::size_t replications = 0;        // successful replications
  double mean_missing_fraction = 0.0;
  std::vector<std::string> failures;

  const ImputeSummaryRow& row(Weighting w) const;
};

/// Auxiliary columns for a variable-set size (2 or 4).
std::vector<std::string> impute_variables(std::size_t count);

/// Runs the MAR + NND replications on a given table (target and
/// auxiliaries named as in the proxy).
ImputeSummary run_impute_experiment(const DataTable& table, const ImputeExperimentConfig& cfg);
/// Same on the proxy generated from cfg.seed and cfg.units.
ImputeSummary run_impute_experiment(const ImputeExperimentConfig& cfg);

/// mode,variables,w_1..w_p,srB_x1000,srRMSE_x1000,sDQ
void write_impute_csv(std::ostream& out, const ImputeSummary& summary);

}  // namespace gower

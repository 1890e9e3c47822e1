#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gower/dataset.hpp"
#include "gower/dissimilarity.hpp"
#include "gower/random.hpp"
#include "gower/weights.hpp"

namespace gower {

struct ClusterGenConfig {
  std::size_t clusters = 4;
  std::size_t min_size = 20;
  std::size_t max_size = 40;
  // Larger values push cluster centres apart; see generate_clusters.
  double separation = 0.3;
  double spacing_factor = 10.0;
  std::vector<double> flip_fractions{0.2, 0.4};
  bool noisy = false;
  std::uint64_t seed = 1;

  void check() const;
};

struct ClusterData {
  DataTable table;          // V1, V2, one nominal column per flip fraction, [noisy]
  std::vector<int> labels;  // true cluster, 0-based
};

/// Gaussian clusters in two numeric columns (V1, V2) plus noisy copies of
/// the label. Each cluster gets a randomly rotated covariance with
/// eigenvalues in [0.5, 1.5]. Centres sit on the corners of a square with
/// side spacing_factor * separation * (average within-cluster sd). The
/// noisy column, when requested, is drawn from its own stream so the other
/// columns do not depend on the flag.
ClusterData generate_clusters(const ClusterGenConfig& cfg);

/// Name of the nominal label copy for a flip fraction, e.g. 0.2 -> "P02".
std::string flip_column_name(double fraction);

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Seeded split without replacement; the train side gets floor(fraction n).
TrainTestSplit split_train_test(std::size_t units, double fraction, std::uint64_t seed);

/// k-NN majority vote under weighted Gower (ranges from `train`). Distance
/// ties at the k-th place go to the lowest train index; vote ties are
/// broken uniformly at random with `tie_rng`.
std::vector<int> knn_classify(const DataTable& train, std::span<const int> train_labels,
                              const DataTable& test, std::size_t k, std::span<const double> weights,
                              Rng& tie_rng, const DissimilarityOptions& options = {},
                              unsigned threads = 1);

/// Vote among precomputed test-by-train dissimilarities.
std::vector<int> knn_vote(const RectangularMatrix& dissim, std::span<const int> train_labels,
                          std::size_t k, Rng& tie_rng);

struct KnnExperimentConfig {
  ClusterGenConfig data;
  double train_fraction = 0.7;
  std::vector<std::size_t> ks{7, 9, 11};
  std::size_t iterations = 100;
  std::vector<Weighting> weightings = all_weightings();
  bool include_noisy = false;  // also run every iteration with the noisy column added
  GaConfig ga = simulation_ga();
  FitOptions fit;
  std::uint64_t seed = 1;
  unsigned threads = 1;  // iterations run in parallel; output does not depend on it

  void check() const;
};

struct KnnSummaryRow {
  Weighting weighting = Weighting::kUnweighted;
  bool noisy = false;
  std::size_t k = 0;
  double mean_accuracy = 0.0;
  std::vector<double> mean_weights;  // in column order of the variant's table
};

struct KnnSummary {
  std::vector<std::string> variables;        // without the noisy column
  std::vector<std::string> noisy_variables;  // with it (empty when not run)
  std::vector<KnnSummaryRow> rows;
  std::size_t iterations = 0;                // successful iterations
  std::vector<std::string> failures;         // "iteration i: message"

  const KnnSummaryRow& row(Weighting w, bool noisy, std::size_t k) const;
};

KnnSummary run_knn_experiment(const KnnExperimentConfig& cfg);

/// mode,noisy,k,mean_accuracy,w_1..w_p (rows with fewer variables are
/// padded with empty fields).
void write_knn_csv(std::ostream& out, const KnnSummary& summary);

}  // namespace gower

#include "gower/knn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "gower/error.hpp"
#include "gower/parallel.hpp"

namespace gower {

void ClusterGenConfig::check() const {
  if (clusters < 2) throw Error("cluster generator: need at least 2 clusters");
  if (min_size < 1 || max_size < min_size) throw Error("cluster generator: bad size range");
  if (!(separation > 0.0) || !std::isfinite(separation))
    throw Error("cluster generator: separation must be positive");
  if (!(spacing_factor > 0.0) || !std::isfinite(spacing_factor))
    throw Error("cluster generator: spacing factor must be positive");
  for (double f : flip_fractions)
    if (!(f >= 0.0 && f <= 1.0)) throw Error("cluster generator: flip fraction outside [0, 1]");
}

std::string flip_column_name(double fraction) {
  const int pct = static_cast<int>(std::lround(fraction * 10.0));
  if (std::abs(fraction * 10.0 - pct) < 1e-9) return "P0" + std::to_string(pct);
  return "P" + std::to_string(static_cast<int>(std::lround(fraction * 100.0)));
}

namespace {

struct Covariance {
  double a, b, c;  // [[a, b], [b, c]]
};

ColumnSchema cluster_schema(std::string name, std::size_t clusters) {
  ColumnSchema s{std::move(name), ColumnKind::kNominal, {}};
  for (std::size_t g = 0; g < clusters; ++g) s.levels.push_back("c" + std::to_string(g + 1));
  return s;
}

}  // namespace

ClusterData generate_clusters(const ClusterGenConfig& cfg) {
  cfg.check();
  Rng rng = make_rng(cfg.seed, "clusters");
  const std::size_t K = cfg.clusters;

  std::uniform_int_distribution<std::size_t> size_dist(cfg.min_size, cfg.max_size);
  std::uniform_real_distribution<double> eig_dist(0.5, 1.5);
  std::uniform_real_distribution<double> angle_dist(0.0, std::numbers::pi);
  std::vector<std::size_t> sizes(K);
  std::vector<Covariance> cov(K);
  double sd_sum = 0.0;
  for (std::size_t g = 0; g < K; ++g) {
    sizes[g] = size_dist(rng);
    const double l1 = eig_dist(rng), l2 = eig_dist(rng), th = angle_dist(rng);
    const double cs = std::cos(th), sn = std::sin(th);
    cov[g] = {l1 * cs * cs + l2 * sn * sn, (l1 - l2) * cs * sn, l1 * sn * sn + l2 * cs * cs};
    sd_sum += std::sqrt((l1 + l2) / 2.0);
  }
  const double spacing = cfg.spacing_factor * cfg.separation * sd_sum / static_cast<double>(K);
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(K))));

  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<double> v1, v2;
  std::vector<int> labels;
  v1.reserve(n);
  v2.reserve(n);
  labels.reserve(n);
  std::normal_distribution<double> z;
  for (std::size_t g = 0; g < K; ++g) {
    const double mx = spacing * static_cast<double>(g % side);
    const double my = spacing * static_cast<double>(g / side);
    // Cholesky factor of the 2x2 covariance.
    const double l11 = std::sqrt(cov[g].a);
    const double l21 = cov[g].b / l11;
    const double l22 = std::sqrt(cov[g].c - l21 * l21);
    for (std::size_t u = 0; u < sizes[g]; ++u) {
      const double z1 = z(rng), z2 = z(rng);
      v1.push_back(mx + l11 * z1);
      v2.push_back(my + l21 * z1 + l22 * z2);
      labels.push_back(static_cast<int>(g));
    }
  }

  Schema schema{{"V1", ColumnKind::kNumeric, {}}, {"V2", ColumnKind::kNumeric, {}}};
  std::vector<Column> columns{make_column(std::move(v1)), make_column(std::move(v2))};

  std::vector<std::size_t> units(n);
  std::uniform_int_distribution<std::size_t> other(1, K - 1);
  for (std::size_t f = 0; f < cfg.flip_fractions.size(); ++f) {
    const double frac = cfg.flip_fractions[f];
    Rng frng = make_rng(cfg.seed, "flip", f);
    std::vector<double> codes(labels.begin(), labels.end());
    std::iota(units.begin(), units.end(), std::size_t{0});
    std::shuffle(units.begin(), units.end(), frng);
    const auto flips = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    for (std::size_t q = 0; q < flips; ++q) {
      const std::size_t u = units[q];
      codes[u] = static_cast<double>((static_cast<std::size_t>(labels[u]) + other(frng)) % K);
    }
    schema.push_back(cluster_schema(flip_column_name(frac), K));
    columns.push_back(make_column(std::move(codes)));
  }

  if (cfg.noisy) {
    Rng nrng = make_rng(cfg.seed, "noisy");
    std::uniform_int_distribution<std::size_t> any(0, K - 1);
    std::vector<double> codes(n);
    for (auto& c : codes) c = static_cast<double>(any(nrng));
    schema.push_back(cluster_schema("noisy", K));
    columns.push_back(make_column(std::move(codes)));
  }

  return {DataTable(std::move(schema), std::move(columns)), std::move(labels)};
}

TrainTestSplit split_train_test(std::size_t units, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split: fraction must be in (0, 1)");
  const auto n_train =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(units)));
  if (n_train == 0 || n_train == units)
    throw Error("split: degenerate split (" + std::to_string(n_train) + " of " +
                std::to_string(units) + " units in training)");
  std::vector<std::size_t> perm(units);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  TrainTestSplit split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<int> knn_vote(const RectangularMatrix& dissim, std::span<const int> train_labels,
                          std::size_t k, Rng& tie_rng) {
  const std::size_t n_train = dissim.cols();
  if (train_labels.size() != n_train) throw Error("knn: label count differs from training size");
  if (k < 1 || k > n_train) throw Error("knn: k must be in [1, training size]");
  const int max_label = n_train == 0 ? 0 : *std::max_element(train_labels.begin(), train_labels.end());
  if (*std::min_element(train_labels.begin(), train_labels.end()) < 0)
    throw Error("knn: labels must be non-negative");

  std::vector<std::size_t> order(n_train);
  std::vector<std::size_t> votes(static_cast<std::size_t>(max_label) + 1);
  std::vector<int> tied;
  std::vector<int> predicted(dissim.rows());
  for (std::size_t r = 0; r < dissim.rows(); ++r) {
    const auto row = dissim.row(r);
    // Undefined sorts after every defined value; equal values by index.
    auto closer = [&](std::size_t a, std::size_t b) {
      const bool da = is_defined(row[a]), db = is_defined(row[b]);
      if (da != db) return da;
      if (da && row[a] != row[b]) return row[a] < row[b];
      return a < b;
    };
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      closer);
    if (!is_defined(row[order[0]]))
      throw DataError("knn: test unit " + std::to_string(r + 1) +
                      " has undefined dissimilarity to every training unit");
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t q = 0; q < k; ++q) ++votes[static_cast<std::size_t>(train_labels[order[q]])];
    const std::size_t top = *std::max_element(votes.begin(), votes.end());
    tied.clear();
    for (std::size_t c = 0; c < votes.size(); ++c)
      if (votes[c] == top) tied.push_back(static_cast<int>(c));
    if (tied.size() == 1) {
      predicted[r] = tied[0];
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      predicted[r] = tied[pick(tie_rng)];
    }
  }
  return predicted;
}

std::vector<int> knn_classify(const DataTable& train, std::span<const int> train_labels,
                              const DataTable& test, std::size_t k, std::span<const double> weights,
                              Rng& tie_rng, const DissimilarityOptions& options,
                              unsigned threads) {
  if (train_labels.size() != train.rows()) throw Error("knn: label count differs from training size");
  if (k < 1 || k > train.rows()) throw Error("knn: k must be in [1, training size]");
  return knn_vote(cross_dissimilarity(train, test, weights, options, threads), train_labels, k,
                  tie_rng);
}

void KnnExperimentConfig::check() const {
  data.check();
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("knn experiment: train fraction must be in (0, 1)");
  if (ks.empty()) throw Error("knn experiment: no k values");
  for (std::size_t k : ks)
    if (k < 1) throw Error("knn experiment: k must be >= 1");
  if (weightings.empty()) throw Error("knn experiment: no weightings");
  if (iterations < 1) throw Error("knn experiment: need at least one iteration");
  ga.check();
}

const KnnSummaryRow& KnnSummary::row(Weighting w, bool noisy, std::size_t k) const {
  for (const auto& r : rows)
    if (r.weighting == w && r.noisy == noisy && r.k == k) return r;
  throw Error("knn summary: no row for " + std::string(weighting_name(w)) + ", k=" +
              std::to_string(k) + (noisy ? ", noisy" : ""));
}

namespace {

struct VariantResult {
  std::vector<double> weights;
  std::vector<double> accuracy;  // per k
};

struct IterationResult {
  bool ok = false;
  std::string error;
  std::vector<VariantResult> variants;  // [noisy][weighting] flattened
};

IterationResult run_iteration(const KnnExperimentConfig& cfg, std::size_t it) {
  IterationResult out;
  ClusterGenConfig gen = cfg.data;
  gen.noisy = cfg.include_noisy;
  gen.seed = derive_seed(cfg.seed, "generate", it);
  const ClusterData data = generate_clusters(gen);
  const TrainTestSplit split =
      split_train_test(data.table.rows(), cfg.train_fraction, derive_seed(cfg.seed, "split", it));

  std::vector<int> train_labels, test_labels;
  for (std::size_t u : split.train) train_labels.push_back(data.labels[u]);
  for (std::size_t u : split.test) test_labels.push_back(data.labels[u]);

  const std::size_t variants = cfg.include_noisy ? 2 : 1;
  for (std::size_t v = 0; v < variants; ++v) {
    const bool noisy = v == 1;
    DataTable table = data.table;
    if (cfg.include_noisy && !noisy) {
      std::vector<std::string> keep;
      for (const auto& c : data.table.schema())
        if (c.name != "noisy") keep.push_back(c.name);
      table = data.table.select_columns(keep);
    }
    const DataTable train = table.select_rows(split.train);
    const DataTable test = table.select_rows(split.test);
    const GowerModel model = GowerModel::fit(train, cfg.fit.dissimilarity);
    const EncodedTable enc_train = model.encode(train);
    const EncodedTable enc_test = model.encode(test);
    const PerVariableDissimilarity pvd = per_variable_matrix(enc_train, 1);

    for (std::size_t wi = 0; wi < cfg.weightings.size(); ++wi) {
      const Weighting weighting = cfg.weightings[wi];
      VariantResult res;
      if (const auto mode = correlation_mode(weighting)) {
        GaConfig ga = cfg.ga;
        ga.seed = derive_seed(cfg.seed, "ga", it, static_cast<std::size_t>(weighting), v);
        ga.threads = 1;
        FitResult fit;
        if (pvd.pairs() > cfg.fit.max_pairs) {
          const auto pairs =
              sample_pairs(train.rows(), cfg.fit.max_pairs, derive_seed(ga.seed, "pairs"));
          fit = fit_weights(per_variable_matrix(enc_train, pairs, 1), *mode, ga, cfg.fit);
        } else {
          fit = fit_weights(pvd, *mode, ga, cfg.fit);
        }
        res.weights.assign(fit.weights.values().begin(), fit.weights.values().end());
      } else {
        res.weights.assign(table.cols(), 1.0 / static_cast<double>(table.cols()));
      }
      const RectangularMatrix dist = cross_dissimilarity(model, enc_train, enc_test, res.weights, 1);
      for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
        Rng ties = make_rng(cfg.seed, "ties", it, static_cast<std::size_t>(weighting) * 2 + v,
                            cfg.ks[ki]);
        const auto pred = knn_vote(dist, train_labels, cfg.ks[ki], ties);
        std::size_t hits = 0;
        for (std::size_t q = 0; q < pred.size(); ++q) hits += pred[q] == test_labels[q];
        res.accuracy.push_back(static_cast<double>(hits) / static_cast<double>(pred.size()));
      }
      out.variants.push_back(std::move(res));
    }
  }
  out.ok = true;
  return out;
}

}  // namespace

KnnSummary run_knn_experiment(const KnnExperimentConfig& cfg) {
  cfg.check();
  std::vector<IterationResult> results(cfg.iterations);
  parallel_for(cfg.iterations, worker_count(cfg.threads, cfg.iterations),
               [&](std::size_t it, std::size_t) {
                 try {
                   results[it] = run_iteration(cfg, it);
                 } catch (const std::exception& e) {
                   results[it].ok = false;
                   results[it].error = e.what();
                 }
               });

  KnnSummary summary;
  {
    ClusterGenConfig gen = cfg.data;
    gen.noisy = cfg.include_noisy;
    gen.min_size = gen.max_size = 1;
    const ClusterData probe = generate_clusters(gen);
    for (const auto& c : probe.table.schema()) {
      if (c.name != "noisy") summary.variables.push_back(c.name);
      if (cfg.include_noisy) summary.noisy_variables.push_back(c.name);
    }
  }

  const std::size_t variants = cfg.include_noisy ? 2 : 1;
  const std::size_t nw = cfg.weightings.size();
  for (std::size_t v = 0; v < variants; ++v)
    for (std::size_t wi = 0; wi < nw; ++wi)
      for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
        KnnSummaryRow row;
        row.weighting = cfg.weightings[wi];
        row.noisy = v == 1;
        row.k = cfg.ks[ki];
        row.mean_weights.assign(v == 1 ? summary.noisy_variables.size() : summary.variables.size(),
                                0.0);
        summary.rows.push_back(std::move(row));
      }

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const auto& res = results[it];
    if (!res.ok) {
      summary.failures.push_back("iteration " + std::to_string(it + 1) + ": " + res.error);
      continue;
    }
    ++summary.iterations;
    for (std::size_t v = 0; v < variants; ++v)
      for (std::size_t wi = 0; wi < nw; ++wi) {
        const VariantResult& vr = res.variants[v * nw + wi];
        for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
          KnnSummaryRow& row = summary.rows[(v * nw + wi) * cfg.ks.size() + ki];
          row.mean_accuracy += vr.accuracy[ki];
          for (std::size_t t = 0; t < vr.weights.size(); ++t) row.mean_weights[t] += vr.weights[t];
        }
      }
  }
  if (summary.iterations == 0) throw Error("knn experiment: every iteration failed");
  const double denom = static_cast<double>(summary.iterations);
  for (auto& row : summary.rows) {
    row.mean_accuracy /= denom;
    for (auto& w : row.mean_weights) w /= denom;
  }
  return summary;
}

namespace {

void put_fixed(std::ostream& out, double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 4);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_knn_csv(std::ostream& out, const KnnSummary& summary) {
  const std::size_t p = std::max(summary.variables.size(), summary.noisy_variables.size());
  out << "mode,noisy,k,mean_accuracy";
  for (std::size_t t = 0; t < p; ++t) out << ",w_" << t + 1;
  out << '\n';
  for (const auto& row : summary.rows) {
    out << weighting_name(row.weighting) << ',' << (row.noisy ? 1 : 0) << ',' << row.k << ',';
    put_fixed(out, row.mean_accuracy);
    for (std::size_t t = 0; t < p; ++t) {
      out << ',';
      if (t < row.mean_weights.size()) put_fixed(out, row.mean_weights[t]);
    }
    out << '\n';
  }
}

}  // namespace gower

// Randomized checks of the library-wide invariants.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gower/correlation.hpp"
#include "gower/error.hpp"
#include "gower/dissimilarity.hpp"
#include "gower/impute.hpp"
#include "gower/knn.hpp"
#include "gower/weights.hpp"
#include "oracles.hpp"

using namespace gower;

namespace {

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t p, bool allow_zero = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(p);
  for (auto& x : w) x = (allow_zero && u(rng) < 0.2) ? 0.0 : u(rng) + 1e-3;
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  return w;
}

}  // namespace

TEST(GowerProperties, BoundedAndSymmetric) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto t = oracle::random_table(rng, 2 + rep % 9, 1 + rep % 5, 0.2);
    const auto w = random_weights(rng, t.cols());
    const auto pvd = per_variable_matrix(t);
    const auto dm = gower_weighted(pvd, w);
    const auto cross = cross_dissimilarity(t, t, w);
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.rows(); ++j) {
        if (i == j) continue;
        const double d = dm(i, j);
        if (!is_defined(d)) {
          EXPECT_FALSE(is_defined(cross(i, j)));
          continue;
        }
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
        EXPECT_EQ(d, dm(j, i));
        EXPECT_NEAR(cross(i, j), cross(j, i), 1e-15);
        EXPECT_NEAR(cross(i, j), d, 1e-15);
      }
  }
}

TEST(GowerProperties, BruteForceEquivalenceOnSmallTables) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 500; ++rep) {
    const auto t = oracle::random_table(rng, 2 + rep % 7, 1 + rep % 4, 0.15);
    const bool podani = rep % 3 == 0;
    const auto w = random_weights(rng, t.cols());
    DissimilarityOptions opts;
    opts.ordinal = podani ? OrdinalTreatment::kPodani : OrdinalTreatment::kKaufmanRousseeuw;
    const auto got_matrix = gower_weighted(per_variable_matrix(t, opts), w);
    const auto got = got_matrix.condensed();
    const auto want = oracle::gower(t, w, podani);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      if (std::isnan(want[k])) {
        EXPECT_TRUE(std::isnan(got[k]));
      } else {
        EXPECT_NEAR(got[k], want[k], 1e-12) << "rep " << rep << " pair " << k;
      }
    }
  }
}

TEST(GowerProperties, WeightScaleInvariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> c(0.01, 100.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = oracle::random_table(rng, 8, 4, 0.1);
    const auto pvd = per_variable_matrix(t);
    const auto w = random_weights(rng, 4);
    const auto base_matrix = gower_weighted(pvd, w);
    const auto base = base_matrix.condensed();
    // Powers of two rescale without rounding.
    for (double s : {0.25, 8.0, 1024.0}) {
      auto ws = w;
      for (auto& x : ws) x *= s;
      const auto scaled_matrix = gower_weighted(pvd, ws);
      const auto scaled = scaled_matrix.condensed();
      for (std::size_t k = 0; k < base.size(); ++k)
        if (is_defined(base[k])) EXPECT_EQ(scaled[k], base[k]);
    }
    auto ws = w;
    const double s = c(rng);
    for (auto& x : ws) x *= s;
    const auto scaled_matrix = gower_weighted(pvd, ws);
    const auto scaled = scaled_matrix.condensed();
    for (std::size_t k = 0; k < base.size(); ++k)
      if (is_defined(base[k])) EXPECT_NEAR(scaled[k], base[k], 1e-15);
  }
}

TEST(GowerProperties, MissingCellOnlyRemovesItsTerm) {
  std::mt19937_64 rng(14);
  const Schema schema = parse_schema(
      "a = numeric\nb = nominal [levels: x, y, z]\nc = ordinal [levels: lo < mid < hi]\n"
      "d = numeric\n");
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 6;
    std::vector<Column> cols;
    for (std::size_t t = 0; t < 4; ++t) {
      std::vector<double> v(n);
      for (std::size_t r = 0; r < n; ++r)
        v[r] = (t == 1 || t == 2) ? static_cast<double>(rng() % 3) : u(rng);
      // Pin the extremes so the ranges do not move when a cell is blanked.
      if (t != 1) {
        v[n - 2] = t == 2 ? 0 : -1;
        v[n - 1] = t == 2 ? 2 : 11;
      }
      cols.push_back(make_column(std::move(v)));
    }
    const DataTable full(schema, cols);
    const std::size_t var = rng() % 4;
    auto holed = cols;
    holed[var].values[0] = oracle::kNaN;
    holed[var].missing[0] = 1;
    const DataTable partial(schema, holed);
    const auto w = random_weights(rng, 4, false);

    const auto pf = per_variable_matrix(full);
    const auto dp = gower_weighted(per_variable_matrix(partial), w);
    for (std::size_t j = 1; j < n; ++j) {
      double num = 0, den = 0;
      const std::size_t k = PairIndex::offset(n, 0, j);
      for (std::size_t t = 0; t < 4; ++t) {
        if (t == var || !pf.delta(t)[k]) continue;
        num += w[t] * pf.d(t)[k];
        den += w[t];
      }
      EXPECT_NEAR(dp(0, j), num / den, 1e-14);
    }
    // Pairs not involving unit 0 are untouched.
    const auto df = gower_weighted(pf, w);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) EXPECT_EQ(dp(i, j), df(i, j));
  }
}

TEST(GowerProperties, BinaryMismatchDominatesUnderUniformWeights) {
  std::mt19937_64 rng(15);
  const Schema schema = parse_schema("b = binary-symmetric [levels: no, yes]\nx = numeric\n");
  std::uniform_real_distribution<double> u(-50, 50);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> b(12), x(12);
    for (auto& v : b) v = static_cast<double>(rng() % 2);
    for (auto& v : x) v = u(rng);
    const DataTable t(schema, {make_column(b), make_column(x)});
    const auto dm = gower_unweighted(per_variable_matrix(t));
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = i + 1; j < 12; ++j) {
        if (b[i] != b[j])
          EXPECT_GE(dm(i, j), 0.5);
        else
          EXPECT_LE(dm(i, j), 0.5);
      }
  }
}

TEST(CorrelationProperties, BoundsAndIdentities) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> z(0, 1);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 3 + rep % 40;
    std::vector<double> x(m), y(m), dt(m);
    for (std::size_t k = 0; k < m; ++k) {
      x[k] = std::round(z(rng) * 4) / 4;
      y[k] = z(rng) + (rep % 2 ? x[k] : 0.0);
      dt[k] = static_cast<double>(rng() % 2);
    }
    for (auto r : {pearson(x, y), spearman(x, y), point_biserial(x, dt), rank_biserial(x, dt)}) {
      if (!r) continue;
      EXPECT_GE(*r, -1.0 - 1e-12);
      EXPECT_LE(*r, 1.0 + 1e-12);
    }
    const auto pb = point_biserial(x, dt);
    const auto pr = pearson(x, dt);
    ASSERT_EQ(pb.has_value(), pr.has_value());
    if (pb) EXPECT_NEAR(*pb, *pr, 1e-12);
    const auto br = brogden_biserial(x, dt);
    if (br && pb && std::abs(*pb) > 1e-12) EXPECT_EQ(*br > 0, *pb > 0);
  }
}

TEST(CorrelationProperties, SpearmanInvariantUnderMonotoneMaps) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 4 + rep % 30;
    std::vector<double> x(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
      x[k] = std::round(z(rng) * 3) / 3;
      y[k] = x[k] * 0.5 + z(rng);
    }
    const auto base = spearman(x, y);
    ASSERT_TRUE(base.has_value());
    std::vector<double> fx(m), gy(m);
    for (std::size_t k = 0; k < m; ++k) {
      fx[k] = std::exp(x[k]) + x[k] * x[k] * x[k];
      gy[k] = -1.0 / (1.0 + std::exp(-y[k]));
    }
    EXPECT_NEAR(*spearman(fx, y), *base, 1e-12);
    EXPECT_NEAR(*spearman(x, gy), -*base, 1e-12);
  }
}

TEST(CorrelationProperties, RankBiserialExtremesOnSeparation) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 4 + rep % 20;
    const std::size_t ones = 1 + rep % (m - 1);
    std::vector<double> v(m), dt(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      dt[k] = k < ones ? 1.0 : 0.0;
      v[k] = k < ones ? 2.0 + u(rng) : u(rng);
    }
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pv(m), pd(m);
    for (std::size_t k = 0; k < m; ++k) {
      pv[k] = v[perm[k]];
      pd[k] = dt[perm[k]];
    }
    EXPECT_NEAR(*rank_biserial(pv, pd), 1.0, 1e-12);
    for (auto& x : pv) x = -x;
    EXPECT_NEAR(*rank_biserial(pv, pd), -1.0, 1e-12);
  }
}

TEST(WeightProperties, ObjectiveDependsOnDirectionOnly) {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 30; ++rep) {
    const auto t = oracle::random_table(rng, 12, 3, 0.1);
    const auto pvd = per_variable_matrix(t);
    const auto w = random_weights(rng, 3, false);
    auto w8 = w;
    for (auto& x : w8) x *= 8.0;
    for (auto mode : {CorrelationMode::kPearson, CorrelationMode::kSpearmanBiserial}) {
      const auto a = profile_spread(correlation_profile(pvd, w, mode));
      const auto b = profile_spread(correlation_profile(pvd, w8, mode));
      ASSERT_EQ(a.defined, b.defined);
      if (a.ok()) EXPECT_EQ(a.spread, b.spread);
    }
  }
}

TEST(WeightProperties, FitNeverWorseThanUniform) {
  std::mt19937_64 rng(20);
  GaConfig ga = simulation_ga();
  for (int rep = 0; rep < 12; ++rep) {
    const auto t = oracle::random_table(rng, 14, 3 + rep % 2, 0.05);
    const auto mode = static_cast<CorrelationMode>(rep % 4);
    ga.seed = static_cast<std::uint64_t>(rep);
    FitResult fit;
    try {
      fit = fit_weights(t, mode, ga);
    } catch (const Error&) {
      continue;  // objective undefined for this table
    }
    if (std::isnan(fit.uniform_objective)) continue;
    EXPECT_LE(fit.objective, fit.uniform_objective + 1e-12) << "rep " << rep;
    double sum = 0;
    for (double x : fit.weights.values()) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(WeightProperties, GeneticAgreesWithAnalyticOnNumericTables) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z(0, 1);
  int compared = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t p = 2 + rep % 2;
    Schema schema;
    std::vector<Column> cols;
    std::vector<double> base(30);
    for (auto& b : base) b = z(rng);
    for (std::size_t t = 0; t < p; ++t) {
      schema.push_back({"x" + std::to_string(t), ColumnKind::kNumeric, {}});
      std::vector<double> v(30);
      for (std::size_t r = 0; r < 30; ++r)
        v[r] = base[r] * (0.3 + 0.3 * t) + z(rng) * (t == 0 ? 2.0 : 1.0);
      cols.push_back(make_column(std::move(v)));
    }
    const DataTable t(schema, cols);
    const auto pvd = per_variable_matrix(t);
    const auto sol = solve_analytic(pvd);
    if (!sol.feasible) continue;
    ++compared;
    GaConfig ga;
    ga.seed = static_cast<std::uint64_t>(rep);
    const auto g = search_ga(pvd, CorrelationMode::kPearson, ga);
    const double analytic = objective(pvd, sol.weights, CorrelationMode::kPearson);
    EXPECT_NEAR(g.objective, analytic, 1e-3) << "rep " << rep;
  }
  EXPECT_GE(compared, 5);
}

TEST(KnnProperties, NoisyColumnDoesNotRaiseUnweightedAccuracy) {
  KnnExperimentConfig cfg;
  cfg.iterations = 50;
  cfg.ks = {7};
  cfg.weightings = {Weighting::kUnweighted};
  cfg.include_noisy = true;
  cfg.seed = 3;
  const auto s = run_knn_experiment(cfg);
  ASSERT_EQ(s.iterations, 50u);
  const double plain = s.row(Weighting::kUnweighted, false, 7).mean_accuracy;
  const double noisy = s.row(Weighting::kUnweighted, true, 7).mean_accuracy;
  EXPECT_GE(plain, 0.0);
  EXPECT_LE(plain, 1.0);
  EXPECT_LE(noisy, plain);
}

TEST(ImputeProperties, ReconstructionKeepsDonorsAndTruth) {
  const DataTable proxy = generate_survey_proxy(21);
  const auto target = proxy.column(proxy.column_index("expenditure")).values;
  const std::vector<std::string> aux = impute_variables(4);
  for (std::uint64_t s = 0; s < 10; ++s) {
    MarConfig mar;
    mar.seed = s;
    const auto split = simulate_mar(proxy, mar);
    const auto donors = proxy.select_rows(split.donors).select_columns(aux);
    const auto recips = proxy.select_rows(split.recipients).select_columns(aux);
    std::vector<double> donor_values;
    for (auto d : split.donors) donor_values.push_back(target[d]);
    Rng rng(s);
    const auto imputed =
        nnd_impute(recips, donors, donor_values, std::vector<double>(aux.size(), 1.0), rng);
    auto rec = target;
    for (std::size_t r = 0; r < split.recipients.size(); ++r) {
      EXPECT_EQ(split.truth[r], target[split.recipients[r]]);
      rec[split.recipients[r]] = imputed[r];
      EXPECT_NE(std::find(donor_values.begin(), donor_values.end(), imputed[r]),
                donor_values.end());
    }
    for (auto d : split.donors) EXPECT_EQ(rec[d], target[d]);
  }
}

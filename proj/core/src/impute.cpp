#include "gower/impute.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "gower/error.hpp"
#include "gower/parallel.hpp"
#include "gower/stats.hpp"

namespace gower {

namespace {

const std::vector<std::string> kEducation{"none",        "primary",     "lower-secondary",
                                          "vocational",  "upper-secondary", "bachelor",
                                          "master",      "doctorate"};
const std::vector<std::string> kMarital{"single", "married", "separated", "widowed"};
const std::vector<std::string> kWorking{"employed", "retired", "not-employed"};

// Per working status: employed, retired, not-employed.
constexpr double kStatusProb[3] = {0.40, 0.45, 0.15};
constexpr double kEducationProb[3][8] = {
    {0.02, 0.08, 0.20, 0.12, 0.33, 0.12, 0.10, 0.03},
    {0.10, 0.30, 0.25, 0.10, 0.17, 0.04, 0.03, 0.01},
    {0.05, 0.15, 0.30, 0.12, 0.25, 0.07, 0.05, 0.01},
};
constexpr double kMaritalProb[3][4] = {
    {0.60, 0.05, 0.30, 0.05},
    {0.20, 0.05, 0.20, 0.55},
    {0.60, 0.05, 0.30, 0.05},
};
constexpr double kLogIncomeBase[3] = {9.75, 9.55, 8.95};
constexpr double kEducationSlope = 0.07;
constexpr double kLogIncomeSd = 0.42;
constexpr double kExpIntercept = 2.2;
constexpr double kExpSlope = 0.75;
constexpr double kExpShift[3] = {0.0, 0.05, 0.10};
constexpr double kLogExpSd = 0.32;

double round_cents(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

DataTable generate_survey_proxy(std::uint64_t seed, std::size_t units) {
  if (units < 50) throw Error("proxy: need at least 50 units");
  Rng rng = make_rng(seed, "proxy");
  std::discrete_distribution<int> status_dist(std::begin(kStatusProb), std::end(kStatusProb));
  std::vector<std::discrete_distribution<int>> edu_dist, mar_dist;
  for (int s = 0; s < 3; ++s) {
    edu_dist.emplace_back(std::begin(kEducationProb[s]), std::end(kEducationProb[s]));
    mar_dist.emplace_back(std::begin(kMaritalProb[s]), std::end(kMaritalProb[s]));
  }
  std::normal_distribution<double> z;

  std::vector<double> income(units), expenditure(units), education(units), marital(units),
      working(units);
  for (std::size_t u = 0; u < units; ++u) {
    const int s = status_dist(rng);
    const int e = edu_dist[s](rng);
    const int m = mar_dist[s](rng);
    const double log_inc = kLogIncomeBase[s] + kEducationSlope * e + kLogIncomeSd * z(rng);
    const double log_exp = kExpIntercept + kExpSlope * log_inc + kExpShift[s] + kLogExpSd * z(rng);
    income[u] = round_cents(std::exp(log_inc));
    expenditure[u] = round_cents(std::exp(log_exp));
    education[u] = e;
    marital[u] = m;
    working[u] = s;
  }

  Schema schema{{"income", ColumnKind::kNumeric, {}},
                {"expenditure", ColumnKind::kNumeric, {}},
                {"education", ColumnKind::kOrdinal, kEducation},
                {"marital", ColumnKind::kNominal, kMarital},
                {"working", ColumnKind::kNominal, kWorking}};
  std::vector<Column> columns;
  for (auto* v : {&income, &expenditure, &education, &marital, &working})
    columns.push_back(make_column(std::move(*v)));
  return DataTable(std::move(schema), std::move(columns));
}

DataTable with_nominal_education(const DataTable& proxy) {
  Schema schema = proxy.schema();
  std::vector<Column> columns;
  for (std::size_t t = 0; t < proxy.cols(); ++t) {
    if (schema[t].name == "education") schema[t].kind = ColumnKind::kNominal;
    columns.push_back(proxy.column(t));
  }
  return DataTable(std::move(schema), std::move(columns));
}

void MarConfig::check() const {
  auto bad = [](double p) { return !(p >= 0.0 && p <= 1.0); };
  if (bad(default_probability)) throw Error("MAR: probability outside [0, 1]");
  for (const auto& [cat, p] : probabilities)
    if (bad(p)) throw Error("MAR: probability for '" + cat + "' outside [0, 1]");
}

MarSplit simulate_mar(const DataTable& table, const MarConfig& cfg) {
  cfg.check();
  const std::size_t target = table.column_index(cfg.target);
  const std::size_t cond = table.column_index(cfg.conditioning);
  const ColumnSchema& cs = table.column_schema(cond);
  if (!is_categorical(cs.kind))
    throw Error("MAR: conditioning column '" + cfg.conditioning + "' is not categorical");
  for (const auto& [cat, p] : cfg.probabilities)
    if (!cs.level_index(cat))
      throw Error("MAR: unknown category '" + cat + "' for column '" + cfg.conditioning + "'");
  std::vector<double> prob(cs.levels.size(), cfg.default_probability);
  for (const auto& [cat, p] : cfg.probabilities) prob[*cs.level_index(cat)] = p;

  Rng rng = make_rng(cfg.seed, "mar");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MarSplit split;
  for (std::size_t u = 0; u < table.rows(); ++u) {
    if (table.is_missing(u, target))
      throw DataError("MAR: target '" + cfg.target + "' is missing", u + 1);
    // One draw per unit keeps the stream aligned whatever the probabilities.
    const double draw = unif(rng);
    const double p = table.is_missing(u, cond) ? cfg.default_probability
                                               : prob[table.column(cond).code(u)];
    if (draw < p) {
      split.recipients.push_back(u);
      split.truth.push_back(table.value(u, target));
    } else {
      split.donors.push_back(u);
    }
  }
  if (split.donors.empty()) throw Error("MAR: every unit was masked, no donors left");
  return split;
}

std::vector<std::size_t> nearest_donors(const RectangularMatrix& dissim, Rng& rng) {
  if (dissim.cols() == 0) throw Error("imputation: no donors");
  std::vector<std::size_t> chosen(dissim.rows());
  std::vector<std::size_t> ties;
  for (std::size_t r = 0; r < dissim.rows(); ++r) {
    const auto row = dissim.row(r);
    double best = 0.0;
    ties.clear();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!is_defined(row[c])) continue;
      if (ties.empty() || row[c] < best) {
        best = row[c];
        ties.assign(1, c);
      } else if (row[c] == best) {
        ties.push_back(c);
      }
    }
    if (ties.empty())
      throw DataError("imputation: recipient " + std::to_string(r + 1) +
                      " has undefined dissimilarity to every donor");
    if (ties.size() == 1) {
      chosen[r] = ties[0];
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
      chosen[r] = ties[pick(rng)];
    }
  }
  return chosen;
}

std::vector<double> nnd_impute(const DataTable& recipients, const DataTable& donors,
                               std::span<const double> donor_values,
                               std::span<const double> weights, Rng& rng,
                               const DissimilarityOptions& options, unsigned threads) {
  if (donor_values.size() != donors.rows())
    throw Error("imputation: donor value count differs from donor rows");
  if (donors.rows() == 0) throw Error("imputation: no donors");
  const auto idx =
      nearest_donors(cross_dissimilarity(donors, recipients, weights, options, threads), rng);
  std::vector<double> out(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) out[r] = donor_values[idx[r]];
  return out;
}

TotalsMetrics metric_totals(double true_total, std::span<const double> reconstructed_totals) {
  if (true_total == 0.0) throw Error("metrics: true total is zero");
  if (reconstructed_totals.empty()) throw Error("metrics: no replications");
  const double B = static_cast<double>(reconstructed_totals.size());
  double bias = 0.0;
  for (double t : reconstructed_totals) bias += t - true_total;
  bias /= B;
  // MSE = bias^2 + variance, which keeps rmse >= |bias| in floating point.
  double var = 0.0;
  for (double t : reconstructed_totals) {
    const double e = t - true_total - bias;
    var += e * e;
  }
  var /= B;
  const double scale = std::abs(true_total);
  return {bias / true_total, std::sqrt(bias * bias + var) / scale};
}

double quantile_gap(std::span<const double> truth, std::span<const double> reconstructed) {
  if (truth.empty() || reconstructed.empty()) throw Error("metrics: empty sample");
  std::vector<double> a(truth.begin(), truth.end()), b(reconstructed.begin(), reconstructed.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double gap = 0.0;
  for (double level : kSdqLevels) gap += std::abs(quantile_sorted(b, level) - quantile_sorted(a, level));
  return gap / static_cast<double>(kSdqLevels.size());
}

double metric_sdq(std::span<const double> truth,
                  std::span<const std::vector<double>> reconstructed) {
  if (reconstructed.empty()) throw Error("metrics: no replications");
  double sum = 0.0;
  for (const auto& rec : reconstructed) sum += quantile_gap(truth, rec);
  return sum / static_cast<double>(reconstructed.size());
}

ImputationMetrics imputation_metrics(std::span<const double> truth,
                                     std::span<const std::vector<double>> reconstructed) {
  std::vector<double> totals;
  for (const auto& rec : reconstructed) {
    if (rec.size() != truth.size()) throw Error("metrics: reconstructed size differs from truth");
    totals.push_back(std::accumulate(rec.begin(), rec.end(), 0.0));
  }
  const auto tm = metric_totals(std::accumulate(truth.begin(), truth.end(), 0.0), totals);
  return {tm.srb, tm.srrmse, metric_sdq(truth, reconstructed), reconstructed.size()};
}

void ImputeExperimentConfig::check() const {
  if (variables != 2 && variables != 4) throw Error("impute experiment: variable set must be 2 or 4");
  if (weightings.empty()) throw Error("impute experiment: no weightings");
  if (replications < 1) throw Error("impute experiment: need at least one replication");
  mar.check();
  ga.check();
}

const ImputeSummaryRow& ImputeSummary::row(Weighting w) const {
  for (const auto& r : rows)
    if (r.weighting == w) return r;
  throw Error("impute summary: no row for " + std::string(weighting_name(w)));
}

std::vector<std::string> impute_variables(std::size_t count) {
  if (count == 2) return {"income", "education"};
  if (count == 4) return {"income", "education", "marital", "working"};
  throw Error("impute: variable set must be 2 or 4");
}

namespace {

struct ReplicationResult {
  bool ok = false;
  std::string error;
  double missing_fraction = 0.0;
  std::vector<std::vector<double>> weights;        // per weighting
  std::vector<std::vector<double>> reconstructed;  // per weighting
};

ReplicationResult run_replication(const DataTable& table, const DataTable& aux,
                                  const ImputeExperimentConfig& cfg, std::size_t rep) {
  ReplicationResult out;
  MarConfig mar = cfg.mar;
  mar.seed = derive_seed(cfg.seed, "mar", rep);
  const MarSplit split = simulate_mar(table, mar);
  out.missing_fraction =
      static_cast<double>(split.recipients.size()) / static_cast<double>(table.rows());

  const std::size_t target = table.column_index(mar.target);
  const auto& truth = table.column(target).values;
  std::vector<double> donor_values;
  for (std::size_t u : split.donors) donor_values.push_back(truth[u]);

  const DataTable donors = aux.select_rows(split.donors);
  const DataTable recipients = aux.select_rows(split.recipients);
  const GowerModel model = GowerModel::fit(donors, cfg.fit.dissimilarity);
  const EncodedTable enc_donors = model.encode(donors);
  const EncodedTable enc_recipients = model.encode(recipients);
  const DataTable& fit_table = cfg.fit_all_units ? aux : donors;

  for (std::size_t wi = 0; wi < cfg.weightings.size(); ++wi) {
    const Weighting weighting = cfg.weightings[wi];
    std::vector<double> w;
    if (const auto mode = correlation_mode(weighting)) {
      GaConfig ga = cfg.ga;
      ga.seed = derive_seed(cfg.seed, "ga", rep, static_cast<std::size_t>(weighting));
      ga.threads = 1;
      const FitResult fit = fit_weights(fit_table, *mode, ga, cfg.fit);
      w.assign(fit.weights.values().begin(), fit.weights.values().end());
    } else {
      w.assign(aux.cols(), 1.0 / static_cast<double>(aux.cols()));
    }
    Rng ties = make_rng(cfg.seed, "ties", rep, static_cast<std::size_t>(weighting));
    const auto idx =
        nearest_donors(cross_dissimilarity(model, enc_donors, enc_recipients, w, 1), ties);
    std::vector<double> rec(truth.begin(), truth.end());
    for (std::size_t r = 0; r < idx.size(); ++r) rec[split.recipients[r]] = donor_values[idx[r]];
    out.weights.push_back(std::move(w));
    out.reconstructed.push_back(std::move(rec));
  }
  out.ok = true;
  return out;
}

void put_fixed(std::ostream& out, double x, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  out.write(buf, res.ptr - buf);
}

}  // namespace

ImputeSummary run_impute_experiment(const DataTable& source, const ImputeExperimentConfig& cfg) {
  cfg.check();
  const DataTable table = cfg.education_nominal && source.find_column("education")
                              ? with_nominal_education(source)
                              : source;
  const std::size_t target = table.column_index(cfg.mar.target);
  for (std::size_t u = 0; u < table.rows(); ++u)
    if (table.is_missing(u, target))
      throw DataError("impute experiment: target '" + cfg.mar.target + "' is missing", u + 1);

  ImputeSummary summary;
  summary.variables = impute_variables(cfg.variables);
  for (const auto& v : summary.variables)
    if (v == cfg.mar.target) throw Error("impute experiment: target cannot be an auxiliary");
  const DataTable aux = table.select_columns(summary.variables);

  std::vector<ReplicationResult> results(cfg.replications);
  parallel_for(cfg.replications, worker_count(cfg.threads, cfg.replications),
               [&](std::size_t rep, std::size_t) {
                 try {
                   results[rep] = run_replication(table, aux, cfg, rep);
                 } catch (const std::exception& e) {
                   results[rep].ok = false;
                   results[rep].error = e.what();
                 }
               });

  const auto& truth = table.column(target).values;
  const std::size_t nw = cfg.weightings.size();
  std::vector<std::vector<std::vector<double>>> recon(nw);
  summary.rows.resize(nw);
  for (std::size_t wi = 0; wi < nw; ++wi) {
    summary.rows[wi].weighting = cfg.weightings[wi];
    summary.rows[wi].mean_weights.assign(aux.cols(), 0.0);
  }
  for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
    auto& res = results[rep];
    if (!res.ok) {
      summary.failures.push_back("replication " + std::to_string(rep + 1) + ": " + res.error);
      continue;
    }
    ++summary.replications;
    summary.mean_missing_fraction += res.missing_fraction;
    for (std::size_t wi = 0; wi < nw; ++wi) {
      for (std::size_t t = 0; t < aux.cols(); ++t)
        summary.rows[wi].mean_weights[t] += res.weights[wi][t];
      recon[wi].push_back(std::move(res.reconstructed[wi]));
    }
  }
  if (summary.replications == 0) throw Error("impute experiment: every replication failed");
  const double B = static_cast<double>(summary.replications);
  summary.mean_missing_fraction /= B;
  for (std::size_t wi = 0; wi < nw; ++wi) {
    for (auto& w : summary.rows[wi].mean_weights) w /= B;
    summary.rows[wi].metrics = imputation_metrics(truth, recon[wi]);
  }
  return summary;
}

ImputeSummary run_impute_experiment(const ImputeExperimentConfig& cfg) {
  return run_impute_experiment(generate_survey_proxy(cfg.seed, cfg.units), cfg);
}

void write_impute_csv(std::ostream& out, const ImputeSummary& summary) {
  out << "mode,variables";
  for (std::size_t t = 0; t < summary.variables.size(); ++t) out << ",w_" << t + 1;
  out << ",srB_x1000,srRMSE_x1000,sDQ\n";
  for (const auto& row : summary.rows) {
    out << weighting_name(row.weighting) << ',' << summary.variables.size();
    for (double w : row.mean_weights) {
      out << ',';
      put_fixed(out, w, 4);
    }
    out << ',';
    put_fixed(out, row.metrics.srb * 1000.0, 4);
    out << ',';
    put_fixed(out, row.metrics.srrmse * 1000.0, 4);
    out << ',';
    put_fixed(out, row.metrics.sdq, 2);
    out << '\n';
  }
}

}  // namespace gower

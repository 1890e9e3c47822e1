#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "gower/correlation.hpp"
#include "gower/dataset.hpp"
#include "gower/dissimilarity.hpp"
#include "gower/error.hpp"
#include "gower/impute.hpp"
#include "gower/knn.hpp"
#include "gower/matrix_io.hpp"
#include "gower/weights.hpp"

namespace gower::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DataTable load(const std::string& data, const std::string& schema) {
  return load_table(read_file(data), parse_schema(read_file(schema)));
}

std::string shortest(double x) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

/// Writes to --out when given, to `fallback` otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(
        path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!*file_) throw Error("cannot write '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw Error("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
};

struct FitFlags {
  GaConfig ga;
  std::string ordinal = "kr";
  bool declared_levels = false;
  bool absolute = false;
  std::string brogden_split = "group-means";
  bool brogden_clip = false;
  std::size_t max_pairs = FitOptions{}.max_pairs;
  bool no_analytic = false;

  FitOptions options() const {
    FitOptions o;
    o.dissimilarity = dissimilarity();
    o.objective.absolute = absolute;
    o.correlation.brogden.split =
        brogden_split == "proportion" ? BrogdenSplit::kProportion : BrogdenSplit::kGroupMeans;
    o.correlation.brogden.clip = brogden_clip;
    o.max_pairs = max_pairs;
    o.allow_analytic = !no_analytic;
    return o;
  }
  DissimilarityOptions dissimilarity() const {
    DissimilarityOptions d;
    d.ordinal = ordinal == "podani" ? OrdinalTreatment::kPodani : OrdinalTreatment::kKaufmanRousseeuw;
    d.declared_levels = declared_levels;
    return d;
  }
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--seed", c.seed, "Master seed")->envname("GOWER_SEED");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  if (with_out) cmd->add_option("--out", c.out, "Output file (default: standard output)");
}

void add_ga(CLI::App* cmd, GaConfig& ga) {
  cmd->add_option("--ga-pop", ga.population, "GA population size");
  cmd->add_option("--ga-gens", ga.generations, "GA generation limit");
  cmd->add_option("--ga-crossover", ga.crossover, "GA crossover probability");
  cmd->add_option("--ga-mutation", ga.mutation, "GA per-gene mutation probability");
  cmd->add_option("--ga-mutation-sd", ga.mutation_scale, "GA mutation standard deviation");
  cmd->add_option("--ga-alpha", ga.blend_alpha, "GA blend crossover alpha");
  cmd->add_option("--ga-elitism", ga.elitism, "GA elite count");
  cmd->add_option("--ga-stall", ga.stall, "GA stall generations before stopping");
}

void add_fit(CLI::App* cmd, FitFlags& f) {
  add_ga(cmd, f.ga);
  cmd->add_option("--ordinal", f.ordinal, "Ordinal treatment")
      ->check(CLI::IsMember({"kr", "podani"}));
  cmd->add_flag("--declared-levels", f.declared_levels,
                "Scale ordinal positions by the declared level count");
  cmd->add_flag("--absolute", f.absolute, "Balance absolute correlations");
  cmd->add_option("--brogden-split", f.brogden_split, "How h is chosen in the Brogden estimator")
      ->check(CLI::IsMember({"group-means", "proportion"}));
  cmd->add_flag("--brogden-clip", f.brogden_clip, "Clip Brogden estimates into [-1, 1]");
  cmd->add_option("--max-pairs", f.max_pairs, "Subsample pairs above this count");
  cmd->add_flag("--no-analytic", f.no_analytic, "Always use the genetic search");
}

std::vector<Weighting> parse_weightings(const std::vector<std::string>& names) {
  std::vector<Weighting> out;
  for (const auto& n : names) out.push_back(parse_weighting(n));
  return out;
}

void log_fit(std::ostream& err, const DataTable& table, const FitResult& fit) {
  err << "path: " << path_name(fit.path) << '\n';
  for (const auto& note : fit.notes) err << "note: " << note << '\n';
  err << "objective at uniform weights: " << shortest(fit.uniform_objective) << '\n';
  err << "objective at fitted weights: " << shortest(fit.objective) << '\n';
  for (std::size_t t = 0; t < table.cols(); ++t) {
    err << "  " << table.column_schema(t).name << ": weight " << shortest(fit.weights[t]);
    if (t < fit.profile.size()) err << ", correlation " << shortest(fit.profile.r[t]);
    err << '\n';
  }
}

/// Accepts "uniform" or a CSV file with variable,weight columns.
std::vector<double> read_weights(const std::string& spec, const DataTable& table) {
  auto to_vector = [](const WeightVector& w) {
    return std::vector<double>(w.values().begin(), w.values().end());
  };
  if (spec == "uniform") return to_vector(WeightVector::uniform(table.cols()));
  std::istringstream in(read_file(spec));
  std::map<std::string, double> by_name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error("weights file line " + std::to_string(lineno) + ": expected variable,weight");
    const std::string name = line.substr(0, comma);
    std::string value = line.substr(comma + 1);
    value = value.substr(0, value.find(','));
    if (lineno == 1 && name == "variable") continue;
    double w = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), w);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw Error("weights file line " + std::to_string(lineno) + ": bad weight '" + value + "'");
    by_name[name] = w;
  }
  std::vector<double> w;
  for (const auto& c : table.schema()) {
    const auto it = by_name.find(c.name);
    if (it == by_name.end()) throw Error("weights file has no weight for '" + c.name + "'");
    w.push_back(it->second);
  }
  return to_vector(WeightVector::normalized(w));
}

int cmd_validate(const std::string& data, const std::string& schema, std::ostream& out) {
  DataTable table;
  try {
    table = load(data, schema);
  } catch (const DataError& e) {
    out << "error: " << e.what() << '\n';
    return kFatal;
  }
  const ValidationReport report = validate(table);
  out << "rows: " << table.rows() << "\ncolumns: " << table.cols() << '\n';
  for (const auto& c : report.columns) {
    out << "  " << c.name << ": missing " << shortest(c.missing_rate);
    if (c.zero_range) out << ", zero range";
    if (c.single_level) out << ", single level";
    out << '\n';
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  for (const auto& e : report.errors) out << "error: " << e << '\n';
  if (report.fatal()) return kFatal;
  if (!report.clean()) return kWarnings;
  out << "ok\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted Gower dissimilarities for mixed-type data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gower 0.1.0");

  // validate
  std::string data, schema;
  auto* validate_cmd = app.add_subcommand("validate", "Check a data file against its schema");
  validate_cmd->add_option("--data", data, "Data CSV")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--schema", schema, "Schema file")->required()->check(CLI::ExistingFile);

  // dist
  Common dist_common;
  FitFlags dist_fit;
  std::string dist_mode = "unwG", dist_weights, dist_format = "csv", dist_layout = "square";
  auto* dist_cmd = app.add_subcommand("dist", "Pairwise dissimilarity matrix");
  dist_cmd->add_option("--data", data, "Data CSV")->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("--schema", schema, "Schema file")->required()->check(CLI::ExistingFile);
  dist_cmd->add_option("--mode", dist_mode, "unwG, wPG, wPbG, wSG or wSbG");
  dist_cmd->add_option("--weights", dist_weights, "'uniform' or a variable,weight CSV");
  dist_cmd->add_option("--format", dist_format, "csv, pretty or bin")
      ->check(CLI::IsMember({"csv", "pretty", "bin"}));
  dist_cmd->add_option("--layout", dist_layout, "CSV layout")
      ->check(CLI::IsMember({"square", "condensed"}));
  add_common(dist_cmd, dist_common);
  add_fit(dist_cmd, dist_fit);

  // weights
  Common weights_common;
  FitFlags weights_fit;
  std::string weights_mode, weights_trace;
  auto* weights_cmd = app.add_subcommand("weights", "Fit correlation-balancing weights");
  weights_cmd->add_option("--data", data, "Data CSV")->required()->check(CLI::ExistingFile);
  weights_cmd->add_option("--schema", schema, "Schema file")->required()->check(CLI::ExistingFile);
  weights_cmd->add_option("--mode", weights_mode, "wPG, wPbG, wSG or wSbG")->required();
  weights_cmd->add_option("--trace", weights_trace, "Write the per-generation GA trace here");
  add_common(weights_cmd, weights_common);
  add_fit(weights_cmd, weights_fit);

  // knn-sim
  Common knn_common;
  KnnExperimentConfig knn;
  FitFlags knn_fit;
  knn_fit.ga = knn.ga;
  knn_fit.max_pairs = knn.fit.max_pairs;
  std::vector<std::string> knn_modes;
  auto* knn_cmd = app.add_subcommand("knn-sim", "k-NN classification experiment");
  knn_cmd->add_option("--iters", knn.iterations, "Iterations");
  knn_cmd->add_option("--k", knn.ks, "Neighbour counts")->delimiter(',');
  knn_cmd->add_flag("--noisy", knn.include_noisy, "Also run with a pure-noise categorical variable");
  knn_cmd->add_option("--separation", knn.data.separation, "Cluster separation");
  knn_cmd->add_option("--spacing-factor", knn.data.spacing_factor,
                      "Centre spacing per unit of separation, in within-cluster sds");
  knn_cmd->add_option("--train-fraction", knn.train_fraction, "Training share");
  knn_cmd->add_option("--modes", knn_modes, "Weightings to compare")->delimiter(',');
  add_common(knn_cmd, knn_common);
  add_fit(knn_cmd, knn_fit);

  // impute-sim
  Common imp_common;
  ImputeExperimentConfig imp;
  FitFlags imp_fit;
  imp_fit.ga = imp.ga;
  imp_fit.max_pairs = imp.fit.max_pairs;
  std::vector<std::string> imp_modes;
  double p_employed = 0.5, p_other = 0.1;
  bool zero_missing = false;
  std::string imp_data, imp_schema;
  auto* imp_cmd = app.add_subcommand("impute-sim", "Nearest-neighbour donor imputation experiment");
  imp_cmd->add_option("--reps", imp.replications, "Replications");
  imp_cmd->add_option("--vars", imp.variables, "Auxiliary variable set (2 or 4)")
      ->check(CLI::IsMember({2, 4}));
  imp_cmd->add_option("--units", imp.units, "Proxy sample size");
  imp_cmd->add_option("--p-employed", p_employed, "Missingness probability for employed units");
  imp_cmd->add_option("--p-other", p_other, "Missingness probability for other units");
  imp_cmd->add_flag("--zero-missing", zero_missing, "Set every missingness probability to 0");
  imp_cmd->add_flag("--fit-all-units", imp.fit_all_units, "Fit weights on all units, not donors only");
  imp_cmd->add_flag("--education-nominal", imp.education_nominal, "Treat education as nominal");
  imp_cmd->add_option("--modes", imp_modes, "Weightings to compare")->delimiter(',');
  imp_cmd->add_option("--data", imp_data, "Use this table instead of the proxy")
      ->check(CLI::ExistingFile);
  imp_cmd->add_option("--schema", imp_schema, "Schema for --data")->check(CLI::ExistingFile);
  add_common(imp_cmd, imp_common);
  add_fit(imp_cmd, imp_fit);

  // convert
  std::string conv_in, conv_out, conv_layout = "square";
  auto* conv_cmd = app.add_subcommand("convert", "Binary matrix dump to CSV");
  conv_cmd->add_option("--in", conv_in, "GWDM file")->required()->check(CLI::ExistingFile);
  conv_cmd->add_option("--out", conv_out, "CSV output (default: standard output)");
  conv_cmd->add_option("--layout", conv_layout, "CSV layout")
      ->check(CLI::IsMember({"square", "condensed"}));

  // export-proxy
  std::uint64_t proxy_seed = 1;
  std::size_t proxy_units = 477;
  std::string proxy_data, proxy_schema;
  auto* proxy_cmd = app.add_subcommand("export-proxy", "Write the synthetic survey table");
  proxy_cmd->add_option("--seed", proxy_seed, "Seed")->envname("GOWER_SEED");
  proxy_cmd->add_option("--units", proxy_units, "Sample size");
  proxy_cmd->add_option("--out-data", proxy_data, "CSV output")->required();
  proxy_cmd->add_option("--out-schema", proxy_schema, "Schema output")->required();

  std::vector<std::string> argv_storage{"gower"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFatal;
  }

  try {
    if (*validate_cmd) return cmd_validate(data, schema, out);

    if (*dist_cmd) {
      const DataTable table = load(data, schema);
      const Weighting weighting = parse_weighting(dist_mode);
      const FitOptions options = dist_fit.options();
      bool warned = false;
      std::vector<double> w;
      if (!dist_weights.empty()) {
        w = read_weights(dist_weights, table);
      } else if (const auto mode = correlation_mode(weighting)) {
        GaConfig ga = dist_fit.ga;
        ga.seed = derive_seed(dist_common.seed, "ga");
        ga.threads = dist_common.threads;
        const FitResult fit = fit_weights(table, *mode, ga, options);
        log_fit(err, table, fit);
        w.assign(fit.weights.values().begin(), fit.weights.values().end());
      } else {
        w = std::vector<double>(table.cols(), 1.0 / static_cast<double>(table.cols()));
      }
      const GowerModel model = GowerModel::fit(table, options.dissimilarity);
      for (const auto& warning : model.warnings()) {
        err << "warning: " << warning << '\n';
        warned = true;
      }
      const auto pvd = per_variable_matrix(model.encode(table), dist_common.threads);
      const DissimilarityMatrix matrix = gower_weighted(pvd, w);
      if (dist_format == "bin") {
        if (dist_common.out.empty()) throw Error("--format bin needs --out");
        Sink sink(dist_common.out, out, true);
        write_gwdm(sink.get(), matrix);
        sink.finish();
      } else {
        Sink sink(dist_common.out, out);
        if (dist_format == "pretty")
          write_pretty(sink.get(), matrix);
        else if (dist_layout == "condensed")
          write_condensed_csv(sink.get(), matrix);
        else
          write_square_csv(sink.get(), matrix);
        sink.finish();
      }
      return warned ? kWarnings : kOk;
    }

    if (*weights_cmd) {
      const DataTable table = load(data, schema);
      const Weighting weighting = parse_weighting(weights_mode);
      const FitOptions options = weights_fit.options();
      FitResult fit;
      if (const auto mode = correlation_mode(weighting)) {
        GaConfig ga = weights_fit.ga;
        ga.seed = derive_seed(weights_common.seed, "ga");
        ga.threads = weights_common.threads;
        fit = fit_weights(table, *mode, ga, options);
      } else {
        fit.weights = WeightVector::uniform(table.cols());
        fit.path = FitPath::kTrivial;
        fit.notes.push_back("unwG uses uniform weights");
      }
      log_fit(err, table, fit);
      const bool warned = table.cols() == 1;
      if (warned) err << "warning: a single variable always gets weight 1\n";
      Sink sink(weights_common.out, out);
      sink.get() << "variable,weight,correlation\n";
      for (std::size_t t = 0; t < table.cols(); ++t) {
        sink.get() << table.column_schema(t).name << ',' << shortest(fit.weights[t]) << ',';
        sink.get() << (t < fit.profile.size() ? shortest(fit.profile.r[t]) : "NA") << '\n';
      }
      sink.finish();
      if (!weights_trace.empty()) {
        Sink trace(weights_trace, out);
        trace.get() << "generation,best\n";
        for (std::size_t g = 0; g < fit.trace.size(); ++g)
          trace.get() << g << ',' << shortest(fit.trace[g]) << '\n';
        trace.finish();
      }
      return warned ? kWarnings : kOk;
    }

    if (*knn_cmd) {
      knn.seed = knn_common.seed;
      knn.threads = knn_common.threads;
      knn.ga = knn_fit.ga;
      knn.fit = knn_fit.options();
      if (!knn_modes.empty()) knn.weightings = parse_weightings(knn_modes);
      const KnnSummary summary = run_knn_experiment(knn);
      for (const auto& f : summary.failures) err << "warning: " << f << '\n';
      Sink sink(knn_common.out, out);
      write_knn_csv(sink.get(), summary);
      sink.finish();
      return summary.failures.empty() ? kOk : kWarnings;
    }

    if (*imp_cmd) {
      imp.seed = imp_common.seed;
      imp.threads = imp_common.threads;
      imp.ga = imp_fit.ga;
      imp.fit = imp_fit.options();
      if (!imp_modes.empty()) imp.weightings = parse_weightings(imp_modes);
      if (zero_missing) p_employed = p_other = 0.0;
      imp.mar.probabilities = {{"employed", p_employed}};
      imp.mar.default_probability = p_other;
      ImputeSummary summary;
      if (!imp_data.empty()) {
        if (imp_schema.empty()) throw Error("--data needs --schema");
        summary = run_impute_experiment(load(imp_data, imp_schema), imp);
      } else {
        summary = run_impute_experiment(imp);
      }
      err << "mean missing fraction: " << shortest(summary.mean_missing_fraction) << '\n';
      for (const auto& f : summary.failures) err << "warning: " << f << '\n';
      Sink sink(imp_common.out, out);
      write_impute_csv(sink.get(), summary);
      sink.finish();
      return summary.failures.empty() ? kOk : kWarnings;
    }

    if (*conv_cmd) {
      std::ifstream in(conv_in, std::ios::binary);
      if (!in) throw Error("cannot open '" + conv_in + "'");
      const DissimilarityMatrix matrix = read_gwdm(in);
      Sink sink(conv_out, out);
      if (conv_layout == "condensed")
        write_condensed_csv(sink.get(), matrix);
      else
        write_square_csv(sink.get(), matrix);
      sink.finish();
      return kOk;
    }

    if (*proxy_cmd) {
      const DataTable proxy = generate_survey_proxy(proxy_seed, proxy_units);
      Sink d(proxy_data, out);
      d.get() << serialize_table(proxy);
      d.finish();
      Sink s(proxy_schema, out);
      s.get() << format_schema(proxy.schema());
      s.finish();
      return kOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFatal;
  }
  return kFatal;
}

}  // namespace gower::cli

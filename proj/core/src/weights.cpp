#include "gower/weights.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "gower/error.hpp"
#include "gower/parallel.hpp"
#include "gower/random.hpp"

namespace gower {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Clamp at zero and rescale to the simplex; a vector that collapses to
// zero restarts from uniform.
void project(std::vector<double>& w) {
  double sum = 0.0;
  for (auto& x : w) {
    if (!(x > 0.0)) x = 0.0;
    sum += x;
  }
  if (!(sum > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return;
  }
  for (auto& x : w) x /= sum;
}

struct Individual {
  std::vector<double> w;
  double fitness = kInf;  // penalized objective, lower is better
};

bool better(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
  return a.fitness < b.fitness || (a.fitness == b.fitness && ia < ib);
}

}  // namespace

WeightVector WeightVector::uniform(std::size_t p) {
  if (p == 0) throw Error("weight vector needs at least one variable");
  return WeightVector(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

WeightVector WeightVector::normalized(std::vector<double> raw) {
  check_weights(raw, raw.size());
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (auto& x : raw) x /= sum;
  return WeightVector(std::move(raw));
}

std::string_view weighting_name(Weighting w) {
  switch (w) {
    case Weighting::kUnweighted: return "unwG";
    case Weighting::kPearson: return "wPG";
    case Weighting::kPearsonBiserial: return "wPbG";
    case Weighting::kSpearman: return "wSG";
    case Weighting::kSpearmanBiserial: return "wSbG";
  }
  return "?";
}

Weighting parse_weighting(std::string_view text) {
  for (auto w : all_weightings())
    if (lower(weighting_name(w)) == lower(text)) return w;
  throw Error("unknown weighting '" + std::string(text) + "' (expected unwG, wPG, wPbG, wSG, wSbG)");
}

std::optional<CorrelationMode> correlation_mode(Weighting w) {
  switch (w) {
    case Weighting::kUnweighted: return std::nullopt;
    case Weighting::kPearson: return CorrelationMode::kPearson;
    case Weighting::kPearsonBiserial: return CorrelationMode::kPearsonBiserial;
    case Weighting::kSpearman: return CorrelationMode::kSpearman;
    case Weighting::kSpearmanBiserial: return CorrelationMode::kSpearmanBiserial;
  }
  return std::nullopt;
}

std::vector<Weighting> all_weightings() {
  return {Weighting::kUnweighted, Weighting::kPearson, Weighting::kPearsonBiserial,
          Weighting::kSpearman, Weighting::kSpearmanBiserial};
}

void GaConfig::check() const {
  if (population < 4) throw Error("GA population must be at least 4");
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string("GA ") + what + " must lie in [0,1]");
  };
  prob(crossover, "crossover probability");
  prob(mutation, "mutation probability");
  if (!(mutation_scale >= 0.0)) throw Error("GA mutation scale must be non-negative");
  if (!(blend_alpha >= 0.0)) throw Error("GA blend alpha must be non-negative");
  if (elitism >= population) throw Error("GA elitism must be smaller than the population");
}

double ObjectiveValue::penalized(double penalty) const {
  if (!ok()) return kInf;
  return spread + penalty * static_cast<double>(undefined);
}

ObjectiveValue profile_spread(const CorrelationProfile& profile, bool absolute) {
  ObjectiveValue v;
  double sum = 0.0;
  for (std::size_t t = 0; t < profile.size(); ++t) {
    if (!profile.defined[t]) {
      ++v.undefined;
      continue;
    }
    ++v.defined;
    sum += absolute ? std::fabs(profile.r[t]) : profile.r[t];
  }
  if (v.defined < 2) {
    v.spread = kUndefined;
    return v;
  }
  const double mu = sum / static_cast<double>(v.defined);
  double ss = 0.0;
  for (std::size_t t = 0; t < profile.size(); ++t) {
    if (!profile.defined[t]) continue;
    const double r = absolute ? std::fabs(profile.r[t]) : profile.r[t];
    ss += (r - mu) * (r - mu);
  }
  v.spread = std::sqrt(ss / static_cast<double>(v.defined - 1));
  return v;
}

double objective(const PerVariableDissimilarity& pvd, std::span<const double> weights,
                 CorrelationMode mode, const CorrelationOptions& corr,
                 const ObjectiveOptions& options) {
  const auto value = profile_spread(correlation_profile(pvd, weights, mode, corr), options.absolute);
  if (!value.ok()) throw Error("objective undefined: fewer than two defined correlations");
  return value.spread;
}

AnalyticSolution solve_analytic(const PerVariableDissimilarity& pvd) {
  const std::size_t p = pvd.variables();
  const std::size_t m = pvd.pairs();
  if (p == 0 || m < 2) throw Error("analytic weights need at least one variable and two pairs");
  if (!pvd.complete())
    throw Error("analytic weights need every variable to contribute to every pair");

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  std::vector<double> means(p, 0.0);
  for (std::size_t t = 0; t < p; ++t) {
    const auto d = pvd.d(t);
    means[t] = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(m);
  }
  for (std::size_t s = 0; s < p; ++s) {
    const auto ds = pvd.d(s);
    for (std::size_t t = s; t < p; ++t) {
      const auto dt = pvd.d(t);
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += (ds[k] - means[s]) * (dt[k] - means[t]);
      const auto si = static_cast<Eigen::Index>(s);
      const auto ti = static_cast<Eigen::Index>(t);
      cov(si, ti) = cov(ti, si) = acc / static_cast<double>(m - 1);
    }
  }
  Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  for (Eigen::Index t = 0; t < sd.size(); ++t)
    if (!(sd(t) > 1e-12)) throw Error("analytic weights: a per-variable dissimilarity is constant");
  for (Eigen::Index s = 0; s < sd.size(); ++s)
    for (Eigen::Index t = s + 1; t < sd.size(); ++t)
      if (std::fabs(cov(s, t) / (sd(s) * sd(t))) >= 1.0 - 1e-12)
        throw Error("analytic weights: two variables have perfectly correlated dissimilarities");

  const auto n = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  a.topLeftCorner(n, n) = cov;
  a.topRightCorner(n, 1) = -sd;
  a.bottomLeftCorner(1, n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw Error("analytic weights: singular linear system");
  const Eigen::VectorXd x = lu.solve(b);
  if (!x.allFinite() || (a * x - b).norm() > 1e-8 * (1.0 + a.norm() * x.norm()))
    throw Error("analytic weights: ill-conditioned linear system");

  AnalyticSolution sol;
  sol.weights.assign(x.data(), x.data() + n);
  sol.kappa = x(n);
  sol.feasible = std::all_of(sol.weights.begin(), sol.weights.end(), [](double w) { return w >= 0.0; });
  return sol;
}

GaResult search_ga(const PerVariableDissimilarity& pvd, CorrelationMode mode, const GaConfig& cfg,
                   const CorrelationOptions& corr, const ObjectiveOptions& options) {
  cfg.check();
  const std::size_t p = pvd.variables();
  if (p == 0) throw Error("search_ga: no variables");
  GaResult result;
  if (p == 1) {
    result.weights = WeightVector::uniform(1);
    result.objective = kUndefined;
    return result;
  }

  const ProfileEvaluator evaluator(pvd, mode, corr);
  const unsigned workers = worker_count(cfg.threads, cfg.population);
  std::vector<ProfileEvaluator::Workspace> spaces(workers);
  std::vector<CorrelationProfile> profiles(workers);

  auto evaluate = [&](std::vector<Individual>& pop, std::size_t first) {
    parallel_for(pop.size() - first, workers, [&](std::size_t k, std::size_t w) {
      auto& ind = pop[first + k];
      evaluator.evaluate(ind.w, spaces[w], profiles[w]);
      ind.fitness = profile_spread(profiles[w], options.absolute).penalized(options.undefined_penalty);
    });
    result.evaluations += pop.size() - first;
  };

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> gauss(0.0, cfg.mutation_scale);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.population - 1);

  std::vector<Individual> pop(cfg.population);
  pop[0].w.assign(p, 1.0 / static_cast<double>(p));
  for (std::size_t i = 1; i < cfg.population; ++i) {
    pop[i].w.resize(p);
    for (auto& x : pop[i].w) x = expo(rng);
    project(pop[i].w);
  }
  evaluate(pop, 0);
  if (std::all_of(pop.begin(), pop.end(), [](const Individual& x) { return x.fitness == kInf; }))
    throw Error("search_ga: objective undefined for every initial individual");

  auto best_index = [&](const std::vector<Individual>& v) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (better(v[i], i, v[b], b)) b = i;
    return b;
  };
  Individual best = pop[best_index(pop)];
  result.trace.push_back(best.fitness);

  auto tournament = [&](const std::vector<Individual>& v) -> const Individual& {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    return better(v[a], a, v[b], b) ? v[a] : v[b];
  };
  auto mutate = [&](std::vector<double>& w) {
    for (auto& x : w)
      if (unit(rng) < cfg.mutation) x += gauss(rng);
    project(w);
  };

  std::size_t stall = 0;
  std::vector<std::size_t> order(cfg.population);
  for (std::size_t gen = 1; gen <= cfg.generations && stall < cfg.stall; ++gen) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pop[a].fitness < pop[b].fitness;
    });
    std::vector<Individual> next;
    next.reserve(cfg.population);
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
    const std::size_t first_child = next.size();
    while (next.size() < cfg.population) {
      const auto& a = tournament(pop);
      const auto& b = tournament(pop);
      Individual c1{a.w, kInf};
      Individual c2{b.w, kInf};
      if (unit(rng) < cfg.crossover) {
        for (std::size_t g = 0; g < p; ++g) {
          const double lo = std::min(a.w[g], b.w[g]);
          const double hi = std::max(a.w[g], b.w[g]);
          const double ext = cfg.blend_alpha * (hi - lo);
          c1.w[g] = lo - ext + unit(rng) * (hi - lo + 2.0 * ext);
          c2.w[g] = lo - ext + unit(rng) * (hi - lo + 2.0 * ext);
        }
      }
      mutate(c1.w);
      mutate(c2.w);
      next.push_back(std::move(c1));
      if (next.size() < cfg.population) next.push_back(std::move(c2));
    }
    evaluate(next, first_child);
    pop = std::move(next);
    const auto& gen_best = pop[best_index(pop)];
    if (gen_best.fitness < best.fitness) {
      best = gen_best;
      stall = 0;
    } else {
      ++stall;
    }
    result.trace.push_back(best.fitness);
    result.generations = gen;
  }

  result.weights = WeightVector::normalized(best.w);
  const auto value = profile_spread(evaluator.evaluate(result.weights), options.absolute);
  result.objective = value.spread;
  result.undefined = value.undefined;
  return result;
}

std::string_view path_name(FitPath path) {
  switch (path) {
    case FitPath::kTrivial: return "trivial";
    case FitPath::kAnalytic: return "analytic";
    case FitPath::kGenetic: return "genetic";
  }
  return "?";
}

std::vector<PairIndex> sample_pairs(std::size_t units, std::size_t count, std::uint64_t seed) {
  const std::size_t m = PairIndex::count(units);
  if (count > m) throw Error("sample_pairs: more pairs requested than available");
  // Floyd's sampling: O(count) memory regardless of m.
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(count * 2);
  std::vector<std::size_t> offsets;
  offsets.reserve(count);
  Rng rng(seed);
  for (std::size_t j = m - count; j < m; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t take = chosen.insert(t).second ? t : j;
    if (take == j) chosen.insert(j);
    offsets.push_back(take);
  }
  std::sort(offsets.begin(), offsets.end());
  std::vector<PairIndex> pairs;
  pairs.reserve(count);
  for (auto k : offsets) pairs.push_back(PairIndex::from_offset(units, k));
  return pairs;
}

FitResult fit_weights(const PerVariableDissimilarity& pvd, CorrelationMode mode, const GaConfig& cfg,
                      const FitOptions& options) {
  const std::size_t p = pvd.variables();
  FitResult fit;
  fit.pairs_used = pvd.pairs();
  if (p == 1) {
    fit.weights = WeightVector::uniform(1);
    fit.path = FitPath::kTrivial;
    fit.objective = fit.uniform_objective = kUndefined;
    fit.profile = correlation_profile(pvd, fit.weights, mode, options.correlation);
    fit.notes.push_back("single variable: weight fixed at 1");
    return fit;
  }
  const auto uniform = WeightVector::uniform(p);
  fit.uniform_objective =
      profile_spread(correlation_profile(pvd, uniform, mode, options.correlation),
                     options.objective.absolute)
          .spread;

  bool done = false;
  if (mode == CorrelationMode::kPearson && options.allow_analytic && !options.objective.absolute) {
    if (!pvd.complete()) {
      fit.notes.push_back("analytic path skipped: some variables do not contribute to every pair");
    } else {
      try {
        const auto sol = solve_analytic(pvd);
        if (sol.feasible) {
          fit.weights = WeightVector::normalized(sol.weights);
          fit.path = FitPath::kAnalytic;
          done = true;
        } else {
          fit.notes.push_back("analytic solution has negative weights; using the genetic search");
        }
      } catch (const Error& e) {
        fit.notes.push_back(std::string("analytic path unavailable: ") + e.what());
      }
    }
  }
  if (!done) {
    auto ga = search_ga(pvd, mode, cfg, options.correlation, options.objective);
    fit.weights = std::move(ga.weights);
    fit.trace = std::move(ga.trace);
    fit.path = FitPath::kGenetic;
  }
  fit.profile = correlation_profile(pvd, fit.weights, mode, options.correlation);
  fit.objective = profile_spread(fit.profile, options.objective.absolute).spread;
  return fit;
}

FitResult fit_weights(const DataTable& table, CorrelationMode mode, const GaConfig& cfg,
                      const FitOptions& options) {
  if (table.cols() == 0) throw Error("fit_weights: table has no columns");
  const auto model = GowerModel::fit(table, options.dissimilarity);
  const auto encoded = model.encode(table);
  const std::size_t m = PairIndex::count(table.rows());
  FitResult fit;
  if (m > options.max_pairs) {
    const auto pairs = sample_pairs(table.rows(), options.max_pairs, derive_seed(cfg.seed, "pairs"));
    fit = fit_weights(per_variable_matrix(encoded, pairs, cfg.threads), mode, cfg, options);
    fit.notes.push_back("fitted on " + std::to_string(options.max_pairs) + " of " +
                        std::to_string(m) + " pairs");
  } else {
    fit = fit_weights(per_variable_matrix(encoded, cfg.threads), mode, cfg, options);
  }
  for (const auto& w : model.warnings()) fit.notes.push_back(w);
  return fit;
}

}  // namespace gower

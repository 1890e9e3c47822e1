#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "gower/dissimilarity.hpp"
#include "gower/weights.hpp"

namespace {

gower::DataTable mixed_table(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0, 1);
  const auto schema = gower::parse_schema(
      "income = numeric\nage = numeric\nhours = numeric\n"
      "region = nominal [levels: a, b, c, d]\n"
      "education = ordinal [levels: low < mid < high]\n"
      "owner = binary-symmetric [levels: no, yes]\n");
  std::vector<std::vector<double>> v(6, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const double f = z(rng);
    v[0][r] = std::exp(10 + 0.5 * f + 0.3 * z(rng));
    v[1][r] = 45 + 12 * z(rng);
    v[2][r] = 38 + 6 * f + 4 * z(rng);
    v[3][r] = static_cast<double>(rng() % 4);
    v[4][r] = f > 0.5 ? 2 : (f > -0.5 ? 1 : 0);
    v[5][r] = f + z(rng) > 0 ? 1 : 0;
  }
  std::vector<gower::Column> cols;
  for (auto& x : v) cols.push_back(gower::make_column(std::move(x)));
  return gower::DataTable(schema, std::move(cols));
}

void BM_PerVariableMatrix(benchmark::State& state) {
  const auto t = mixed_table(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gower::per_variable_matrix(t));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(gower::PairIndex::count(t.rows())));
}
BENCHMARK(BM_PerVariableMatrix)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_WeightedAggregate(benchmark::State& state) {
  const auto pvd = gower::per_variable_matrix(mixed_table(static_cast<std::size_t>(state.range(0))));
  const std::vector<double> w{0.3, 0.1, 0.2, 0.15, 0.15, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(gower::gower_weighted(pvd, w));
}
BENCHMARK(BM_WeightedAggregate)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Profile(benchmark::State& state) {
  const auto pvd = gower::per_variable_matrix(mixed_table(300));
  const gower::ProfileEvaluator eval(pvd, static_cast<gower::CorrelationMode>(state.range(0)));
  const std::vector<double> w{0.3, 0.1, 0.2, 0.15, 0.15, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(eval.evaluate(w));
}
BENCHMARK(BM_Profile)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_GaFit(benchmark::State& state) {
  const auto pvd = gower::per_variable_matrix(mixed_table(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gower::search_ga(pvd, gower::CorrelationMode::kPearsonBiserial, gower::simulation_ga()));
  }
}
BENCHMARK(BM_GaFit)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <vector>

#include <benchmark/benchmark.h>

#include "fraudscore/ar.hpp"
#include "fraudscore/detect.hpp"
#include "fraudscore/evt.hpp"
#include "fraudscore/gp.hpp"
#include "fraudscore/mobility.hpp"
#include "fraudscore/random.hpp"

using namespace fraudscore;

namespace {

std::vector<double> log_amounts(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 4.8 + (i >= 5 ? 0.5 * (y[i - 5] - 4.8) : 0.0) + rng.normal(0.0, 0.3);
  }
  return y;
}

std::vector<RegionId> path(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RegionId> r(n);
  for (auto& v : r) v = static_cast<RegionId>(1 + rng.below(40));
  return r;
}

}  // namespace

static void BM_Support(benchmark::State& state) {
  const auto m = mobility::build_path_matrix(path(static_cast<std::size_t>(state.range(0)), 1), 10);
  const mobility::Pattern pat{3, 7, 11};
  for (auto _ : state) benchmark::DoNotOptimize(mobility::support(m, pat));
}
BENCHMARK(BM_Support)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_RegionConfidenceAssoc(benchmark::State& state) {
  const auto m = mobility::build_path_matrix(path(100, 2), 10);
  for (auto _ : state) benchmark::DoNotOptimize(mobility::region_confidence_assoc(m, 5, 9, 12));
}
BENCHMARK(BM_RegionConfidenceAssoc);

static void BM_AdjacencyBuild(benchmark::State& state) {
  const auto p = path(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(mobility::build_adjacency(p, 10));
}
BENCHMARK(BM_AdjacencyBuild)->Arg(100)->Arg(1000);

static void BM_ArFit(benchmark::State& state) {
  const auto y = log_amounts(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(ar::fit_ar(y, 5));
}
BENCHMARK(BM_ArFit)->Arg(100)->Arg(1000);

static void BM_GpLogPosterior(benchmark::State& state) {
  const auto y = log_amounts(static_cast<std::size_t>(state.range(0)), 5);
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
  const gp::KernelParams kp{2.0, 0.5, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(gp::log_posterior(kp, x, y));
}
BENCHMARK(BM_GpLogPosterior)->Arg(50)->Arg(100)->Arg(200);

static void BM_GpFit(benchmark::State& state) {
  const auto y = log_amounts(100, 6);
  gp::GpFitOptions o;
  o.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gp::fit_gp(y, o));
}
BENCHMARK(BM_GpFit)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_EvpStream(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> z(static_cast<std::size_t>(state.range(0)));
  for (auto& v : z) v = std::abs(rng.normal());
  for (auto _ : state) {
    evt::RunLengthState s;
    for (double v : z) benchmark::DoNotOptimize(s.step(v));
  }
}
BENCHMARK(BM_EvpStream)->Arg(105)->Arg(1000);

static void BM_ScoreDataset(benchmark::State& state) {
  const auto y = log_amounts(105, 8);
  std::vector<double> amounts;
  for (double v : y) amounts.push_back(std::exp(v));
  const auto regions = path(105, 9);
  const data::Dataset ds{1, Label::Legitimate, TransactionSequence::from_columns(amounts, regions), 100};
  ModelConfig c;
  const auto model = state.range(0) == 0 ? detect::AmountModel::Ar : detect::AmountModel::Gp;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect::score_sequence(ds, model, detect::RegionModel::Assoc, c));
  }
}
BENCHMARK(BM_ScoreDataset)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

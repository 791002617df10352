#include <benchmark/benchmark.h>

#include <random>

#include "invdoe/bench_harness.hpp"

using namespace invdoe;

namespace {

std::vector<Vector> random_front(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector> pts(4 * n, Vector(m));
  for (auto& p : pts) {
    double s = 0.0;
    for (auto& v : p) {
      v = u(rng);
      s += v * v;
    }
    for (auto& v : p) v /= std::sqrt(s);
  }
  auto front = pareto::pareto_filter(pts);
  front.resize(std::min(front.size(), n));
  return front;
}

void BM_Hypervolume(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto front = random_front(static_cast<std::size_t>(state.range(1)), m, 1);
  const Vector ref(m, 1.1);
  for (auto _ : state) benchmark::DoNotOptimize(pareto::hypervolume(front, ref));
  state.SetLabel(std::to_string(front.size()) + " points");
}
BENCHMARK(BM_Hypervolume)->Args({2, 64})->Args({2, 1024})->Args({3, 64})->Args({4, 32});

void BM_ParetoFilter(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector> pts(static_cast<std::size_t>(state.range(0)), Vector(2));
  for (auto& p : pts) p = {u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(pareto::pareto_filter(pts));
}
BENCHMARK(BM_ParetoFilter)->Arg(64)->Arg(4096);

void BM_GpFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto problem = problems::make_problem("constrained-biobj");
  const auto xs = problem.constraints.sample_feasible(n, 3);
  Vector ys;
  for (const auto& x : xs) ys.push_back(problem.evaluate(x).y[0]);
  gp::FitConfig cfg;
  cfg.lower = problem.constraints.lower();
  cfg.upper = problem.constraints.upper();
  for (auto _ : state) benchmark::DoNotOptimize(gp::fit(xs, ys, cfg));
}
BENCHMARK(BM_GpFit)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_QehviEstimate(benchmark::State& state) {
  const auto problem = problems::make_problem("constrained-biobj");
  const auto xs = problem.constraints.sample_feasible(30, 4);
  std::vector<Vector> ys;
  for (const auto& x : xs) ys.push_back(problem.evaluate(x).y);
  const auto models = bench::fit_objective_models(xs, ys, problem.constraints,
                                                  gp::KernelFamily::Matern52, 1);
  const auto ctx = bench::make_context(problem, models, xs, ys, std::vector<bool>(xs.size(), true),
                                       static_cast<std::size_t>(state.range(0)), 5);
  const acq::QehviEvaluator eval(ctx, 2);
  const std::vector<Vector> batch{{0.4, 0.1}, {0.7, 0.05}};
  for (auto _ : state) benchmark::DoNotOptimize(eval(batch));
}
BENCHMARK(BM_QehviEstimate)->Arg(512)->Arg(2048);

void BM_OptimizeQehvi(benchmark::State& state) {
  const auto problem = problems::make_problem("constrained-biobj");
  const auto xs = problem.constraints.sample_feasible(30, 4);
  std::vector<Vector> ys;
  for (const auto& x : xs) ys.push_back(problem.evaluate(x).y);
  const auto models = bench::fit_objective_models(xs, ys, problem.constraints,
                                                  gp::KernelFamily::Matern52, 1);
  const auto ctx = bench::make_context(problem, models, xs, ys, std::vector<bool>(xs.size(), true),
                                       2048, 5);
  for (auto _ : state) benchmark::DoNotOptimize(acq::optimize_qehvi(ctx, 2, 6));
}
BENCHMARK(BM_OptimizeQehvi)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
BENCHMARK_MAIN();

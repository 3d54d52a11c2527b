// Serial reference vs OpenMP kernels. Thread counts are the benchmark argument.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <fmt/format.h>

#include "bayesqa/dataset.hpp"
#include "bayesqa/inference.hpp"

using namespace bayesqa;

namespace {

// Layered network: `n` variables with `k` states, each with up to two parents
// from the previous layer.
BayesianNetwork layered(std::size_t n, std::size_t k) {
  std::vector<RandomVariable> vars;
  std::vector<Cpt> cpts;
  Rng rng(17);
  for (std::size_t i = 0; i < n; ++i) {
    RandomVariable v{fmt::format("x{:02}", i), fmt::format("x{}", i), {}};
    for (std::size_t s = 0; s < k; ++s) v.states.push_back(fmt::format("s{}", s));
    Cpt cpt{v.id, {}, {}};
    if (i >= 2) cpt.parents = {vars[i - 2].id, vars[i - 1].id};
    else if (i == 1) cpt.parents = {vars[0].id};
    std::size_t rows = 1;
    for (std::size_t p = 0; p < cpt.parents.size(); ++p) rows *= k;
    for (std::size_t r = 0; r < rows; ++r) {
      CptRow row;
      std::size_t code = r;
      for (std::size_t p = cpt.parents.size(); p-- > 0;) {
        row.parent_states.insert(row.parent_states.begin(), fmt::format("s{}", code % k));
        code /= k;
      }
      double total = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        row.distribution.push_back(0.1 + rng.uniform01());
        total += row.distribution.back();
      }
      for (double& p : row.distribution) p /= total;
      cpt.rows.push_back(std::move(row));
    }
    vars.push_back(std::move(v));
    cpts.push_back(std::move(cpt));
  }
  return BayesianNetwork({"layered", "benchmark"}, std::move(vars), std::move(cpts));
}

const TabularNetwork& network() {
  static const TabularNetwork net(layered(13, 3));
  return net;
}

Evidence evidence(const TabularNetwork& net) {
  Evidence ev(net);
  ev.bind(net.var_index("x12"), 1);
  ev.bind(net.var_index("x05"), 0);
  return ev;
}

void BM_EnumerateSerial(benchmark::State& state) {
  const auto& net = network();
  const Evidence ev = evidence(net);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::enumerate_masses_serial(net, 0, ev));
}
BENCHMARK(BM_EnumerateSerial)->Unit(benchmark::kMillisecond);

void BM_EnumerateParallel(benchmark::State& state) {
  const auto& net = network();
  const Evidence ev = evidence(net);
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::enumerate_masses(net, 0, ev));
}
BENCHMARK(BM_EnumerateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Eliminate(benchmark::State& state) {
  const auto& net = network();
  const Evidence ev = evidence(net);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::eliminate_masses(net, 0, ev));
}
BENCHMARK(BM_Eliminate)->Unit(benchmark::kMicrosecond);

void BM_GenerateDataset(benchmark::State& state) {
  static const BayesianNetwork net = layered(9, 3);
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(generate_dataset(net, 200, 1));
}
BENCHMARK(BM_GenerateDataset)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

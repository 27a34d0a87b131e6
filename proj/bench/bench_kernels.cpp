#include <benchmark/benchmark.h>

#include "omtk/kernels.hpp"
#include "omtk/rng.hpp"

namespace {

omtk::StateMatrix random_state(Eigen::Index n, Eigen::Index cols) {
  omtk::StateMatrix s(n, cols);
  std::vector<double> z(static_cast<std::size_t>(cols));
  for (Eigen::Index i = 0; i < n; ++i) {
    omtk::normals(7, omtk::Stream::property, static_cast<std::uint64_t>(i), 0, z);
    for (Eigen::Index c = 0; c < cols; ++c) s(i, c) = z[static_cast<std::size_t>(c)];
  }
  return s;
}

void BM_MomentsSerial(benchmark::State& st) {
  const auto s = random_state(st.range(0), 4);
  omtk::Matrix out;
  for (auto _ : st) {
    omtk::serial::moments(s, 1, 3, 2, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_MomentsParallel(benchmark::State& st) {
  const auto s = random_state(st.range(0), 4);
  omtk::Matrix out;
  for (auto _ : st) {
    omtk::kernels::moments(s, 1, 3, 2, out, omtk::Exec::parallel);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_HolderSerial(benchmark::State& st) {
  const omtk::Matrix f = random_state(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(omtk::serial::holder_seminorm(f, 1e-3, 0.25));
}

void BM_HolderParallel(benchmark::State& st) {
  const omtk::Matrix f = random_state(st.range(0), 2);
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        omtk::kernels::holder_seminorm(f, 1e-3, 0.25, omtk::Exec::parallel));
  }
}

}  // namespace

BENCHMARK(BM_MomentsSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_MomentsParallel)->Arg(10000)->Arg(100000);
BENCHMARK(BM_HolderSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_HolderParallel)->Arg(500)->Arg(2000);
BENCHMARK_MAIN();

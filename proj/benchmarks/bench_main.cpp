// Microbenchmarks for the hot paths: parse, compile, sampling, chamfer,
// assignment and circle fitting.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sxcad/cadify.hpp"
#include "sxcad/dsl.hpp"
#include "sxcad/geom.hpp"
#include "sxcad/kdtree.hpp"
#include "sxcad/metrics.hpp"
#include "sxcad/rng.hpp"
#include "sxcad/validate.hpp"

namespace {

using namespace sxcad;

std::vector<Vec3> cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return pts;
}

void BM_ParseBackrest(benchmark::State& state) {
  const std::string text = test::read_file(test::data_dir() / "backrest.cad");
  for (auto _ : state) benchmark::DoNotOptimize(parse(text));
}
BENCHMARK(BM_ParseBackrest);

void BM_ValidateAndCompile(benchmark::State& state) {
  Rng rng(7);
  const CadProgram p = gen::valid_program(rng, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(validate(p));
    benchmark::DoNotOptimize(compile(p));
  }
}
BENCHMARK(BM_ValidateAndCompile);

void BM_SampleSurface(benchmark::State& state) {
  const LabeledMesh m = compile(test::backrest());
  for (auto _ : state) benchmark::DoNotOptimize(sample_surface(m, static_cast<std::size_t>(state.range(0)), 1));
}
BENCHMARK(BM_SampleSurface)->Arg(2000)->Arg(8000);

void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(KdTree(pts));
}
BENCHMARK(BM_KdTreeBuild)->Arg(2000)->Arg(8000);

void BM_Chamfer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(n, 1), b = cloud(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a, b));
}
BENCHMARK(BM_Chamfer)->Arg(2000)->Arg(8000);

void BM_Assignment(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  CostMatrix c(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) c(r, k) = rng.uniform(0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(c));
}
BENCHMARK(BM_Assignment)->Arg(7)->Arg(64);

void BM_RansacCircle(benchmark::State& state) {
  Rng rng(5);
  std::vector<Vec2> pts;
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    pts.push_back({2 + 3 * std::cos(a) + 0.01 * rng.normal(), -1 + 3 * std::sin(a) + 0.01 * rng.normal()});
  }
  const RansacOptions opt{200, 0.05, 1};
  for (auto _ : state) benchmark::DoNotOptimize(fit_circle_ransac(pts, opt));
}
BENCHMARK(BM_RansacCircle);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "twistorlab/circle.hpp"
#include "twistorlab/flow.hpp"
#include "twistorlab/geometry.hpp"
#include "twistorlab/jacobi.hpp"
#include "twistorlab/twistor.hpp"

namespace {

using namespace twistorlab;

void bm_frame_eval(benchmark::State& state) {
  const ConformalMetric m = ConformalMetric::parse("bump:0.3:0.5");
  const PhasePoint p({0.31, -0.22}, 1.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(frame_vectors(m, p));
  }
}
BENCHMARK(bm_frame_eval);

void bm_scattering_ray(benchmark::State& state) {
  const ThermostatField field = parse_field("bump:0.3:0.5", "const:0.3");
  const BoundaryRay ray{0.7, 1.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(scattering(field, ray));
  }
}
BENCHMARK(bm_scattering_ray);

void bm_variational_exit(benchmark::State& state) {
  const ThermostatField field = parse_field("zero", "const:0.4");
  const BoundaryRay ray{0.7, 1.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(variational_to_exit(field, ray));
  }
}
BENCHMARK(bm_variational_exit);

void bm_fourier_sample(benchmark::State& state) {
  const auto f = [](double t) {
    return Complex{std::cos(t + 0.3 * std::sin(2 * t)),
                   std::sin(t + 0.3 * std::sin(2 * t))};
  };
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(FourierSeries::sample(n, f));
  }
}
BENCHMARK(bm_fourier_sample)->Arg(64)->Arg(256);

void bm_holomorphy_residual(benchmark::State& state) {
  const TwistorMap map = TwistorMap::parse("shear:0.7|rot:1.1");
  const TwistorPoint p{{0.4, -0.1}, {0.3, 0.5}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(holomorphy_residual(map, p));
  }
}
BENCHMARK(bm_holomorphy_residual);

void bm_glancing_identity(benchmark::State& state) {
  const ThermostatField field = parse_field("zero", "const:0.5");
  for (auto _ : state) {
    benchmark::DoNotOptimize(glancing_identity(field, 0.3));
  }
}
BENCHMARK(bm_glancing_identity);

}  // namespace

BENCHMARK_MAIN();

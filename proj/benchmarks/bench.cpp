#include <vector>

#include <benchmark/benchmark.h>

#include "xlim/fit.hpp"
#include "xlim/limits.hpp"
#include "xlim/model.hpp"

namespace {

using namespace xlim;

SpectralModel line_on_flat(double amplitude) {
    DetectorResponse r;
    r.fwhm_ref = 0.17;
    return SpectralModel{{GaussianLine{7.7, amplitude}, OneOverEContinuum{50.0}, PolynomialBackground{{300.0}}}, r};
}

FitProblem problem_for(const BinnedSpectrum& s) {
    FitProblem p;
    p.data = Observations::from_spectrum(s);
    p.model = line_on_flat(10.0);
    p.parameters = {signal_parameter("amplitude", 0, ParameterField::line_amplitude),
                    nuisance_parameter("c0", 2, ParameterField::polynomial_coefficient, 0)};
    return p;
}

void BM_PredictCounts(benchmark::State& state) {
    const auto grid = EnergyGrid::uniform(4.5, 48.5, static_cast<std::size_t>(state.range(0)));
    const auto model = line_on_flat(100.0);
    std::vector<double> out(grid.size());
    for (auto _ : state) {
        predict_counts_into(model, grid, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PredictCounts)->Arg(44)->Arg(1024)->Arg(16384);

void BM_Simulate(benchmark::State& state) {
    const auto grid = EnergyGrid::uniform(4.5, 48.5, static_cast<std::size_t>(state.range(0)));
    const auto model = line_on_flat(100.0);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_spectrum(model, grid, ++seed));
}
BENCHMARK(BM_Simulate)->Arg(44)->Arg(1024);

void BM_FitMinimize(benchmark::State& state) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 30);
    const auto problem = problem_for(simulate_spectrum(line_on_flat(50.0), grid, 1));
    for (auto _ : state) benchmark::DoNotOptimize(fit_minimize(problem));
}
BENCHMARK(BM_FitMinimize)->Unit(benchmark::kMicrosecond);

void BM_BayesianUpperLimit(benchmark::State& state) {
    const auto grid = EnergyGrid::uniform(7.2, 8.2, 30);
    const auto problem = problem_for(simulate_spectrum(line_on_flat(0.0), grid, 2));
    for (auto _ : state) benchmark::DoNotOptimize(bayesian_upper_limit(problem, 0.95));
}
BENCHMARK(BM_BayesianUpperLimit)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

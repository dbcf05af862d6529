#include <cmath>

#include <benchmark/benchmark.h>

#include "srfpll/estimator.hpp"
#include "srfpll/pll.hpp"
#include "srfpll/scenario.hpp"
#include "srfpll/signals.hpp"
#include "srfpll/transforms.hpp"

namespace {

constexpr double kDt = 0.00025;

void BM_Normalize(benchmark::State& state) {
    srfpll::ThreePhaseSample s{0.0, 0.93, -0.41, -0.52, true};
    for (auto _ : state) {
        benchmark::DoNotOptimize(srfpll::normalize(s));
    }
}
BENCHMARK(BM_Normalize);

void BM_AbcToDq(benchmark::State& state) {
    srfpll::ThreePhaseSample s{0.0, 0.93, -0.41, -0.52, true};
    double theta = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(srfpll::abc_to_dq(s, theta));
        theta += 0.0125;
    }
}
BENCHMARK(BM_AbcToDq);

void BM_EstimatorStep(benchmark::State& state) {
    const srfpll::EstimatorConfig cfg{4000.0, 120.0, 1.0};
    auto est = srfpll::make_estimator_state(cfg);
    double t = 0.0;
    for (auto _ : state) {
        srfpll::estimator_step(est, srfpll::kNormalizedAmplitude * std::sin(50.0 * t), true, kDt,
                               cfg);
        benchmark::DoNotOptimize(est);
        t += kDt;
    }
}
BENCHMARK(BM_EstimatorStep);

void BM_PllStep(benchmark::State& state) {
    const srfpll::PiGains gains{122.474487, 306.186218};
    srfpll::PllState pll;
    for (auto _ : state) {
        srfpll::pll_step(pll, 0.01, 50.0, gains, kDt);
        benchmark::DoNotOptimize(pll);
    }
}
BENCHMARK(BM_PllStep);

// Full pipeline: one second of the feed-forward loop at 4 kHz per iteration.
void BM_ScenarioSecond(benchmark::State& state) {
    srfpll::ScenarioConfig cfg;
    cfg.name = "bench";
    srfpll::SyntheticSignal sig;
    sig.frequency = srfpll::FrequencyProfile::constant(50.0, 1.0);
    sig.amplitude = srfpll::AmplitudeProfile::constant(1.0);
    sig.disturbance.noise_std = 0.02;
    cfg.signal = sig;
    cfg.t_end = 1.0;
    cfg.tuner = srfpll::TunerInput{};
    cfg.feedforward = {srfpll::FeedForwardMode::Estimated, 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(srfpll::run_scenario(cfg));
    }
    state.SetItemsProcessed(state.iterations() * 4000);
}
BENCHMARK(BM_ScenarioSecond)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// bench_kernels.cpp — OpenMP per-point kernels against their serial twins.
//
// Run with OMP_NUM_THREADS (or RESIGN_THREADS) set to compare thread counts.

#include <benchmark/benchmark.h>

#include "resign/models.hpp"
#include "resign/pipeline.hpp"

namespace {

using namespace resign;

const Trajectory& jc_trajectory() {
    static const Trajectory traj = [] {
        const auto model = library_model("jc", {{"rho11", 0.8}, {"rho12_re", 0.2}});
        return model->sample(uniform_grid(0.1, 3.0, 1e-4));
    }();
    return traj;
}

const FrameAnalysis& jc_analysis() {
    static const FrameAnalysis analysis = analyze_trajectory(jc_trajectory());
    return analysis;
}

const LindbladGenerator& jc_generator() {
    static const LindbladGenerator gen = synthesize_rates(jc_analysis(), SynthesisOptions{}).generator;
    return gen;
}

template <bool Parallel>
void bm_analyze(benchmark::State& state) {
    const auto& traj = jc_trajectory();
    for (auto _ : state) {
        auto a = Parallel ? analyze_trajectory(traj) : analyze_trajectory_serial(traj);
        benchmark::DoNotOptimize(a);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traj.size()));
}

template <bool Parallel>
void bm_synthesize(benchmark::State& state) {
    const auto& analysis = jc_analysis();
    const SynthesisOptions opts;
    for (auto _ : state) {
        auto r = Parallel ? synthesize_rates(analysis, opts) : synthesize_rates_serial(analysis, opts);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(analysis.size()));
}

template <bool Parallel>
void bm_verify(benchmark::State& state) {
    const auto& traj = jc_trajectory();
    const auto& gen = jc_generator();
    for (auto _ : state) {
        auto r = Parallel ? verify_reconstruction(traj, gen) : verify_reconstruction_serial(traj, gen);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(traj.size()));
}

BENCHMARK(bm_analyze<true>)->Name("analyze/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_analyze<false>)->Name("analyze/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_synthesize<true>)->Name("synthesize/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_synthesize<false>)->Name("synthesize/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_verify<true>)->Name("verify/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(bm_verify<false>)->Name("verify/serial")->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    configure_threads_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}

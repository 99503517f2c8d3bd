// Filter solve benchmarks: single-solve latency on the five-agent connectivity problem
// (5x5 LMI, 10 collision half-spaces, 2 pinned channels) and serial vs OpenMP batches.

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "mcbf/batch.hpp"
#include "mcbf/config.hpp"
#include "mcbf/sim.hpp"

using namespace mcbf;

namespace {

RunConfig paper_config() { return load_config(MCBF_CONFIG_DIR "/paper_connectivity.json"); }

// Filter problems at every state of a closed-loop connectivity run.
const std::vector<FilterProblem>& paper_problems() {
    static const std::vector<FilterProblem> problems = [] {
        const RunConfig c = paper_config();
        const Trace tr = run(c);
        std::vector<FilterProblem> out;
        out.reserve(tr.records.size());
        for (const auto& rec : tr.records) {
            const SwarmState s{rec.x, rec.t};
            std::vector<Halfspace> rows;
            for (const auto& bar : collision_barriers(s, c.params.r_agent)) {
                rows.push_back(scalar_to_halfspace(bar, ClassKe::linear(c.params.c_collision), "collision"));
            }
            out.push_back(assemble(rec.u_nominal,
                                   {build_exponential_sd(connectivity_barrier(s, c.params), c.params.c_alpha)},
                                   std::move(rows), pins_for(c.pinned_agents, rec.u_nominal)));
        }
        return out;
    }();
    return problems;
}

void BM_SingleSolve(benchmark::State& state) {
    const auto& problems = paper_problems();
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve(problems[k]));
        k = (k + 1) % problems.size();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SingleSolve)->Unit(benchmark::kMicrosecond);

void BM_SolveBatch(benchmark::State& state) {
    const auto& problems = paper_problems();
    const auto exec = state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
    for (auto _ : state) benchmark::DoNotOptimize(solve_batch(problems, {}, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(problems.size()));
    state.SetLabel(exec == Exec::Serial ? "serial" : "parallel x" + std::to_string(batch_threads()));
}
BENCHMARK(BM_SolveBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

// Closed-loop runs of the four bundled configs over 2 s.
void BM_RunBatch(benchmark::State& state) {
    std::vector<RunConfig> configs;
    for (const char* name : {"paper_connectivity", "chatter_baseline", "obstacle_disk", "obstacle_box"}) {
        auto c = load_config(std::string(MCBF_CONFIG_DIR "/") + name + ".json");
        c.sim.duration = 2.0;
        configs.push_back(c);
    }
    const auto exec = state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(configs, exec));
    state.SetLabel(exec == Exec::Serial ? "serial" : "parallel x" + std::to_string(batch_threads()));
}
BENCHMARK(BM_RunBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();

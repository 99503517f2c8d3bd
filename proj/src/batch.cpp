#include "mcbf/batch.hpp"

#include <exception>

#include <omp.h>

namespace mcbf {

namespace {

RunOutcome run_one(const RunConfig& c) {
    RunOutcome out;
    try {
        out.trace = run(c);
    } catch (const SolverHalt& h) {
        out.trace = h.partial();
        out.halt = h.reason();
        out.halt_step = h.step();
    }
    return out;
}

// Runs body(i) for i in [0, n), rethrowing the first exception on the calling thread.
template <class F>
void for_each_index(std::size_t n, Exec exec, F&& body) {
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(mcbf_batch_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<FilterSolution> solve_batch(std::span<const FilterProblem> problems, const SolverSettings& settings,
                                        Exec exec) {
    std::vector<FilterSolution> out(problems.size());
    for_each_index(problems.size(), exec, [&](std::size_t i) { out[i] = solve(problems[i], settings); });
    return out;
}

std::vector<RunOutcome> run_batch(std::span<const RunConfig> configs, Exec exec) {
    std::vector<RunOutcome> out(configs.size());
    for_each_index(configs.size(), exec, [&](std::size_t i) { out[i] = run_one(configs[i]); });
    return out;
}

int batch_threads() { return omp_get_max_threads(); }

}  // namespace mcbf

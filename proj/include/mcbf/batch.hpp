#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcbf/filter.hpp"
#include "mcbf/sim.hpp"

namespace mcbf {

enum class Exec { Serial, Parallel };

/// Solves independent filter problems. Serial is the reference; Parallel distributes
/// problems over OpenMP threads and returns the same solutions (solve_time aside).
std::vector<FilterSolution> solve_batch(std::span<const FilterProblem> problems, const SolverSettings& settings = {},
                                        Exec exec = Exec::Parallel);

/// Result of one closed-loop run in a batch. `halt` is set if the run raised SolverHalt,
/// in which case `trace` holds the partial trace.
struct RunOutcome {
    Trace trace;
    std::optional<std::string> halt;
    int halt_step = -1;
};

/// Independent closed-loop runs (for example an MCBF run and its baseline comparison).
/// Each run stays sequential; only the runs themselves are spread over threads.
std::vector<RunOutcome> run_batch(std::span<const RunConfig> configs, Exec exec = Exec::Parallel);

/// Threads OpenMP would use for a parallel batch, 1 without OpenMP.
int batch_threads();

}  // namespace mcbf

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcbf/sim.hpp"

namespace mcbf {

/// Column names of trace.csv for a run with `agents` agents and `eig_count` logged
/// eigenvalues. Order:
///   t, x_i, y_i (per agent), ref_x_i, ref_y_i, unom_x_i, unom_y_i, u_x_i, u_y_i,
///   lambda_1..lambda_k, lmi_min_eig, min_halfspace_slack, min_pair_distance,
///   status, iterations, solve_time, cutoff_crossings
/// Obstacle runs have one agent; a 3D point adds z columns.
std::vector<std::string> trace_columns(int dim, int agents, int eig_count);

/// Floats are written with 9 significant digits; NaN and inf as "nan", "inf", "-inf".
void write_trace_csv(std::ostream& out, const Trace& tr);

/// t, lambda_1..lambda_p of L (swarm) or H (obstacle).
void write_eigenvalues_csv(std::ostream& out, const Trace& tr);

/// {"config": to_json(config), "metrics": {...}, "completed": bool, "halt": {...} | null}.
nlohmann::json summary_json(const Trace& tr, const std::optional<std::string>& halt_reason = std::nullopt,
                            int halt_step = -1);

/// Writes trace.csv, eigenvalues.csv and summary.json into `dir`, creating it if needed.
/// Throws std::filesystem::filesystem_error or std::runtime_error on IO failure.
void write_outputs(const std::filesystem::path& dir, const Trace& tr,
                   const std::optional<std::string>& halt_reason = std::nullopt, int halt_step = -1);

}  // namespace mcbf

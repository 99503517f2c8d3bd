#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mcbf/class_k.hpp"
#include "mcbf/filter.hpp"
#include "mcbf/scenarios.hpp"

namespace mcbf {

enum class ScenarioKind { Connectivity, ObstacleDisk, ObstacleBox, Custom };
enum class FilterKind { Exponential, General, Indefinite, SmallestEig, BaselineEigen, None };

std::string_view to_string(ScenarioKind k) noexcept;
std::string_view to_string(FilterKind k) noexcept;
ScenarioKind parse_scenario(std::string_view s);  // throws ConfigError("scenario", ...)
FilterKind parse_filter(std::string_view s);      // throws ConfigError("filter", ...)

/// Single point robot driven toward `target` past an obstacle.
struct ObstacleScenario {
    ObstacleSpec obstacle = Disk2d{};
    Eigen::Vector2d start = Eigen::Vector2d::Zero();
    Eigen::Vector2d target = Eigen::Vector2d::Zero();
    double k_gain = 1.0;
};

struct SimSettings {
    double dt = 1.0 / 240.0;
    double duration = 10.0;
    std::uint64_t seed = 0;
};

struct RunConfig {
    ScenarioKind scenario = ScenarioKind::Connectivity;
    ConnectivityParams params;
    std::vector<int> pinned_agents{0};  // both channels of each listed agent are pinned
    Eigen::VectorXd initial_positions;  // custom scenario, stacked like SwarmState::x
    Eigen::VectorXd targets;            // custom scenario, static references
    ObstacleScenario obstacle;
    FilterKind filter = FilterKind::Exponential;
    ClassKe alpha = ClassKe::linear(1.0);  // general / smallest_eig / indefinite conditions
    double c_perp = 1.0;
    SimSettings sim;
    SolverSettings solver;
    std::string output = "out";
    nlohmann::json refs;  // free-form "_refs" annotations, echoed untouched

    bool is_obstacle() const {
        return scenario == ScenarioKind::ObstacleDisk || scenario == ScenarioKind::ObstacleBox;
    }
    /// Number of agents: 5 for the connectivity scenario, 1 for obstacle runs.
    int agents() const;
};

/// Schema check and conversion. Unknown keys are rejected with their dotted path;
/// "_refs" is accepted at any level.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON echo; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

}  // namespace mcbf

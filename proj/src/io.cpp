#include "mcbf/io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace mcbf {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.9g}", v);
}

// JSON has no NaN; fields that do not apply become null.
nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }

int state_dim(const Trace& tr) {
    if (tr.config.is_obstacle()) return obstacle_dim(tr.config.obstacle.obstacle);
    return 2;
}

int state_agents(const Trace& tr) {
    if (tr.records.empty()) return tr.config.is_obstacle() ? 1 : tr.config.agents();
    return static_cast<int>(tr.records.front().x.size()) / state_dim(tr);
}

int eig_count(const Trace& tr) { return tr.records.empty() ? 0 : static_cast<int>(tr.records.front().eigs.size()); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

std::vector<std::string> trace_columns(int dim, int agents, int eig_count) {
    std::vector<std::string> cols{"t"};
    for (const char* prefix : {"", "ref_", "unom_", "u_"}) {
        for (int i = 0; i < agents; ++i) {
            for (int a = 0; a < dim; ++a) cols.push_back(fmt::format("{}{}_{}", prefix, axis_name(a), i));
        }
    }
    for (int j = 1; j <= eig_count; ++j) cols.push_back(fmt::format("lambda_{}", j));
    for (const char* c : {"lmi_min_eig", "min_halfspace_slack", "min_pair_distance", "status", "iterations",
                          "solve_time", "cutoff_crossings"}) {
        cols.emplace_back(c);
    }
    return cols;
}

void write_trace_csv(std::ostream& out, const Trace& tr) {
    const auto cols = trace_columns(state_dim(tr), state_agents(tr), eig_count(tr));
    out << fmt::format("{}\n", fmt::join(cols, ","));
    std::vector<std::string> row;
    for (const auto& r : tr.records) {
        row.clear();
        row.push_back(num(r.t));
        for (const Eigen::VectorXd* v : {&r.x, &r.refs, &r.u_nominal, &r.u}) {
            for (Eigen::Index k = 0; k < v->size(); ++k) row.push_back(num((*v)(k)));
        }
        for (Eigen::Index k = 0; k < r.eigs.size(); ++k) row.push_back(num(r.eigs(k)));
        row.push_back(num(r.lmi_min_eig));
        row.push_back(num(r.min_halfspace_slack));
        row.push_back(num(r.min_pair_distance));
        row.emplace_back(to_string(r.status));
        row.push_back(std::to_string(r.iterations));
        row.push_back(num(r.solve_time));
        row.push_back(std::to_string(r.cutoff_crossings));
        out << fmt::format("{}\n", fmt::join(row, ","));
    }
}

void write_eigenvalues_csv(std::ostream& out, const Trace& tr) {
    std::vector<std::string> cols{"t"};
    for (int j = 1; j <= eig_count(tr); ++j) cols.push_back(fmt::format("lambda_{}", j));
    out << fmt::format("{}\n", fmt::join(cols, ","));
    for (const auto& r : tr.records) {
        out << num(r.t);
        for (Eigen::Index k = 0; k < r.eigs.size(); ++k) out << ',' << num(r.eigs(k));
        out << '\n';
    }
}

nlohmann::json summary_json(const Trace& tr, const std::optional<std::string>& halt_reason, int halt_step) {
    nlohmann::json j;
    j["config"] = to_json(tr.config);
    j["completed"] = !halt_reason.has_value();
    if (halt_reason) {
        j["halt"] = {{"step", halt_step}, {"reason", *halt_reason}};
    } else {
        j["halt"] = nullptr;
    }
    if (tr.records.empty()) {
        j["metrics"] = nullptr;
        return j;
    }
    const Metrics m = metrics(tr);
    j["metrics"] = {
        {"records", m.records},
        {"min_lambda2", jnum(m.min_lambda2)},
        {"min_gap23", jnum(m.min_gap23)},
        {"min_lambda_p_h", jnum(m.min_lambda_p_h)},
        {"min_pair_distance", jnum(m.min_pair_distance)},
        {"total_variation", jnum(m.total_variation)},
        {"max_jump", jnum(m.max_jump)},
        {"priority_tracking_error", jnum(m.priority_tracking_error)},
        {"max_pin_error", jnum(m.max_pin_error)},
        {"min_lmi_eig", jnum(m.min_lmi_eig)},
        {"median_solve_time", jnum(m.median_solve_time)},
        {"max_solve_time", jnum(m.max_solve_time)},
        {"cutoff_crossings", m.cutoff_crossings},
    };
    return j;
}

void write_outputs(const std::filesystem::path& dir, const Trace& tr, const std::optional<std::string>& halt_reason,
                   int halt_step) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "trace.csv");
        write_trace_csv(out, tr);
    }
    {
        auto out = open_out(dir / "eigenvalues.csv");
        write_eigenvalues_csv(out, tr);
    }
    auto out = open_out(dir / "summary.json");
    out << summary_json(tr, halt_reason, halt_step).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + (dir / "summary.json").string());
}

}  // namespace mcbf

#pragma once

#include "hjbpi/policy.hpp"
#include "hjbpi/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace hjbpi {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Columns x1..xd, V, u1..um; one row per node in flat order.
std::string value_csv(const ValueField& v, const PolicyField& u);

struct StoredSolution {
  ValueField value;
  PolicyField policy;
};

/// Parses a value CSV written for `grid` with m control columns. Throws
/// std::runtime_error on a malformed file or a grid mismatch.
StoredSolution parse_value_csv(const std::string& text, const Grid& grid, int control_dim);

/// Columns t, x1..xd, u1..um, running_cost, accumulated_cost.
std::string trajectory_csv(const Trajectory& traj);

/// The trajectory columns of the first stored path (held at its last sample
/// after an exit), followed by mean_state_cost, mean_running_cost.
std::string ensemble_csv(const Ensemble& ens, int dim, int control_dim);

/// Columns x1..xd, residual; boundary rows carry nan.
std::string residual_csv(const Grid& g, const Residual& r);

nlohmann::ordered_json report_json(const SolveReport& report);
nlohmann::ordered_json residual_norms_json(const Residual& r);

/// Custom problem from JSON:
///
///   { "name": "...", "dim": 1, "control_dim": 1, "params": {"a": 0.5},
///     "drift": ["a*x1"], "input": [["1"]], "noise": [["0"]],
///     "additive_noise": false, "state_cost": "x1^2", "R": [0.1],
///     "alpha": [-1], "beta": [1], "lambda": 0.05,
///     "lo": [-2], "hi": [2], "n": [401] }
///
/// "noise" and "additive_noise" are optional; bounds may be null or the
/// strings "inf" / "-inf".
ProblemSpec parse_problem(const nlohmann::json& j);
ProblemSpec load_problem(const std::filesystem::path& path);

}  // namespace hjbpi

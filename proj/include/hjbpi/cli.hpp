#pragma once

#include "hjbpi/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hjbpi {

enum ExitCode : int {
  kConverged = 0,
  kFailure = 1,
  kMaxOuter = 2,
  kDiverged = 3,
};

struct SimConfig {
  std::vector<Vec> x0;
  double horizon = 10.0;
  double step = 1e-3;
  std::optional<Index> n_paths;
  std::uint64_t seed = 1;
  bool uncontrolled = false;
};

struct RunConfig {
  std::string problem = "test1_det";  // builtin name or path to a JSON file
  bool constrained = true;
  std::vector<double> lambda;  // empty: the problem's own discount
  std::vector<double> dt;      // empty: 2 per stage
  double eps = 1e-6;
  Index max_outer = 200;
  SchemeMode mode = SchemeMode::Coupled;
  std::vector<Index> grid_n;   // empty: the problem's default
  SimConfig sim;
  ResidualStencil stencil = ResidualStencil::Central;
  std::filesystem::path out = "out";
  std::filesystem::path from;  // solve output read by simulate/residual; defaults to out
};

/// Checks list lengths, schedule order and step sizes. Throws
/// std::invalid_argument.
void validate(const RunConfig& cfg);

/// The problem named by cfg with bounds, discount (first stage) and node
/// counts applied.
ProblemSpec resolve_problem(const RunConfig& cfg);

nlohmann::ordered_json run_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

int cmd_solve(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_residual(const RunConfig& cfg);
int cmd_reproduce(int test_id, const std::string& variant, const RunConfig& cfg);

/// Parses argv and dispatches; never throws.
int run_cli(int argc, char** argv);

}  // namespace hjbpi

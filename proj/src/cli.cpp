#include "hjbpi/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace hjbpi {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::vector<double> stage_lambdas(const RunConfig& cfg, const ProblemSpec& p) {
  return cfg.lambda.empty() ? std::vector<double>{p.discount} : cfg.lambda;
}

std::vector<double> stage_dts(const RunConfig& cfg, std::size_t stages) {
  return cfg.dt.empty() ? std::vector<double>(stages, 2.0) : cfg.dt;
}

bool is_problem_file(const std::string& name) {
  return name.find('/') != std::string::npos || fs::path(name).extension() == ".json";
}

ProblemSpec base_problem(const std::string& name) {
  return is_problem_file(name) ? load_problem(name) : builtin(name);
}

std::vector<Solution> solve_stages(const RunConfig& cfg, const ProblemSpec& p,
                                   const PolicyIterationOptions& opt = {}) {
  const auto lambdas = stage_lambdas(cfg, p);
  const auto dts = stage_dts(cfg, lambdas.size());
  const Grid grid = default_grid(p);
  std::vector<Stage> stages;
  for (std::size_t s = 0; s < lambdas.size(); ++s) {
    SchemeConfig sc;
    sc.dt = dts[s];
    sc.mode = cfg.mode;
    stages.push_back({lambdas[s], sc});
  }
  if (stages.size() > 1) return warm_start_undiscount(p, grid, stages, opt);
  const GridProblem gp(with_discount(p, stages[0].lambda), grid);
  return {policy_iteration(gp, proportional_policy(gp), stages[0].cfg, opt)};
}

int status_of(const Solution& s) { return s.report.converged ? kConverged : kMaxOuter; }

struct Loaded {
  RunConfig run;
  ProblemSpec problem;  // discount of the last stage
  StoredSolution field;
};

Loaded load_solution(const RunConfig& cfg) {
  const fs::path dir = cfg.from.empty() ? cfg.out : cfg.from;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(dir / "run.json"));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error((dir / "run.json").string() + ": " + e.what());
  }
  Loaded out;
  out.run = run_config_from_json(j);
  ProblemSpec p = resolve_problem(out.run);
  out.problem = with_discount(p, stage_lambdas(out.run, p).back());
  out.field = parse_value_csv(read_file(dir / "value.csv"), default_grid(out.problem),
                              out.problem.control_dim);
  return out;
}

void check_x0(const ProblemSpec& p, const Vec& x0) {
  if (x0.size() != p.dim)
    throw std::invalid_argument("x0 has " + std::to_string(x0.size()) + " entries, the problem has " +
                                std::to_string(p.dim) + " states");
  if ((x0.array() <= p.lo.array()).any() || (x0.array() >= p.hi.array()).any())
    throw std::invalid_argument("x0 lies outside the domain");
}

std::string numbered(const std::string& stem, std::size_t k, std::size_t count,
                     const std::string& ext) {
  return count == 1 ? stem + ext : stem + "_" + std::to_string(k + 1) + ext;
}

std::string value_error_csv(const std::vector<Vec>& iterates, const Vec& final_v) {
  std::string out = "iter,sup,l2\n";
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    const Vec diff = iterates[i] - final_v;
    out += std::to_string(i) + "," + format_double(diff.cwiseAbs().maxCoeff()) + "," +
           format_double(std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()))) + "\n";
  }
  return out;
}

Vec parse_point(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw std::invalid_argument("bad --x0 entry: '" + text + "'");
    xs.push_back(v);
  }
  if (xs.empty()) throw std::invalid_argument("empty --x0 entry");
  return Eigen::Map<Vec>(xs.data(), static_cast<Index>(xs.size()));
}

// ---------------------------------------------------------------------------
// reproduce

struct Plan {
  std::string problem;
  std::vector<double> lambda;
  std::vector<double> dt;
  std::vector<Vec> x0;
  double horizon;
  std::vector<std::pair<std::string, std::string>> panels;  // content -> panel id
};

Vec point(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Plan make_plan(int test_id, bool stoch) {
  switch (test_id) {
    case 1:
      if (stoch)
        return {"test1_stoch", {0.05}, {2.0}, {point({1.0})}, 10.0,
                {{"state_cost", "i"}, {"value_error", "ii"}}};
      return {"test1_det", {0.05}, {2.0}, {point({-1.8}), point({1.0})}, 10.0,
              {{"value", "i"}, {"state", "ii"}, {"state_cost", "iii"}, {"control", "iv"},
               {"residual", "v"}}};
    case 2:
      if (stoch) break;
      return {"test2", {0.05, 0.0}, {2.0, 0.001}, {point({-1.8}), point({1.0})}, 10.0,
              {{"value", "i"}, {"control", "ii"}, {"state", "iii"}, {"state_cost", "iv"}}};
    case 3:
      if (stoch)
        return {"test3_stoch", {0.05}, {10.0}, {point({1.0, 1.0, 1.0})}, 10.0,
                {{"state", "i"}, {"running_cost", "ii"}}};
      return {"test3_det", {0.05}, {10.0}, {point({1.0, 1.0, 1.0})}, 10.0,
              {{"control", "i"}, {"state", "ii"}, {"running_cost", "iii"}, {"state_cost", "iv"}}};
    case 4:
      if (stoch) break;
      return {"test4", {0.05}, {0.1}, {point({-1.0, -1.0, -1.0})}, 15.0,
              {{"control", "i"}, {"state", "ii"}}};
    default:
      throw std::invalid_argument("reproduce: test id must be 1, 2, 3 or 4");
  }
  throw std::invalid_argument("reproduce: test " + std::to_string(test_id) +
                              " has no stochastic variant");
}

class Manifest {
 public:
  Manifest(const Plan& plan, std::string figure) : plan_(plan), figure_(std::move(figure)) {}

  void add(const std::string& file, const std::string& content, const std::string& series) {
    ojson e;
    e["file"] = file;
    e["figure"] = figure_;
    std::string panel = "supplementary";
    for (const auto& [c, id] : plan_.panels)
      if (c == content) panel = id;
    e["panel"] = panel;
    e["content"] = content;
    e["series"] = series;
    files_.push_back(std::move(e));
  }

  // A trajectory file feeds every panel drawn from trajectory columns.
  void add_trajectory(const std::string& file, const std::string& series) {
    for (const char* c : {"state", "control", "state_cost", "running_cost"})
      for (const auto& [content, id] : plan_.panels)
        if (content == c) add(file, c, series);
  }

  ojson json() const { return files_; }

 private:
  const Plan& plan_;
  std::string figure_;
  ojson files_ = ojson::array();
};

}  // namespace

void validate(const RunConfig& cfg) {
  if (!cfg.dt.empty() && !cfg.lambda.empty() && cfg.dt.size() != cfg.lambda.size())
    throw std::invalid_argument("--dt needs one entry per --lambda stage");
  if (cfg.lambda.size() > 1) {
    if (cfg.lambda.back() != 0.0)
      throw std::invalid_argument("a --lambda schedule must end at 0");
    for (std::size_t s = 1; s < cfg.lambda.size(); ++s)
      if (!(cfg.lambda[s] < cfg.lambda[s - 1]))
        throw std::invalid_argument("a --lambda schedule must be strictly descending");
  }
  if (cfg.lambda.empty() && cfg.dt.size() > 1)
    throw std::invalid_argument("several --dt entries need a --lambda schedule");
  for (double l : cfg.lambda)
    if (!(l >= 0.0)) throw std::invalid_argument("--lambda entries must be >= 0");
  for (double d : cfg.dt)
    if (!(d > 0.0)) throw std::invalid_argument("--dt entries must be positive");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("--eps must be positive");
  if (cfg.max_outer < 1) throw std::invalid_argument("--max-outer must be >= 1");
  if (!(cfg.sim.horizon > 0.0)) throw std::invalid_argument("--horizon must be positive");
  if (!(cfg.sim.step > 0.0) || cfg.sim.step > cfg.sim.horizon)
    throw std::invalid_argument("--step must lie in (0, horizon]");
  if (cfg.sim.n_paths && *cfg.sim.n_paths < 1) throw std::invalid_argument("--n-paths must be >= 1");
}

ProblemSpec resolve_problem(const RunConfig& cfg) {
  ProblemSpec p = base_problem(cfg.problem);
  if (!cfg.constrained) p = unconstrained(std::move(p));
  if (!cfg.lambda.empty()) p = with_discount(std::move(p), cfg.lambda.front());
  if (!cfg.grid_n.empty()) {
    std::vector<Index> n = cfg.grid_n;
    if (n.size() == 1) n.assign(static_cast<std::size_t>(p.dim), n.front());
    if (static_cast<int>(n.size()) != p.dim)
      throw std::invalid_argument("--grid-n needs 1 or " + std::to_string(p.dim) + " entries");
    p = with_nodes(std::move(p), n);
  }
  return p;
}

ojson run_json(const RunConfig& cfg) {
  ojson j;
  j["problem"] = cfg.problem;
  j["constrained"] = cfg.constrained;
  j["lambda"] = cfg.lambda;
  j["dt"] = cfg.dt;
  j["eps"] = cfg.eps;
  j["max_outer"] = cfg.max_outer;
  j["mode"] = cfg.mode == SchemeMode::Coupled ? "coupled" : "frozen";
  j["grid_n"] = cfg.grid_n;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    cfg.problem = j.at("problem").get<std::string>();
    cfg.constrained = j.at("constrained").get<bool>();
    cfg.lambda = j.at("lambda").get<std::vector<double>>();
    cfg.dt = j.at("dt").get<std::vector<double>>();
    cfg.eps = j.at("eps").get<double>();
    cfg.max_outer = j.at("max_outer").get<Index>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "coupled" && mode != "frozen") throw std::runtime_error("run.json: bad mode " + mode);
    cfg.mode = mode == "coupled" ? SchemeMode::Coupled : SchemeMode::FrozenPolicy;
    cfg.grid_n = j.at("grid_n").get<std::vector<Index>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("run.json: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

int cmd_solve(const RunConfig& cfg) {
  validate(cfg);
  const ProblemSpec p = resolve_problem(cfg);
  PolicyIterationOptions opt;
  opt.eps = cfg.eps;
  opt.max_outer = cfg.max_outer;
  const auto sols = solve_stages(cfg, p, opt);
  const Solution& last = sols.back();

  write_file(cfg.out / "run.json", dump(run_json(cfg)));
  write_file(cfg.out / "value.csv", value_csv(last.value, last.policy));
  write_file(cfg.out / "report.json", dump(report_json(last.report)));
  ojson timing;
  timing["wall_time"] = ojson::array();
  for (std::size_t s = 0; s < sols.size(); ++s) {
    timing["wall_time"].push_back(sols[s].report.wall_time);
    if (s + 1 < sols.size())
      write_file(cfg.out / ("report_stage" + std::to_string(s + 1) + ".json"),
                 dump(report_json(sols[s].report)));
  }
  write_file(cfg.out / "timing.json", dump(timing));
  return status_of(last);
}

int cmd_simulate(const RunConfig& cfg) {
  validate(cfg);
  const Loaded in = load_solution(cfg);
  const ProblemSpec& p = in.problem;
  if (cfg.sim.n_paths && !p.stochastic())
    throw std::invalid_argument("--n-paths applies only to stochastic problems");
  if (cfg.sim.x0.empty()) throw std::invalid_argument("simulate needs at least one --x0");
  for (const Vec& x0 : cfg.sim.x0) check_x0(p, x0);

  PolicyField policy = in.field.policy;
  SimOptions opt;
  if (cfg.sim.uncontrolled) {
    policy.u.setZero();
    opt.stop_at_exit = false;
  }
  const std::size_t count = cfg.sim.x0.size();
  for (std::size_t k = 0; k < count; ++k) {
    const Vec& x0 = cfg.sim.x0[k];
    if (p.stochastic()) {
      const Ensemble ens = simulate_sde(p, policy, x0, cfg.sim.horizon, cfg.sim.step,
                                        cfg.sim.n_paths.value_or(1000), cfg.sim.seed, opt);
      write_file(cfg.out / ("trajectory_" + std::to_string(k + 1) + ".csv"),
                 trajectory_csv(ens.paths.front()));
      write_file(cfg.out / numbered("ensemble", k, count, ".csv"),
                 ensemble_csv(ens, p.dim, p.control_dim));
    } else {
      const Trajectory t = simulate_ode(p, policy, x0, cfg.sim.horizon, cfg.sim.step, opt);
      write_file(cfg.out / ("trajectory_" + std::to_string(k + 1) + ".csv"), trajectory_csv(t));
    }
  }
  return kConverged;
}

int cmd_residual(const RunConfig& cfg) {
  validate(cfg);
  const Loaded in = load_solution(cfg);
  if (cfg.lambda.size() > 1) throw std::invalid_argument("residual takes a single --lambda");
  const ProblemSpec p = cfg.lambda.empty() ? in.problem : with_discount(in.problem, cfg.lambda[0]);
  const GridProblem gp(p, in.field.value.grid);
  const Residual r = hjb_residual(gp, in.field.value.v, cfg.stencil);
  ojson norms;
  norms["stencil"] = cfg.stencil == ResidualStencil::Central ? "central" : "upwind";
  norms["lambda"] = p.discount;
  norms["sup"] = r.sup;
  norms["l2"] = r.l2;
  write_file(cfg.out / "residual.csv", residual_csv(gp.grid(), r));
  write_file(cfg.out / "residual.json", dump(norms));
  return kConverged;
}

int cmd_reproduce(int test_id, const std::string& variant, const RunConfig& cfg) {
  if (variant != "det" && variant != "stoch")
    throw std::invalid_argument("reproduce: variant must be det or stoch");
  const bool stoch = variant == "stoch";
  const Plan plan = make_plan(test_id, stoch);
  const std::string figure = "test" + std::to_string(test_id) + "_" + variant;
  Manifest manifest(plan, figure);
  const fs::path& out = cfg.out;
  int status = kConverged;

  RunConfig base = cfg;
  base.problem = plan.problem;
  base.lambda = plan.lambda;
  base.dt = plan.dt;
  base.mode = SchemeMode::Coupled;
  base.grid_n.clear();
  validate(base);

  PolicyField free_policy;
  for (const bool constrained : {true, false}) {
    const std::string tag = constrained ? "constrained" : "unconstrained";
    RunConfig rc = base;
    rc.constrained = constrained;
    const ProblemSpec p0 = resolve_problem(rc);

    std::vector<Vec> iterates;
    PolicyIterationOptions opt;
    opt.eps = cfg.eps;
    opt.max_outer = cfg.max_outer;
    const bool track = plan.panels.front().first == "value_error" ||
                       plan.panels.back().first == "value_error";
    if (track) opt.on_value = [&](Index, const ValueField& v) { iterates.push_back(v.v); };
    const auto sols = solve_stages(rc, p0, opt);
    const Solution& sol = sols.back();
    status = std::max(status, status_of(sol));
    const ProblemSpec p = with_discount(p0, plan.lambda.back());

    const std::string value_file = "value_" + tag + ".csv";
    write_file(out / value_file, value_csv(sol.value, sol.policy));
    manifest.add(value_file, "value", tag);
    const std::string report_file = "report_" + tag + ".json";
    write_file(out / report_file, dump(report_json(sol.report)));
    manifest.add(report_file, "report", tag);
    if (track) {
      const std::string f = "value_error_" + tag + ".csv";
      write_file(out / f, value_error_csv(iterates, sol.value.v));
      manifest.add(f, "value_error", tag);
    }

    const GridProblem gp(p, sol.value.grid);
    const Residual r = hjb_residual(gp, sol.value.v);
    const std::string res_file = "residual_" + tag + ".csv";
    write_file(out / res_file, residual_csv(gp.grid(), r));
    manifest.add(res_file, "residual", tag);

    const Index n_paths = cfg.sim.n_paths.value_or(1000);
    auto simulate = [&](const PolicyField& policy, const std::string& series, const SimOptions& so) {
      for (std::size_t k = 0; k < plan.x0.size(); ++k) {
        const std::string stem = "trajectory_" + series + numbered("", k, plan.x0.size(), "");
        if (p.stochastic()) {
          const Ensemble ens = simulate_sde(p, policy, plan.x0[k], plan.horizon, cfg.sim.step,
                                            n_paths, cfg.sim.seed, so);
          const std::string ef = "ensemble_" + series + numbered("", k, plan.x0.size(), "") + ".csv";
          write_file(out / ef, ensemble_csv(ens, p.dim, p.control_dim));
          manifest.add_trajectory(ef, series);
        } else {
          const Trajectory t = simulate_ode(p, policy, plan.x0[k], plan.horizon, cfg.sim.step, so);
          write_file(out / (stem + ".csv"), trajectory_csv(t));
          manifest.add_trajectory(stem + ".csv", series);
        }
      }
    };
    simulate(sol.policy, tag, SimOptions{});
    if (constrained) {
      free_policy = sol.policy;
      free_policy.u.setZero();
      SimOptions so;
      so.stop_at_exit = false;
      simulate(free_policy, "uncontrolled", so);
    }
  }

  ojson m;
  m["test"] = test_id;
  m["variant"] = variant;
  m["problem"] = plan.problem;
  m["lambda"] = plan.lambda;
  m["dt"] = plan.dt;
  m["horizon"] = plan.horizon;
  m["step"] = cfg.sim.step;
  m["seed"] = cfg.sim.seed;
  m["files"] = manifest.json();
  write_file(out / "manifest.json", dump(m));
  return status;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Policy iteration for constrained HJB equations"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::vector<std::string> x0;
  Index n_paths = 0;
  std::string stencil = "central";
  int test_id = 0;
  std::string variant;

  const std::map<std::string, SchemeMode> modes{{"coupled", SchemeMode::Coupled},
                                                {"frozen", SchemeMode::FrozenPolicy}};
  auto solver_flags = [&](CLI::App* s) {
    s->add_option("--problem", cfg.problem, "builtin name or problem JSON file");
    s->add_flag("--constrained,!--unconstrained", cfg.constrained, "apply the control bounds");
    s->add_option("--lambda", cfg.lambda, "discount, or a descending schedule ending at 0")
        ->delimiter(',');
    s->add_option("--dt", cfg.dt, "pseudo-time step per stage")->delimiter(',');
    s->add_option("--eps", cfg.eps, "policy change tolerance");
    s->add_option("--max-outer", cfg.max_outer, "outer iteration cap (frozen mode)");
    s->add_option("--mode", cfg.mode, "coupled or frozen")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
    s->add_option("--grid-n", cfg.grid_n, "nodes per axis")->delimiter(',');
  };
  auto sim_flags = [&](CLI::App* s) {
    s->add_option("--x0", x0, "initial state, comma separated")->allow_extra_args(false);
    s->add_option("--horizon", cfg.sim.horizon, "simulation horizon");
    s->add_option("--step", cfg.sim.step, "integration step");
    s->add_option("--n-paths", n_paths, "paths per ensemble (stochastic problems)");
    s->add_option("--seed", cfg.sim.seed, "base seed; path k uses seed + k");
  };
  auto out_flag = [&](CLI::App* s) { s->add_option("--out", cfg.out, "output directory"); };
  auto from_flag = [&](CLI::App* s) {
    s->add_option("--from", cfg.from, "directory of a previous solve (default: --out)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the HJB equation, write value.csv and report.json");
  solver_flags(solve);
  out_flag(solve);

  CLI::App* simulate = app.add_subcommand("simulate", "closed-loop trajectories from a solve");
  sim_flags(simulate);
  simulate->add_flag("--uncontrolled", cfg.sim.uncontrolled, "simulate with u = 0");
  out_flag(simulate);
  from_flag(simulate);

  CLI::App* residual = app.add_subcommand("residual", "per-node HJB residual of a solve");
  residual->add_option("--lambda", cfg.lambda, "discount used in the residual")->delimiter(',');
  residual->add_option("--stencil", stencil, "central or upwind")
      ->check(CLI::IsMember({"central", "upwind"}));
  out_flag(residual);
  from_flag(residual);

  CLI::App* reproduce = app.add_subcommand("reproduce", "all figure data of a benchmark");
  reproduce->add_option("test", test_id, "benchmark 1..4")->required()->check(CLI::Range(1, 4));
  reproduce->add_option("variant", variant, "det or stoch")
      ->required()
      ->check(CLI::IsMember({"det", "stoch"}));
  reproduce->add_option("--eps", cfg.eps, "policy change tolerance");
  reproduce->add_option("--step", cfg.sim.step, "integration step");
  reproduce->add_option("--n-paths", n_paths, "paths per ensemble (stochastic variants)");
  reproduce->add_option("--seed", cfg.sim.seed, "base seed; path k uses seed + k");
  out_flag(reproduce);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (const auto& s : x0) cfg.sim.x0.push_back(parse_point(s));
    if (n_paths != 0) cfg.sim.n_paths = n_paths;
    cfg.stencil = stencil == "upwind" ? ResidualStencil::Upwind : ResidualStencil::Central;
    if (solve->parsed()) return cmd_solve(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (residual->parsed()) return cmd_residual(cfg);
    return cmd_reproduce(test_id, variant, cfg);
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace hjbpi

#include "hjbpi/io.hpp"

#include "hjbpi/expression.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hjbpi {

namespace {

using nlohmann::json;

void append(std::string& out, double x) { out += format_double(x); }

std::string axis_header(const char* prefix, int n) {
  std::string out;
  for (int k = 1; k <= n; ++k) {
    if (k > 1) out += ',';
    out += prefix + std::to_string(k);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

void trajectory_row(std::string& out, const Trajectory& t, Index n) {
  append(out, t.times[static_cast<std::size_t>(n)]);
  for (Index k = 0; k < t.states.rows(); ++k) {
    out += ',';
    append(out, t.states(k, n));
  }
  for (Index k = 0; k < t.controls.rows(); ++k) {
    out += ',';
    append(out, t.controls(k, n));
  }
  out += ',';
  append(out, t.running_cost[n]);
  out += ',';
  append(out, t.accumulated_cost[n]);
}

std::string trajectory_header(int d, int m) {
  return "t," + axis_header("x", d) + "," + axis_header("u", m) + ",running_cost,accumulated_cost";
}

// Number, null or "inf"/"-inf".
double bound(const json& j, double missing) {
  if (j.is_null()) return missing;
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw std::runtime_error("problem: bad bound entry " + j.dump());
}

Vec vec_of(const json& j, const char* key, Index n) {
  const json& a = j.at(key);
  if (!a.is_array() || static_cast<Index>(a.size()) != n)
    throw std::runtime_error(std::string("problem: '") + key + "' must be an array of length " +
                             std::to_string(n));
  Vec out(n);
  for (Index i = 0; i < n; ++i) out[i] = a[static_cast<std::size_t>(i)].get<double>();
  return out;
}

Vec bounds_of(const json& j, const char* key, Index n, double missing) {
  if (!j.contains(key) || j.at(key).is_null()) return Vec::Constant(n, missing);
  const json& a = j.at(key);
  if (!a.is_array() || static_cast<Index>(a.size()) != n)
    throw std::runtime_error(std::string("problem: '") + key + "' must be an array of length " +
                             std::to_string(n));
  Vec out(n);
  for (Index i = 0; i < n; ++i) out[i] = bound(a[static_cast<std::size_t>(i)], missing);
  return out;
}

std::vector<std::vector<Expression>> matrix_of(const json& j, const char* key, int rows, int cols,
                                               int dim, const std::map<std::string, double>& params) {
  const json& a = j.at(key);
  if (!a.is_array() || static_cast<int>(a.size()) != rows)
    throw std::runtime_error(std::string("problem: '") + key + "' must have " +
                             std::to_string(rows) + " rows");
  std::vector<std::vector<Expression>> out(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    const json& row = a[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw std::runtime_error(std::string("problem: every row of '") + key + "' needs " +
                               std::to_string(cols) + " entries");
    for (const json& e : row) out[static_cast<std::size_t>(r)].push_back(
        Expression::compile(e.get<std::string>(), dim, params));
  }
  return out;
}

std::function<Mat(const Vec&)> matrix_function(std::vector<std::vector<Expression>> e, int rows,
                                               int cols) {
  return [e = std::move(e), rows, cols](const Vec& x) {
    Mat out(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        out(r, c) = e[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)](x);
    return out;
  };
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string value_csv(const ValueField& v, const PolicyField& u) {
  const Grid& g = v.grid;
  if (!(u.grid == g) || v.v.size() != g.size())
    throw std::invalid_argument("value_csv: value and policy live on different grids");
  std::string out = axis_header("x", g.dim()) + ",V," + axis_header("u", static_cast<int>(u.u.rows())) + "\n";
  for (Index i = 0; i < g.size(); ++i) {
    const Vec x = g.node(i);
    for (int k = 0; k < g.dim(); ++k) {
      append(out, x[k]);
      out += ',';
    }
    append(out, v.v[i]);
    for (Index c = 0; c < u.u.rows(); ++c) {
      out += ',';
      append(out, u.u(c, i));
    }
    out += '\n';
  }
  return out;
}

StoredSolution parse_value_csv(const std::string& text, const Grid& grid, int control_dim) {
  std::istringstream is(text);
  std::string line;
  const std::string header =
      axis_header("x", grid.dim()) + ",V," + axis_header("u", control_dim);
  if (!std::getline(is, line) || line != header)
    throw std::runtime_error("value csv: expected header '" + header + "'");
  const std::size_t cols = static_cast<std::size_t>(grid.dim() + 1 + control_dim);
  StoredSolution out{{grid, Vec(grid.size())}, {grid, Mat(control_dim, grid.size())}};
  Index i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (i >= grid.size()) throw std::runtime_error("value csv: more rows than grid nodes");
    const auto cells = split(line, ',');
    if (cells.size() != cols)
      throw std::runtime_error("value csv: row " + std::to_string(i + 1) + " has " +
                               std::to_string(cells.size()) + " columns, expected " +
                               std::to_string(cols));
    const Vec x = grid.node(i);
    for (int k = 0; k < grid.dim(); ++k) {
      const double xk = parse_double(cells[static_cast<std::size_t>(k)]);
      if (std::abs(xk - x[k]) > 1e-9 * (1.0 + std::abs(x[k])))
        throw std::runtime_error("value csv: row " + std::to_string(i + 1) +
                                 " does not match the grid");
    }
    out.value.v[i] = parse_double(cells[static_cast<std::size_t>(grid.dim())]);
    for (int c = 0; c < control_dim; ++c)
      out.policy.u(c, i) = parse_double(cells[static_cast<std::size_t>(grid.dim() + 1 + c)]);
    ++i;
  }
  if (i != grid.size())
    throw std::runtime_error("value csv: " + std::to_string(i) + " rows, grid has " +
                             std::to_string(grid.size()) + " nodes");
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = trajectory_header(static_cast<int>(traj.states.rows()),
                                      static_cast<int>(traj.controls.rows())) + "\n";
  for (Index n = 0; n < traj.samples(); ++n) {
    trajectory_row(out, traj, n);
    out += '\n';
  }
  return out;
}

std::string ensemble_csv(const Ensemble& ens, int dim, int control_dim) {
  if (ens.paths.empty()) throw std::invalid_argument("ensemble_csv: no stored path");
  const Trajectory& first = ens.paths.front();
  std::string out = trajectory_header(dim, control_dim) + ",mean_state_cost,mean_running_cost\n";
  const Index last = first.samples() - 1;
  for (std::size_t n = 0; n < ens.times.size(); ++n) {
    const Index row = static_cast<Index>(n);
    const Index j = std::min(row, last);
    append(out, ens.times[n]);
    for (int k = 0; k < dim; ++k) {
      out += ',';
      append(out, first.states(k, j));
    }
    for (int k = 0; k < control_dim; ++k) {
      out += ',';
      append(out, first.controls(k, j));
    }
    out += ',';
    append(out, first.running_cost[j]);
    out += ',';
    append(out, first.accumulated_cost[j]);
    out += ',';
    append(out, ens.mean_state_cost[row]);
    out += ',';
    append(out, ens.mean_running_cost[row]);
    out += '\n';
  }
  return out;
}

std::string residual_csv(const Grid& g, const Residual& r) {
  std::string out = axis_header("x", g.dim()) + ",residual\n";
  for (Index i = 0; i < g.size(); ++i) {
    const Vec x = g.node(i);
    for (int k = 0; k < g.dim(); ++k) {
      append(out, x[k]);
      out += ',';
    }
    append(out, r.r[i]);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json report_json(const SolveReport& report) {
  nlohmann::ordered_json out;
  out["converged"] = report.converged;
  auto& records = out["iterations"] = nlohmann::ordered_json::array();
  for (const auto& rec : report.iterations) {
    nlohmann::ordered_json j;
    j["iter"] = rec.iter;
    j["policy_change"] = rec.policy_change;
    j["residual_sup"] = rec.residual_sup;
    j["residual_l2"] = rec.residual_l2;
    j["value_drop"] = rec.value_drop;
    j["inner_steps"] = rec.inner_steps;
    records.push_back(std::move(j));
  }
  return out;
}

nlohmann::ordered_json residual_norms_json(const Residual& r) {
  nlohmann::ordered_json out;
  out["sup"] = r.sup;
  out["l2"] = r.l2;
  return out;
}

ProblemSpec parse_problem(const json& j) {
  ProblemSpec p;
  p.name = j.value("name", std::string("custom"));
  p.dim = j.at("dim").get<int>();
  p.control_dim = j.at("control_dim").get<int>();
  if (p.dim < 1 || p.dim > 3) throw std::runtime_error("problem: dim must be 1, 2 or 3");
  if (p.control_dim < 1) throw std::runtime_error("problem: control_dim must be positive");

  std::map<std::string, double> params;
  if (j.contains("params"))
    for (const auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();

  const json& drift = j.at("drift");
  if (!drift.is_array() || static_cast<int>(drift.size()) != p.dim)
    throw std::runtime_error("problem: 'drift' must list one expression per state");
  std::vector<Expression> f;
  for (const json& e : drift) f.push_back(Expression::compile(e.get<std::string>(), p.dim, params));
  p.drift = [f = std::move(f)](const Vec& x) {
    Vec out(static_cast<Index>(f.size()));
    for (std::size_t k = 0; k < f.size(); ++k) out[static_cast<Index>(k)] = f[k](x);
    return out;
  };
  p.input = matrix_function(matrix_of(j, "input", p.dim, p.control_dim, p.dim, params), p.dim,
                            p.control_dim);
  if (j.contains("noise") && !j.at("noise").is_null()) {
    const json& a = j.at("noise");
    if (!a.is_array() || a.empty() || !a[0].is_array() || a[0].empty())
      throw std::runtime_error("problem: 'noise' must be a non-empty matrix");
    p.noise_dim = static_cast<int>(a[0].size());
    p.noise = matrix_function(matrix_of(j, "noise", p.dim, p.noise_dim, p.dim, params), p.dim,
                              p.noise_dim);
    p.additive_noise = j.value("additive_noise", false);
  }
  p.state_cost = [e = Expression::compile(j.at("state_cost").get<std::string>(), p.dim, params)](
                     const Vec& x) { return e(x); };

  p.control_weight = vec_of(j, "R", p.control_dim);
  const double inf = std::numeric_limits<double>::infinity();
  p.lower = bounds_of(j, "alpha", p.control_dim, -inf);
  p.upper = bounds_of(j, "beta", p.control_dim, inf);
  p.discount = j.value("lambda", 0.0);
  p.lo = vec_of(j, "lo", p.dim);
  p.hi = vec_of(j, "hi", p.dim);
  const json& n = j.at("n");
  if (!n.is_array() || static_cast<int>(n.size()) != p.dim)
    throw std::runtime_error("problem: 'n' must list one node count per state");
  for (const json& c : n) p.nodes.push_back(c.get<Index>());
  validate(p);
  return p;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  try {
    return parse_problem(j);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace hjbpi

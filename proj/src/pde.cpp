#include "hjbpi/pde.hpp"

#include "hjbpi/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace hjbpi {

void validate(const SchemeConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("scheme: dt must be positive");
  if (!(cfg.inner_tol > 0.0) || !(cfg.relax_tol > 0.0))
    throw std::invalid_argument("scheme: tolerances must be positive");
  if (cfg.inner_max < 1 || cfg.relax_max < 1)
    throw std::invalid_argument("scheme: iteration caps must be positive");
  if (!(cfg.relax_omega > 0.0 && cfg.relax_omega < 2.0))
    throw std::invalid_argument("scheme: relaxation factor must lie in (0, 2)");
}

double forward_difference(const Grid& g, const Vec& v, Index i, int k) {
  const Index s = g.stride(k);
  if (g.at_high(i, k)) return (v[i] - v[i - s]) / g.spacing(k);
  return (v[i + s] - v[i]) / g.spacing(k);
}

double backward_difference(const Grid& g, const Vec& v, Index i, int k) {
  const Index s = g.stride(k);
  if (g.at_low(i, k)) return (v[i + s] - v[i]) / g.spacing(k);
  return (v[i] - v[i - s]) / g.spacing(k);
}

namespace {

bool is_face(const Grid& g, Index i, int k) { return g.at_low(i, k) || g.at_high(i, k); }

double central_difference(const Grid& g, const Vec& v, Index i, int k) {
  if (is_face(g, i, k)) return forward_difference(g, v, i, k);
  const Index s = g.stride(k);
  return (v[i + s] - v[i - s]) / (2.0 * g.spacing(k));
}

// Gradient at which the 1D drift vanishes: -2 R u_bar / g with u_bar = -f / g.
std::optional<double> sonic_value(const GridProblem& gp, Index i) {
  if (gp.dim() != 1 || gp.control_dim() != 1) return std::nullopt;
  const double g = gp.input(i)(0, 0);
  if (g == 0.0) return std::nullopt;
  const double u_bar = -gp.drift(i)[0] / g;
  return -2.0 * gp.problem().control_weight[0] * u_bar / g;
}

void check_values(const Vec& v, const char* where) {
  if (!v.allFinite()) throw std::domain_error(std::string(where) + ": non-finite field values");
}

double control_cost(const GridProblem& gp, const PolicyField& u, Index i) {
  return u.u.col(i).dot(gp.problem().control_weight.cwiseProduct(u.u.col(i)));
}

void require_same_grid(const GridProblem& gp, const Vec& v, const PolicyField& u) {
  if (v.size() != gp.size() || u.u.cols() != gp.size() || u.u.rows() != gp.control_dim())
    throw std::invalid_argument("value and policy fields must live on the problem grid");
}

// Rows of the pseudo-time system with the 1/dt weight given explicitly
// (0 for the stationary operator). Right-hand side is inv_dt * v_prev + cost.
StencilSystem assemble_rows(const GridProblem& gp, const Vec& v_prev, const PolicyField& u,
                            double inv_dt, BoundaryRule rule) {
  const Grid& grid = gp.grid();
  const int d = gp.dim();
  const Index n = gp.size();
  const double lambda = gp.discount();
  StencilSystem sys;
  sys.diag.resize(n);
  sys.lower = Mat::Zero(d, n);
  sys.upper = Mat::Zero(d, n);
  sys.rhs.resize(n);
  sys.fixed.assign(static_cast<std::size_t>(n), 0);

  for (Index i = 0; i < n; ++i) {
    if (rule == BoundaryRule::FixedFromInit && grid.on_boundary(i)) {
      sys.fixed[static_cast<std::size_t>(i)] = 1;
      sys.diag[i] = 1.0;
      sys.rhs[i] = v_prev[i];
      continue;
    }
    const Vec s = gp.drift(i) + gp.input(i) * u.u.col(i);
    double diag = inv_dt + lambda;
    for (int k = 0; k < d; ++k) {
      const double h = grid.spacing(k);
      const bool low = grid.at_low(i, k), high = grid.at_high(i, k);
      // Transport pointing out of the domain at a face has no upwind
      // neighbour and is dropped.
      if (s[k] > 0.0 && !high) {
        diag += s[k] / h;
        sys.upper(k, i) -= s[k] / h;
      } else if (s[k] < 0.0 && !low) {
        diag -= s[k] / h;
        sys.lower(k, i) += s[k] / h;
      }
      // Second differences; reflecting ghost node at faces.
      const double a = gp.diffusion(i)[k] / (h * h);
      diag += 2.0 * a;
      if (low) {
        sys.upper(k, i) -= 2.0 * a;
      } else if (high) {
        sys.lower(k, i) -= 2.0 * a;
      } else {
        sys.lower(k, i) -= a;
        sys.upper(k, i) -= a;
      }
    }
    sys.diag[i] = diag;
    sys.rhs[i] = inv_dt * v_prev[i] + gp.state_cost(i) + control_cost(gp, u, i);
  }
  return sys;
}

Vec apply_rows(const Grid& g, const StencilSystem& sys, const Vec& v) {
  Vec out = sys.diag.cwiseProduct(v);
  for (Index i = 0; i < v.size(); ++i) {
    for (int k = 0; k < g.dim(); ++k) {
      const Index s = g.stride(k);
      if (sys.lower(k, i) != 0.0) out[i] += sys.lower(k, i) * v[i - s];
      if (sys.upper(k, i) != 0.0) out[i] += sys.upper(k, i) * v[i + s];
    }
  }
  return out;
}

void refresh_rhs(StencilSystem& sys, const Vec& cost, double inv_dt, const Vec& v_prev) {
  for (Index i = 0; i < v_prev.size(); ++i)
    sys.rhs[i] = sys.fixed[static_cast<std::size_t>(i)] ? v_prev[i] : inv_dt * v_prev[i] + cost[i];
}

Vec solve_tridiagonal(const StencilSystem& sys) {
  const Index n = sys.diag.size();
  Vec cp(n), dp(n), x(n);
  double m = sys.diag[0];
  for (Index i = 0; i < n; ++i) {
    const double a = i > 0 ? sys.lower(0, i) : 0.0;
    m = sys.diag[i] - (i > 0 ? a * cp[i - 1] : 0.0);
    if (!(std::abs(m) > 0.0) || !std::isfinite(m))
      throw std::runtime_error("tridiagonal solve: singular pivot at row " + std::to_string(i));
    cp[i] = (i + 1 < n ? sys.upper(0, i) : 0.0) / m;
    dp[i] = (sys.rhs[i] - (i > 0 ? a * dp[i - 1] : 0.0)) / m;
  }
  x[n - 1] = dp[n - 1];
  for (Index i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

double scaled_residual(const Grid& g, const StencilSystem& sys, const Vec& v) {
  const Vec r = sys.rhs - apply_rows(g, sys, v);
  return r.cwiseQuotient(sys.diag).cwiseAbs().maxCoeff();
}

Vec relax(const Grid& g, const StencilSystem& sys, Vec v, const SchemeConfig& cfg,
          StepStats* stats) {
  const int d = g.dim();
  Index n[3] = {1, 1, 1}, st[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    n[k] = g.count(k);
    st[k] = g.stride(k);
  }
  const double omega = cfg.relax_omega;
  const int orderings = 1 << d;
  double res = scaled_residual(g, sys, v);
  Index sweep = 0;
  while (res > cfg.relax_tol * (1.0 + v.cwiseAbs().maxCoeff())) {
    if (sweep >= cfg.relax_max) {
      std::ostringstream os;
      os << "relaxation did not converge after " << sweep << " sweeps (residual " << res
         << "); reduce dt";
      throw std::runtime_error(os.str());
    }
    const int mask = static_cast<int>(sweep % orderings);
    for (Index a0 = 0; a0 < n[0]; ++a0) {
      const Index i0 = (mask & 1) ? n[0] - 1 - a0 : a0;
      for (Index a1 = 0; a1 < n[1]; ++a1) {
        const Index i1 = (mask & 2) ? n[1] - 1 - a1 : a1;
        for (Index a2 = 0; a2 < n[2]; ++a2) {
          const Index i2 = (mask & 4) ? n[2] - 1 - a2 : a2;
          const Index i = i0 * st[0] + i1 * st[1] + i2 * st[2];
          double acc = sys.rhs[i];
          for (int k = 0; k < d; ++k) {
            const double lo = sys.lower(k, i), up = sys.upper(k, i);
            if (lo != 0.0) acc -= lo * v[i - st[k]];
            if (up != 0.0) acc -= up * v[i + st[k]];
          }
          v[i] += omega * (acc / sys.diag[i] - v[i]);
        }
      }
    }
    ++sweep;
    res = scaled_residual(g, sys, v);
  }
  if (stats) {
    stats->sweeps = sweep;
    stats->residual = res;
  }
  return v;
}

[[noreturn]] void report_divergence(const GridProblem& gp, const Vec& v, const char* why) {
  Index worst = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || std::abs(v[i]) > std::abs(v[worst])) {
      worst = i;
      if (!std::isfinite(v[i])) break;
    }
  std::ostringstream os;
  os << "value iteration diverged (" << why << ") at node " << worst << ", x = ("
     << gp.grid().node(worst).transpose() << ")";
  throw DivergenceError(os.str(), worst);
}

}  // namespace

Vec node_drift(const GridProblem& gp, const PolicyField& u, Index i) {
  return gp.drift(i) + gp.input(i) * u.u.col(i);
}

Mat upwind_gradient(const GridProblem& gp, const Vec& v, const PolicyField& u) {
  require_same_grid(gp, v, u);
  check_values(v, "upwind_gradient");
  const Grid& g = gp.grid();
  Mat grad(gp.dim(), gp.size());
  for (Index i = 0; i < gp.size(); ++i) {
    const Vec s = node_drift(gp, u, i);
    for (int k = 0; k < gp.dim(); ++k) {
      if (s[k] > 0.0) {
        grad(k, i) = forward_difference(g, v, i, k);
      } else if (s[k] < 0.0) {
        grad(k, i) = backward_difference(g, v, i, k);
      } else if (auto sonic = sonic_value(gp, i); sonic && !is_face(g, i, k)) {
        grad(k, i) = *sonic;
      } else {
        grad(k, i) = central_difference(g, v, i, k);
      }
    }
  }
  return grad;
}

Mat central_gradient(const GridProblem& gp, const Vec& v) {
  check_values(v, "central_gradient");
  Mat grad(gp.dim(), gp.size());
  for (Index i = 0; i < gp.size(); ++i)
    for (int k = 0; k < gp.dim(); ++k) grad(k, i) = central_difference(gp.grid(), v, i, k);
  return grad;
}

Mat policy_gradient(const GridProblem& gp, const Vec& v) {
  if (v.size() != gp.size()) throw std::invalid_argument("policy_gradient: field size mismatch");
  check_values(v, "policy_gradient");
  const auto& p = gp.problem();
  const Grid& g = gp.grid();
  const int d = gp.dim();
  Mat grad(d, gp.size());
  Vec base(d), trial(d);
  for (Index i = 0; i < gp.size(); ++i) {
    for (int k = 0; k < d; ++k) base[k] = central_difference(g, v, i, k);
    const auto gi = gp.input(i);
    const auto fi = gp.drift(i);
    for (int k = 0; k < d; ++k) {
      if (is_face(g, i, k)) {
        grad(k, i) = base[k];
        continue;
      }
      // Axis-k drift and axis-k part of the Hamiltonian for a trial slope q.
      auto control_at = [&](double q) {
        trial = base;
        trial[k] = q;
        return control_law(gi, trial, p.control_weight, p.lower, p.upper);
      };
      auto drift_at = [&](double q) { return fi[k] + gi.row(k).dot(control_at(q)); };
      auto hamiltonian_at = [&](double q) {
        const Vec u = control_at(q);
        return (fi[k] + gi.row(k).dot(u)) * q + u.dot(p.control_weight.cwiseProduct(u));
      };
      const double df = forward_difference(g, v, i, k);
      const double db = backward_difference(g, v, i, k);
      const double s_f = drift_at(df);
      const double s_b = drift_at(db);
      bool fwd = s_f > 0.0, bwd = s_b < 0.0;
      if (fwd && bwd) (hamiltonian_at(df) <= hamiltonian_at(db) ? bwd : fwd) = false;
      if (fwd) {
        grad(k, i) = df;
      } else if (bwd) {
        grad(k, i) = db;
      } else if (auto sonic = sonic_value(gp, i)) {
        grad(k, i) = *sonic;
      } else if (gi.row(k).isZero() || s_f == s_b) {
        grad(k, i) = 0.5 * (df + db);
      } else {
        // The drift is nonincreasing in q and changes sign on [db, df].
        double lo = std::min(db, df), hi = std::max(db, df);
        for (int it = 0; it < 100 && lo < hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid == lo || mid == hi) break;
          (drift_at(mid) > 0.0 ? lo : hi) = mid;
        }
        grad(k, i) = 0.5 * (lo + hi);
      }
    }
  }
  return grad;
}

double diffusion_term(const GridProblem& gp, const Vec& v, Index i) {
  const Grid& g = gp.grid();
  double acc = 0.0;
  for (int k = 0; k < gp.dim(); ++k) {
    const double a = gp.diffusion(i)[k];
    if (a == 0.0) continue;
    if (is_face(g, i, k))
      throw std::out_of_range("diffusion_term: stencil leaves the grid at node " +
                              std::to_string(i));
    const Index s = g.stride(k);
    const double h = g.spacing(k);
    acc += a * (v[i + s] - 2.0 * v[i] + v[i - s]) / (h * h);
  }
  return acc;
}

Vec row_defect(const GridProblem& gp, const Vec& v, const PolicyField& u, BoundaryRule rule) {
  require_same_grid(gp, v, u);
  const StencilSystem sys = assemble_rows(gp, v, u, 0.0, rule);
  Vec defect = sys.rhs - apply_rows(gp.grid(), sys, v);
  for (Index i = 0; i < v.size(); ++i)
    if (sys.fixed[static_cast<std::size_t>(i)]) defect[i] = 0.0;
  return defect;
}

void check_m_matrix(const StencilSystem& sys, double margin) {
  const Index n = sys.diag.size();
  for (Index i = 0; i < n; ++i) {
    if (sys.fixed[static_cast<std::size_t>(i)]) continue;
    double off = 0.0;
    for (Index k = 0; k < sys.lower.rows(); ++k) {
      if (sys.lower(k, i) > 0.0 || sys.upper(k, i) > 0.0)
        throw std::logic_error("M-matrix check: positive off-diagonal in row " +
                               std::to_string(i));
      off += -sys.lower(k, i) - sys.upper(k, i);
    }
    const double need = off + margin;
    if (!(sys.diag[i] > 0.0) || sys.diag[i] < need - 1e-12 * std::max(1.0, need))
      throw std::logic_error("M-matrix check: row " + std::to_string(i) +
                             " is not diagonally dominant");
  }
}

StencilSystem assemble(const GridProblem& gp, const Vec& v_prev, const PolicyField& u,
                       const SchemeConfig& cfg) {
  require_same_grid(gp, v_prev, u);
  check_values(v_prev, "assemble");
  StencilSystem sys = assemble_rows(gp, v_prev, u, 1.0 / cfg.dt, cfg.boundary);
  check_m_matrix(sys, gp.discount() + 1.0 / cfg.dt);
  return sys;
}

Vec solve_system(const Grid& g, const StencilSystem& sys, const Vec& guess,
                 const SchemeConfig& cfg, StepStats* stats) {
  if (g.dim() == 1) {
    Vec x = solve_tridiagonal(sys);
    if (stats) {
      stats->sweeps = 1;
      stats->residual = scaled_residual(g, sys, x);
    }
    return x;
  }
  return relax(g, sys, guess, cfg, stats);
}

ValueField implicit_step(const GridProblem& gp, const ValueField& v_prev, const PolicyField& u,
                         const SchemeConfig& cfg, StepStats* stats) {
  const StencilSystem sys = assemble(gp, v_prev.v, u, cfg);
  return {gp.grid(), solve_system(gp.grid(), sys, v_prev.v, cfg, stats)};
}

void pin_origin(const GridProblem& gp, Vec& v) {
  if (gp.origin() >= 0) v.array() -= v[gp.origin()];
}

std::optional<Index> trapped_cost_node(const GridProblem& gp, const PolicyField& u) {
  const Grid& g = gp.grid();
  const Index n = gp.size();
  const int d = gp.dim();
  const StencilSystem sys = assemble_rows(gp, Vec::Zero(n), u, 0.0, BoundaryRule::OneSided);

  std::vector<std::vector<Index>> adj(n);
  for (Index i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      if (sys.lower(k, i) < 0.0) adj[i].push_back(i - g.stride(k));
      if (sys.upper(k, i) < 0.0) adj[i].push_back(i + g.stride(k));
    }

  // Iterative Tarjan strongly connected components.
  std::vector<Index> index(n, -1), low(n, 0), comp(n, -1), stack, call;
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> edge_pos(n, 0);
  Index counter = 0, ncomp = 0;

  for (Index root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back(root);
    while (!call.empty()) {
      const Index v = call.back();
      if (index[v] < 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = 1;
      }
      bool descended = false;
      while (edge_pos[v] < adj[v].size()) {
        const Index w = adj[v][edge_pos[v]++];
        if (index[w] < 0) {
          call.push_back(w);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      call.pop_back();
      if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
    }
  }

  std::vector<char> closed(ncomp, 1);
  for (Index i = 0; i < n; ++i)
    for (Index j : adj[i])
      if (comp[j] != comp[i]) closed[comp[i]] = 0;

  std::optional<Index> worst;
  for (Index i = 0; i < n; ++i) {
    if (!closed[comp[i]] || !(sys.rhs[i] > 1e-14)) continue;
    if (!worst || sys.rhs[i] > sys.rhs[*worst]) worst = i;
  }
  return worst;
}

GhjbResult ghjb_solve(const GridProblem& gp, const ValueField& v_init, const PolicyField& u,
                      const SchemeConfig& cfg) {
  validate(cfg);
  require_same_grid(gp, v_init.v, u);
  const bool undiscounted = gp.discount() == 0.0;
  if (undiscounted && cfg.boundary == BoundaryRule::OneSided) {
    if (auto node = trapped_cost_node(gp, u)) {
      std::ostringstream os;
      os << "policy is not admissible: node " << *node << ", x = ("
         << gp.grid().node(*node).transpose() << ") never reaches the origin";
      throw DivergenceError(os.str(), *node);
    }
  }

  const double inv_dt = 1.0 / cfg.dt;
  StencilSystem sys = assemble(gp, v_init.v, u, cfg);
  Vec cost(gp.size());
  for (Index i = 0; i < gp.size(); ++i) cost[i] = gp.state_cost(i) + control_cost(gp, u, i);

  GhjbResult out{v_init, 0, false, 0.0};
  Vec& v = out.value.v;
  for (Index step = 1; step <= cfg.inner_max; ++step) {
    refresh_rhs(sys, cost, inv_dt, v);
    Vec next = solve_system(gp.grid(), sys, v, cfg);
    if (!next.allFinite()) report_divergence(gp, next, "non-finite value");
    const double top = next.cwiseAbs().maxCoeff();
    if (top > cfg.divergence_bound) report_divergence(gp, next, "value bound exceeded");
    out.last_change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    out.steps = step;
    if (out.last_change <= cfg.inner_tol * (1.0 + top)) {
      out.stationary = true;
      break;
    }
  }
  if (undiscounted) pin_origin(gp, v);
  return out;
}

}  // namespace hjbpi

#include "hjbpi/simulate.hpp"

#include "hjbpi/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace hjbpi {

namespace {

bool outside(const Vec& x, const ProblemSpec& p) {
  return (x.array() < p.lo.array()).any() || (x.array() > p.hi.array()).any();
}

// Time at which the segment a -> b (over [t0, t0 + h]) first leaves the box.
double crossing_time(const Vec& a, const Vec& b, double t0, double h, const ProblemSpec& p) {
  double frac = 1.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double d = b[k] - a[k];
    if (b[k] > p.hi[k] && d != 0.0) frac = std::min(frac, (p.hi[k] - a[k]) / d);
    if (b[k] < p.lo[k] && d != 0.0) frac = std::min(frac, (p.lo[k] - a[k]) / d);
  }
  return t0 + std::clamp(frac, 0.0, 1.0) * h;
}

Index step_count(double T, double h) {
  if (!(h > 0.0) || !(T >= h)) throw std::invalid_argument("simulate: need h > 0 and T >= h");
  return static_cast<Index>(std::llround(T / h));
}

void check_inputs(const ProblemSpec& p, const PolicyField& policy, const Vec& x0) {
  if (x0.size() != p.dim) throw std::invalid_argument("simulate: x0 has wrong dimension");
  if (!x0.allFinite()) throw std::domain_error("simulate: non-finite initial state");
  if (policy.u.rows() != p.control_dim || policy.u.cols() != policy.grid.size())
    throw std::invalid_argument("simulate: policy does not match the problem");
}

struct Recorder {
  const ProblemSpec& p;
  Trajectory& traj;
  Index n = 0;

  void push(double t, const Vec& x, const Vec& u, double h) {
    traj.times.push_back(t);
    traj.states.col(n) = x;
    traj.controls.col(n) = u;
    traj.running_cost[n] = running_cost(p, x, u);
    const double w = std::exp(-p.discount * t);
    traj.accumulated_cost[n] =
        n == 0 ? 0.0
               : traj.accumulated_cost[n - 1] +
                     0.5 * h *
                         (std::exp(-p.discount * traj.times[static_cast<std::size_t>(n - 1)]) *
                              traj.running_cost[n - 1] +
                          w * traj.running_cost[n]);
    ++n;
  }

  void finish() {
    traj.states.conservativeResize(Eigen::NoChange, n);
    traj.controls.conservativeResize(Eigen::NoChange, n);
    traj.running_cost.conservativeResize(n);
    traj.accumulated_cost.conservativeResize(n);
  }
};

Trajectory allocate(const ProblemSpec& p, Index samples) {
  Trajectory t;
  t.times.reserve(static_cast<std::size_t>(samples));
  t.states.resize(p.dim, samples);
  t.controls.resize(p.control_dim, samples);
  t.running_cost.resize(samples);
  t.accumulated_cost.resize(samples);
  return t;
}

}  // namespace

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HJB_PI_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

Feedback feedback_at(const Vec& x, const PolicyField& policy, const ProblemSpec& p) {
  if (!x.allFinite()) throw std::domain_error("feedback_at: non-finite state");
  const Grid& g = policy.grid;
  const int d = g.dim();
  if (x.size() != d) throw std::invalid_argument("feedback_at: state has wrong dimension");
  Feedback out;
  Index base[3] = {0, 0, 0};
  double w[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    double xk = x[k];
    if (xk < g.lo()[k] || xk > g.hi()[k]) {
      out.clamped = true;
      xk = std::clamp(xk, g.lo()[k], g.hi()[k]);
    }
    const double t = (xk - g.lo()[k]) / g.spacing(k);
    const Index i0 = std::clamp<Index>(static_cast<Index>(std::floor(t)), 0, g.count(k) - 2);
    base[k] = i0;
    w[k] = std::clamp(t - static_cast<double>(i0), 0.0, 1.0);
  }
  Vec u = Vec::Zero(policy.u.rows());
  for (int corner = 0; corner < (1 << d); ++corner) {
    double weight = 1.0;
    Index flat = 0;
    for (int k = 0; k < d; ++k) {
      const bool up = (corner >> k) & 1;
      weight *= up ? w[k] : 1.0 - w[k];
      flat += (base[k] + (up ? 1 : 0)) * g.stride(k);
    }
    if (weight != 0.0) u += weight * policy.u.col(flat);
  }
  out.u = project_box(u, p.lower, p.upper);
  return out;
}

Trajectory simulate_ode(const ProblemSpec& p, const PolicyField& policy, const Vec& x0, double T,
                        double h, const SimOptions& opt) {
  check_inputs(p, policy, x0);
  const Index steps = step_count(T, h);
  Trajectory traj = allocate(p, steps + 1);
  Recorder rec{p, traj};
  auto rhs = [&](const Vec& x) { return eval_dynamics(p, x, feedback_at(x, policy, p).u); };

  Vec x = x0;
  rec.push(0.0, x, feedback_at(x, policy, p).u, h);
  for (Index n = 1; n <= steps; ++n) {
    const double t0 = static_cast<double>(n - 1) * h;
    const Vec k1 = rhs(x);
    const Vec k2 = rhs(x + 0.5 * h * k1);
    const Vec k3 = rhs(x + 0.5 * h * k2);
    const Vec k4 = rhs(x + h * k3);
    Vec next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) throw std::domain_error("simulate_ode: state became non-finite");
    if (!traj.exited && outside(next, p)) {
      traj.exited = true;
      traj.exit_time = crossing_time(x, next, t0, h, p);
    }
    x = std::move(next);
    rec.push(static_cast<double>(n) * h, x, feedback_at(x, policy, p).u, h);
    if (traj.exited && opt.stop_at_exit) break;
  }
  rec.finish();
  return traj;
}

Ensemble simulate_sde(const ProblemSpec& p, const PolicyField& policy, const Vec& x0, double T,
                      double h, Index n_paths, std::uint64_t seed, const SimOptions& opt) {
  check_inputs(p, policy, x0);
  if (!p.stochastic()) throw std::invalid_argument("simulate_sde: problem has no noise map");
  if (n_paths < 1) throw std::invalid_argument("simulate_sde: need at least one path");
  const Index steps = step_count(T, h);
  const Index samples = steps + 1;
  const double sqrt_h = std::sqrt(h);

  auto run_path = [&](Index k) {
    Trajectory traj = allocate(p, samples);
    traj.seed = seed + static_cast<std::uint64_t>(k);
    Recorder rec{p, traj};
    std::mt19937_64 rng(traj.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x = x0;
    Vec xi(p.noise_dim);
    Vec u = feedback_at(x, policy, p).u;
    rec.push(0.0, x, u, h);
    for (Index n = 1; n <= steps; ++n) {
      for (Index c = 0; c < xi.size(); ++c) xi[c] = normal(rng);
      Vec next = x + h * eval_dynamics(p, x, u) + sqrt_h * (p.noise(x) * xi);
      if (!next.allFinite()) throw std::domain_error("simulate_sde: state became non-finite");
      if (!traj.exited && outside(next, p)) {
        traj.exited = true;
        traj.exit_time = crossing_time(x, next, static_cast<double>(n - 1) * h, h, p);
      }
      x = std::move(next);
      u = feedback_at(x, policy, p).u;
      rec.push(static_cast<double>(n) * h, x, u, h);
      if (traj.exited && opt.stop_at_exit) break;
    }
    rec.finish();
    return traj;
  };

  // Paths are reduced in fixed blocks so the sums do not depend on threading.
  constexpr Index block = 64;
  const Index n_blocks = (n_paths + block - 1) / block;
  Mat state_sum = Mat::Zero(samples, n_blocks);
  Mat cost_sum = Mat::Zero(samples, n_blocks);
  Ensemble out;
  out.path_cost.resize(n_paths);
  std::vector<Index> exited(static_cast<std::size_t>(n_blocks), 0);
  std::vector<Trajectory> kept(static_cast<std::size_t>(std::min(opt.store_paths, n_paths)));

  auto run_block = [&](Index b) {
    for (Index k = b * block; k < std::min(n_paths, (b + 1) * block); ++k) {
      Trajectory traj = run_path(k);
      const Index last = traj.samples() - 1;
      for (Index n = 0; n < samples; ++n) {
        const Index j = std::min(n, last);
        state_sum(n, b) += traj.states.col(j).squaredNorm();
        cost_sum(n, b) += traj.running_cost[j];
      }
      out.path_cost[k] = traj.accumulated_cost[last];
      exited[static_cast<std::size_t>(b)] += traj.exited ? 1 : 0;
      if (k < static_cast<Index>(kept.size())) kept[static_cast<std::size_t>(k)] = std::move(traj);
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<Index>(worker_threads(), n_blocks));
  if (workers <= 1) {
    for (Index b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (Index b = w; b < n_blocks; b += workers) run_block(b);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  out.times.resize(static_cast<std::size_t>(samples));
  for (Index n = 0; n < samples; ++n) out.times[static_cast<std::size_t>(n)] = static_cast<double>(n) * h;
  out.mean_state_cost = state_sum.rowwise().sum() / static_cast<double>(n_paths);
  out.mean_running_cost = cost_sum.rowwise().sum() / static_cast<double>(n_paths);
  for (Index e : exited) out.exited_paths += e;
  out.paths = std::move(kept);
  return out;
}

double settling_time(const Trajectory& traj, double threshold) {
  double t = std::numeric_limits<double>::infinity();
  for (Index n = traj.samples() - 1; n >= 0; --n) {
    if (traj.states.col(n).norm() >= threshold) break;
    t = traj.times[static_cast<std::size_t>(n)];
  }
  return t;
}

}  // namespace hjbpi

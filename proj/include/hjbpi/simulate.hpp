#pragma once

#include "hjbpi/discretization.hpp"

#include <cstdint>
#include <vector>

namespace hjbpi {

struct Trajectory {
  std::vector<double> times;
  Mat states;    // d x samples
  Mat controls;  // m x samples
  Vec running_cost;
  Vec accumulated_cost;  // discounted, trapezoid rule
  bool exited = false;   // left the domain at some point
  double exit_time = 0.0;
  std::uint64_t seed = 0;

  Index samples() const { return static_cast<Index>(times.size()); }
};

struct SimOptions {
  /// Stop integrating once the state leaves the domain. When false the path
  /// continues with the feedback evaluated at the nearest point of the domain.
  bool stop_at_exit = true;
  /// Number of individual paths kept by simulate_sde.
  Index store_paths = 16;
};

struct Feedback {
  Vec u;
  bool clamped = false;  // x was outside the domain
};

/// Multilinear interpolation of the stored policy at x, followed by the box
/// projection.
Feedback feedback_at(const Vec& x, const PolicyField& policy, const ProblemSpec& p);

/// Classical fourth-order Runge-Kutta integration of the closed loop.
Trajectory simulate_ode(const ProblemSpec& p, const PolicyField& policy, const Vec& x0, double T,
                        double h, const SimOptions& opt = {});

struct Ensemble {
  std::vector<double> times;
  Vec mean_state_cost;    // E|x(t)|^2
  Vec mean_running_cost;  // E[l(x) + |u|_R^2]
  Vec path_cost;          // accumulated cost of each path at the horizon
  Index exited_paths = 0;
  std::vector<Trajectory> paths;  // first opt.store_paths paths
};

/// Euler-Maruyama ensemble; path k uses the seed `seed + k`, so the result is
/// reproducible for fixed (seed, n_paths, h) independent of thread count.
/// A truncated path contributes its last sample to the means.
Ensemble simulate_sde(const ProblemSpec& p, const PolicyField& policy, const Vec& x0, double T,
                      double h, Index n_paths, std::uint64_t seed, const SimOptions& opt = {});

/// First time |x(t)| drops below the threshold and stays there until the end
/// of the trajectory; infinity if it never does.
double settling_time(const Trajectory& traj, double threshold);

/// Worker thread cap from HJB_PI_THREADS (default: hardware concurrency).
unsigned worker_threads();

}  // namespace hjbpi

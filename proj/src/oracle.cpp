#include "hjbpi/oracle.hpp"

#include <algorithm>

namespace hjbpi {

QuadraticFit fit_quadratic(const ValueField& v, double window) {
  if (v.grid.dim() != 1) throw std::invalid_argument("fit_quadratic: 1D fields only");
  double num = 0.0, den = 0.0;
  QuadraticFit out;
  for (Index i = 0; i < v.grid.size(); ++i) {
    const double x = v.grid.node(i)[0];
    if (std::abs(x) > window) continue;
    const double x2 = x * x;
    num += x2 * v.v[i];
    den += x2 * x2;
    ++out.nodes;
  }
  if (out.nodes < 5) throw std::invalid_argument("fit_quadratic: fewer than 5 nodes in window");
  out.p = num / den;
  for (Index i = 0; i < v.grid.size(); ++i) {
    const double x = v.grid.node(i)[0];
    if (std::abs(x) > window || x == 0.0) continue;
    const double model = out.p * x * x;
    out.max_rel_dev = std::max(out.max_rel_dev, std::abs(v.v[i] - model) / std::abs(model));
  }
  return out;
}

ValueField restrict_field(const ValueField& fine, const Grid& coarse, int refine) {
  if (refine < 1) throw std::invalid_argument("restrict_field: refine must be >= 1");
  ValueField out{coarse, Vec(coarse.size())};
  for (Index i = 0; i < coarse.size(); ++i) {
    MultiIndex mi = coarse.multi(i);
    for (int k = 0; k < coarse.dim(); ++k) mi[k] *= refine;
    out.v[i] = fine.v[fine.grid.flat(mi)];
  }
  return out;
}

ValueField fine_grid_reference(const ProblemSpec& p, const Grid& coarse, int refine,
                               const SchemeConfig& cfg, const PolicyIterationOptions& opt) {
  if (refine != 1 && refine != 2 && refine != 4)
    throw std::invalid_argument("fine_grid_reference: refine must be 1, 2 or 4");
  std::vector<Index> counts(coarse.counts());
  for (auto& n : counts) n = (n - 1) * refine + 1;
  const GridProblem gp(p, make_grid(coarse.lo(), coarse.hi(), counts));
  const Solution sol = policy_iteration(gp, proportional_policy(gp), cfg, opt);
  return restrict_field(sol.value, coarse, refine);
}

}  // namespace hjbpi

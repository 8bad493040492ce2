#include "saa/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saa/error.hpp"
#include "saa/parallel.hpp"

namespace saa {

std::string to_string(Method m) {
  return m == Method::grid ? "grid" : "switching-subgradient";
}

Method method_from_string(const std::string& name) {
  if (name == "grid") return Method::grid;
  if (name == "switching-subgradient" || name == "subgradient") return Method::switching_subgradient;
  fail(ErrorKind::invalid_argument, "unknown solver method '" + name + "'");
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::yes: return "true";
    case Membership::no: return "false";
    case Membership::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

namespace {

std::vector<double> residuals_at(const EmpiricalProblem& emp, std::span<const double> x) {
  const std::size_t m = emp.program().constraint_count();
  std::vector<double> r(m);
  for (std::size_t i = 1; i <= m; ++i) r[i - 1] = emp.value(i, x) - emp.relaxations()[i - 1];
  return r;
}

double max_of(const std::vector<double>& v) {
  double out = -std::numeric_limits<double>::infinity();
  for (double a : v) out = std::max(out, a);
  return out;
}

double norm2(std::span<const double> g) {
  double s = 0.0;
  for (double a : g) s += a * a;
  return std::sqrt(s);
}

Solution solve_grid(const EmpiricalProblem& emp, const SolverConfig& cfg) {
  const SpaceDescriptor& y = emp.program().hard_set();
  require(y.dimension() <= 3, ErrorKind::invalid_argument, "grid solver needs dimension <= 3");
  const auto grid = y.grid(cfg.h, cfg.grid_budget);
  const std::size_t m = emp.program().constraint_count();
  std::vector<double> value(grid.size());
  std::vector<char> feasible(grid.size(), 0);
  parallel_for(grid.size(), cfg.threads, [&](std::size_t k) {
    for (std::size_t i = 1; i <= m; ++i) {
      if (emp.value(i, grid[k]) - emp.relaxations()[i - 1] > kSetTolerance) return;
    }
    feasible[k] = 1;
    value[k] = emp.value(0, grid[k]);
  });
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (feasible[k] && (!best || value[k] < value[*best])) best = k;
  }
  require(best.has_value(), ErrorKind::infeasible, "no grid point of Y satisfies the SAA constraints");
  Solution sol;
  sol.method = Method::grid;
  sol.x = grid[*best];
  sol.value = value[*best];
  sol.lower = sol.value;
  sol.residuals = residuals_at(emp, sol.x);
  sol.grid_points = grid.size();
  sol.seed = cfg.seed;
  return sol;
}

// Euclidean diameter bound of Y from its own-norm diameter.
double euclidean_radius(const SpaceDescriptor& y) {
  const double d = y.diameter();
  switch (y.norm()) {
    case Norm::l1:
    case Norm::l2: return d;
    case Norm::linf: return d * std::sqrt(static_cast<double>(y.dimension()));
  }
  return d;
}

Solution solve_subgradient(const EmpiricalProblem& emp, const SolverConfig& cfg) {
  const StochasticProgram& prog = emp.program();
  require(prog.convex(), ErrorKind::attestation, "switching subgradient needs a convexity attestation");
  const SpaceDescriptor& y = prog.hard_set();
  require(y.kind() != SpaceKind::cloud, ErrorKind::invalid_argument, "switching subgradient needs a convex hard set");
  const std::size_t d = y.dimension();
  const std::size_t m = prog.constraint_count();
  const double radius = std::max(euclidean_radius(y), 1e-12);

  Point x = y.project(cfg.start ? std::span<const double>(*cfg.start) : std::span<const double>(Point(d, 0.0)));
  std::vector<double> g(d);
  // sum_k s_k^2 and sum over non-productive steps of 2 s_k r_k / |g_k|
  double sq = 0.0, np_credit = 0.0, weight = 0.0;
  Point avg(d, 0.0);
  std::optional<Point> best;
  double best_value = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  bool exact = false;
  for (; k < cfg.iterations; ++k) {
    const double s = cfg.step_scale * radius / std::sqrt(static_cast<double>(k + 1));
    const auto r = residuals_at(emp, x);
    std::size_t worst = 0;
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (r[i] > r[worst]) worst = i;
    }
    if (m == 0 || r[worst] <= cfg.tol_feas) {
      const double v = emp.value(0, x);
      emp.subgradient(0, x, g);
      const double gn = norm2(g);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
      if (gn == 0.0) {
        // a stationary point of a convex objective over convex Y
        exact = true;
        gap = 0.0;
        ++k;
        break;
      }
      const double w = s / gn;
      weight += w;
      for (std::size_t j = 0; j < d; ++j) avg[j] += w * x[j];
      for (std::size_t j = 0; j < d; ++j) g[j] = x[j] - s * g[j] / gn;
    } else {
      emp.subgradient(worst + 1, x, g);
      const double gn = norm2(g);
      require(gn > 0.0, ErrorKind::infeasible,
              "constraint " + std::to_string(worst + 1) + " is violated at a stationary point");
      np_credit += 2.0 * s * r[worst] / gn;
      for (std::size_t j = 0; j < d; ++j) g[j] = x[j] - s * g[j] / gn;
    }
    sq += s * s;
    const double numerator = radius * radius + sq - np_credit;
    require(numerator >= 0.0, ErrorKind::infeasible, "subgradient certificate proves the SAA feasible set empty");
    if (weight > 0.0) {
      gap = numerator / (2.0 * weight);
      if (gap <= cfg.tol_opt) {
        ++k;
        break;
      }
    }
    x = y.project(g);
  }
  require(best.has_value(), ErrorKind::infeasible,
          "constraints stayed violated for the whole iteration budget");

  Solution sol;
  sol.method = Method::switching_subgradient;
  sol.iterations = k;
  sol.seed = cfg.seed;
  sol.x = *best;
  sol.value = best_value;
  if (!exact && weight > 0.0) {
    for (auto& a : avg) a /= weight;
    const Point p = y.project(avg);
    const auto r = residuals_at(emp, p);
    if ((m == 0 || max_of(r) <= cfg.tol_feas) && emp.value(0, p) < sol.value) {
      sol.x = p;
      sol.value = emp.value(0, p);
    }
  }
  sol.certified_gap = gap;
  sol.lower = sol.value - gap;
  sol.budget_exhausted = gap > cfg.tol_opt;
  sol.residuals = residuals_at(emp, sol.x);
  return sol;
}

}  // namespace

Solution solve_saa(const EmpiricalProblem& empirical, const SolverConfig& config) {
  require(config.tol_opt > 0.0 && config.tol_feas > 0.0, ErrorKind::invalid_argument, "tolerances must be > 0");
  require(config.iterations >= 1, ErrorKind::invalid_argument, "iteration budget must be >= 1");
  require(config.h > 0.0, ErrorKind::invalid_argument, "grid resolution must be > 0");
  Solution sol = config.method == Method::grid ? solve_grid(empirical, config) : solve_subgradient(empirical, config);
  const double worst = sol.residuals.empty() ? 0.0 : max_of(sol.residuals);
  if (worst > config.tol_feas + kSetTolerance) {
    fail(ErrorKind::infeasible, "solution violates the SAA constraints by " + std::to_string(worst));
  }
  return sol;
}

Membership near_optimal_check(const EmpiricalProblem& empirical, const Solution& solution,
                              std::span<const double> x, double eps) {
  if (!empirical.membership(x).feasible) return Membership::no;
  const double v = empirical.value(0, x);
  if (v <= solution.lower + eps + kSetTolerance) return Membership::yes;
  if (v > solution.value + eps + kSetTolerance) return Membership::no;
  return Membership::indeterminate;
}

TrueSolution solve_true(const StochasticProgram& program, const TrueQuery& query) {
  const TrueOracle& oracle = program.oracle();
  if (query.kind == TrueQueryKind::optimal_value && query.prefer_closed_form && oracle.solution().optimal_value) {
    TrueSolution out;
    out.value = *oracle.solution().optimal_value;
    if (oracle.solution().minimizer) out.argmin = *oracle.solution().minimizer;
    out.source = "closed-form";
    return out;
  }
  const SpaceDescriptor& y = program.hard_set();
  require(y.dimension() <= 3 || y.kind() == SpaceKind::cloud, ErrorKind::invalid_argument,
          "grid ground truth needs dimension <= 3");
  require(query.gamma >= 0.0 && query.eps >= 0.0, ErrorKind::invalid_argument, "gamma and eps must be >= 0");
  const auto grid = y.grid(query.h, query.budget);
  const ConstraintView view = true_constraints(program);
  double level = 0.0;
  if (query.kind == TrueQueryKind::relaxed_min) level = query.gamma;
  if (query.kind == TrueQueryKind::interior_min) level = -query.gamma;

  std::vector<std::size_t> members;
  std::vector<double> values;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (view.count > 0 && max_constraint(view, grid[k]) > level + kSetTolerance) continue;
    members.push_back(k);
    values.push_back(program.true_value(0, grid[k]));
  }
  require(!members.empty(), ErrorKind::infeasible, "the queried set has no grid points");
  std::size_t best = 0;
  for (std::size_t j = 1; j < members.size(); ++j) {
    if (values[j] < values[best]) best = j;
  }
  TrueSolution out;
  out.value = values[best];
  out.argmin = grid[members[best]];
  out.grid_points = grid.size();
  out.source = "grid";
  if (query.kind == TrueQueryKind::near_optimal_set) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (values[j] <= out.value + query.eps + kSetTolerance) out.set.push_back(grid[members[j]]);
    }
  }
  return out;
}

}  // namespace saa

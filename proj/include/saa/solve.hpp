#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saa/geometry.hpp"
#include "saa/problem.hpp"

namespace saa {

enum class Method { grid, switching_subgradient };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct SolverConfig {
  Method method = Method::grid;
  std::size_t iterations = 20000;
  double step_scale = 1.0;  // s_k = step_scale * R / sqrt(k + 1)
  double tol_opt = 1e-3;
  double tol_feas = 1e-6;
  double h = 0.01;  // grid resolution
  std::size_t grid_budget = kDefaultGridBudget;
  std::uint64_t seed = 0;  // recorded only; both methods are deterministic
  std::optional<Point> start;
  int threads = 1;
};

// F_hat* lies in [lower, value] up to tol_feas in the constraints: lower is
// certified, value is attained at x.
struct Solution {
  Point x;
  double value = 0.0;
  double lower = 0.0;
  double certified_gap = 0.0;
  std::vector<double> residuals;  // F_hat_i(x) - eps_hat_i
  std::size_t iterations = 0;
  Method method = Method::grid;
  bool budget_exhausted = false;  // subgradient gap still above tol_opt
  std::size_t grid_points = 0;
  std::uint64_t seed = 0;
};

Solution solve_saa(const EmpiricalProblem& empirical, const SolverConfig& config = {});

enum class Membership { yes, no, indeterminate };

std::string to_string(Membership m);

// x in X_hat*_eps given the bracket of `solution`.
Membership near_optimal_check(const EmpiricalProblem& empirical, const Solution& solution,
                              std::span<const double> x, double eps);

enum class TrueQueryKind { optimal_value, near_optimal_set, relaxed_min, interior_min };

struct TrueQuery {
  TrueQueryKind kind = TrueQueryKind::optimal_value;
  double eps = 0.0;    // near_optimal_set: X*_eps
  double gamma = 0.0;  // relaxed_min over X_gamma, interior_min over X_{-gamma}
  double h = 0.01;
  std::size_t budget = kDefaultGridBudget;
  bool prefer_closed_form = true;  // use the oracle's declared f*, x* when present
};

struct TrueSolution {
  double value = 0.0;
  Point argmin;
  std::vector<Point> set;  // near_optimal_set only
  std::size_t grid_points = 0;
  std::string source;      // "closed-form" or "grid"
};

TrueSolution solve_true(const StochasticProgram& program, const TrueQuery& query);

}  // namespace saa

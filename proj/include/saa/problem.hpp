#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saa/distributions.hpp"
#include "saa/geometry.hpp"

namespace saa {

// One integrand F(x, xi). Optional structure: a subgradient in x, an affine
// decomposition in xi (which lets sample means collapse to the mean
// scenario), and flags for scenario independence and convexity in x.
class ScenarioFunction {
 public:
  using Value = std::function<double(std::span<const double> x, std::span<const double> xi)>;
  using Subgradient =
      std::function<void(std::span<const double> x, std::span<const double> xi, std::span<double> g)>;
  // F(x, xi) = offset(x) + <coefficients(x), xi>
  struct Affine {
    std::function<double(std::span<const double>)> offset;
    std::function<void(std::span<const double>, std::span<double>)> coefficients;
  };

  ScenarioFunction() = default;
  ScenarioFunction(std::string name, Value value);

  ScenarioFunction with_subgradient(Subgradient g) const;
  ScenarioFunction with_affine(Affine affine) const;
  ScenarioFunction scenario_free() const;
  ScenarioFunction convex() const;

  double operator()(std::span<const double> x, std::span<const double> xi) const {
    return value_(x, xi);
  }
  void subgradient(std::span<const double> x, std::span<const double> xi, std::span<double> g) const;

  const std::string& name() const { return name_; }
  bool has_subgradient() const { return static_cast<bool>(subgradient_); }
  const std::optional<Affine>& affine() const { return affine_; }
  bool is_scenario_free() const { return scenario_free_; }
  bool is_convex() const { return convex_; }
  bool valid() const { return static_cast<bool>(value_); }

 private:
  std::string name_;
  Value value_;
  Subgradient subgradient_;
  std::optional<Affine> affine_;
  bool scenario_free_ = false;
  bool convex_ = false;
};

struct HolderSpec {
  double alpha = 1.0;
  std::optional<double> modulus;  // population root-mean-square modulus L_i
};

enum class Provenance { oracle, monte_carlo, declared, grid_estimated };

std::string to_string(Provenance p);

struct SolutionData {
  std::optional<double> optimal_value;
  std::optional<Point> minimizer;
  std::optional<Point> slater_point;
  std::optional<double> slater_margin;
  std::optional<double> regularity_constant;
};

class StochasticProgram;

// Population quantities f_i, sigma_i^2 and L_i. Closed form, or a Monte
// Carlo reference sample drawn with its own budget and seed.
class TrueOracle {
 public:
  using IndexedFn = std::function<double(std::size_t, std::span<const double>)>;

  TrueOracle(IndexedFn mean, IndexedFn variance, std::vector<std::optional<double>> holder = {},
             SolutionData solution = {});

  static TrueOracle monte_carlo(const StochasticProgram& program, const Sampler& sampler,
                                std::size_t budget, std::uint64_t seed);

  double mean(std::size_t i, std::span<const double> x) const { return mean_(i, x); }
  double variance(std::size_t i, std::span<const double> x) const { return variance_(i, x); }
  std::optional<double> holder(std::size_t i) const;
  const SolutionData& solution() const { return solution_; }
  Provenance provenance() const { return provenance_; }
  std::size_t budget() const { return budget_; }

  TrueOracle with_holder(std::vector<std::optional<double>> holder) const;
  TrueOracle with_solution(SolutionData solution) const;

 private:
  IndexedFn mean_;
  IndexedFn variance_;
  std::vector<std::optional<double>> holder_;
  SolutionData solution_;
  Provenance provenance_ = Provenance::oracle;
  std::size_t budget_ = 0;
};

struct ProgramOptions {
  std::string name = "program";
  std::size_t scenario_dim = 0;
  std::vector<HolderSpec> holder;  // m + 1 entries, or empty for alpha = 1 everywhere
  bool convex = false;             // convexity attestation for every F_i(., xi)
  std::shared_ptr<const TrueOracle> oracle;
};

// min F_0 over the hard set subject to F_i <= 0, i = 1..m. Index 0 is the
// objective throughout the library.
class StochasticProgram {
 public:
  StochasticProgram(SpaceDescriptor hard_set, ScenarioFunction objective,
                    std::vector<ScenarioFunction> constraints = {}, ProgramOptions options = {});

  const SpaceDescriptor& hard_set() const { return hard_set_; }
  const ScenarioFunction& function(std::size_t i) const;
  std::size_t constraint_count() const { return constraints_.size(); }
  const HolderSpec& holder(std::size_t i) const;
  std::size_t scenario_dim() const { return options_.scenario_dim; }
  bool convex() const { return options_.convex; }
  const std::string& name() const { return options_.name; }

  bool has_oracle() const { return static_cast<bool>(options_.oracle); }
  const TrueOracle& oracle() const;
  std::shared_ptr<const TrueOracle> oracle_ptr() const { return options_.oracle; }
  StochasticProgram with_oracle(std::shared_ptr<const TrueOracle> oracle) const;

  // f_i(x) from the oracle.
  double true_value(std::size_t i, std::span<const double> x) const;

 private:
  SpaceDescriptor hard_set_;
  ScenarioFunction objective_;
  std::vector<ScenarioFunction> constraints_;
  ProgramOptions options_;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::uint64_t seed = 0;

  std::size_t size() const { return scenarios.size(); }
  bool empty() const { return scenarios.empty(); }
  std::size_t dimension() const { return scenarios.empty() ? 0 : scenarios.front().size(); }
};

ScenarioSet draw_scenarios(const Sampler& sampler, std::size_t n, std::uint64_t seed);

// Scenario CSV: header xi_1,...,xi_k then one row per scenario.
ScenarioSet read_scenarios_csv(std::istream& in);
ScenarioSet read_scenarios_csv_file(const std::string& path);
void write_scenarios_csv(std::ostream& out, const ScenarioSet& set);

struct FeasibilityRecord {
  bool in_hard_set = false;
  std::vector<double> residuals;  // F_hat_i(x) - eps_hat_i, i = 1..m
  bool feasible = false;
};

// The sample-average problem: F_hat_i = mean over scenarios of F_i, with
// constraint levels eps_hat_i.
class EmpiricalProblem {
 public:
  EmpiricalProblem(std::shared_ptr<const StochasticProgram> program, ScenarioSet scenarios,
                   std::vector<double> relaxations);

  const StochasticProgram& program() const { return *program_; }
  std::shared_ptr<const StochasticProgram> program_ptr() const { return program_; }
  const ScenarioSet& scenarios() const { return scenarios_; }
  const std::vector<double>& relaxations() const { return relaxations_; }
  std::size_t sample_size() const { return scenarios_.size(); }

  double value(std::size_t i, std::span<const double> x) const;
  void subgradient(std::size_t i, std::span<const double> x, std::span<double> g) const;

  FeasibilityRecord membership(std::span<const double> x) const;

 private:
  std::shared_ptr<const StochasticProgram> program_;
  ScenarioSet scenarios_;
  std::vector<double> relaxations_;
  Scenario mean_scenario_;
};

EmpiricalProblem build_empirical(std::shared_ptr<const StochasticProgram> program,
                                 ScenarioSet scenarios, std::vector<double> relaxations);

// Constraint values g_i(x), i = 1..count, from either the oracle or the
// sample averages.
struct ConstraintView {
  std::size_t count = 0;
  std::function<double(std::size_t, std::span<const double>)> value;
};

ConstraintView true_constraints(const StochasticProgram& program);
ConstraintView empirical_constraints(const EmpiricalProblem& empirical);
ConstraintView shifted(ConstraintView view, double offset);

enum class SetKind { relaxed, active, interior, exterior };

std::string to_string(SetKind kind);

struct RelaxedSetQuery {
  SetKind kind = SetKind::relaxed;
  double level = 0.0;            // gamma
  std::size_t index = 0;         // active sets: constraint index in 1..m
  double regularity = 1.0;       // exterior sets: radius is regularity * level
  std::optional<double> tol_active;  // defaults to h
};

struct GridSet {
  std::vector<Point> points;
  double h = 0.0;
  double tol_active = 0.0;
  double tol_compare = kSetTolerance;
  std::string description;
};

// Grid points satisfying the query. relaxed: max_i g_i <= level; interior:
// max_i g_i <= -level; active: max_i g_i <= level + tol_active and
// |g_index - level| <= tol_active; exterior: points of `grid` within
// regularity * level of the feasible grid points.
GridSet relaxed_set(const ConstraintView& view, std::span<const Point> grid, Norm norm,
                    const RelaxedSetQuery& query, double h);
GridSet relaxed_set_grid(const ConstraintView& view, const SpaceDescriptor& hard_set,
                         const RelaxedSetQuery& query, double h,
                         std::size_t budget = kDefaultGridBudget);

// max_i g_i(x); -infinity without constraints.
double max_constraint(const ConstraintView& view, std::span<const double> x);

}  // namespace saa

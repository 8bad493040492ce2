#include "saa/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "saa/error.hpp"

namespace saa {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::oracle: return "oracle";
    case Provenance::monte_carlo: return "monte-carlo";
    case Provenance::declared: return "declared";
    case Provenance::grid_estimated: return "grid-estimated";
  }
  return "oracle";
}

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::relaxed: return "relaxed";
    case SetKind::active: return "active";
    case SetKind::interior: return "interior";
    case SetKind::exterior: return "exterior";
  }
  return "relaxed";
}

// --- ScenarioFunction -------------------------------------------------------

ScenarioFunction::ScenarioFunction(std::string name, Value value)
    : name_(std::move(name)), value_(std::move(value)) {
  require(static_cast<bool>(value_), ErrorKind::invalid_argument,
          "scenario function '" + name_ + "' has no evaluator");
}

ScenarioFunction ScenarioFunction::with_subgradient(Subgradient g) const {
  ScenarioFunction out = *this;
  out.subgradient_ = std::move(g);
  return out;
}

ScenarioFunction ScenarioFunction::with_affine(Affine affine) const {
  require(affine.offset && affine.coefficients, ErrorKind::invalid_argument,
          "affine decomposition needs both offset and coefficients");
  ScenarioFunction out = *this;
  out.affine_ = std::move(affine);
  return out;
}

ScenarioFunction ScenarioFunction::scenario_free() const {
  ScenarioFunction out = *this;
  out.scenario_free_ = true;
  return out;
}

ScenarioFunction ScenarioFunction::convex() const {
  ScenarioFunction out = *this;
  out.convex_ = true;
  return out;
}

void ScenarioFunction::subgradient(std::span<const double> x, std::span<const double> xi,
                                   std::span<double> g) const {
  require(has_subgradient(), ErrorKind::invalid_argument,
          "scenario function '" + name_ + "' has no subgradient");
  subgradient_(x, xi, g);
}

// --- TrueOracle -------------------------------------------------------------

TrueOracle::TrueOracle(IndexedFn mean, IndexedFn variance, std::vector<std::optional<double>> holder,
                       SolutionData solution)
    : mean_(std::move(mean)),
      variance_(std::move(variance)),
      holder_(std::move(holder)),
      solution_(std::move(solution)) {
  require(static_cast<bool>(mean_) && static_cast<bool>(variance_), ErrorKind::invalid_argument,
          "oracle needs mean and variance evaluators");
  if (solution_.slater_margin) {
    require(*solution_.slater_margin > 0.0, ErrorKind::invalid_argument,
            "Slater margin must be positive when provided");
  }
}

std::optional<double> TrueOracle::holder(std::size_t i) const {
  if (i < holder_.size()) return holder_[i];
  return std::nullopt;
}

TrueOracle TrueOracle::with_holder(std::vector<std::optional<double>> holder) const {
  TrueOracle out = *this;
  out.holder_ = std::move(holder);
  return out;
}

TrueOracle TrueOracle::with_solution(SolutionData solution) const {
  TrueOracle out = *this;
  out.solution_ = std::move(solution);
  return out;
}

namespace {

struct ReferenceSample {
  std::vector<Scenario> scenarios;
  Scenario mean;
  std::vector<double> covariance;  // row-major k x k
};

double mean_of(const ScenarioFunction& f, std::span<const double> x,
               const std::vector<Scenario>& scenarios, std::span<const double> mean_xi) {
  if (f.is_scenario_free()) return f(x, scenarios.front());
  if (const auto& aff = f.affine()) {
    std::vector<double> c(mean_xi.size());
    aff->coefficients(x, c);
    double v = aff->offset(x);
    for (std::size_t k = 0; k < c.size(); ++k) v += c[k] * mean_xi[k];
    return v;
  }
  double acc = 0.0;
  for (const auto& xi : scenarios) acc += f(x, xi);
  return acc / static_cast<double>(scenarios.size());
}

}  // namespace

TrueOracle TrueOracle::monte_carlo(const StochasticProgram& program, const Sampler& sampler,
                                   std::size_t budget, std::uint64_t seed) {
  require(budget > 0, ErrorKind::invalid_argument, "Monte Carlo oracle needs a positive budget");
  auto ref = std::make_shared<ReferenceSample>();
  Rng rng = derived_rng(seed, 0);
  ref->scenarios.reserve(budget);
  for (std::size_t j = 0; j < budget; ++j) ref->scenarios.push_back(sampler(rng));
  const std::size_t k = ref->scenarios.front().size();
  ref->mean.assign(k, 0.0);
  for (const auto& xi : ref->scenarios) {
    for (std::size_t a = 0; a < k; ++a) ref->mean[a] += xi[a];
  }
  for (auto& v : ref->mean) v /= static_cast<double>(budget);
  ref->covariance.assign(k * k, 0.0);
  for (const auto& xi : ref->scenarios) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        ref->covariance[a * k + b] += (xi[a] - ref->mean[a]) * (xi[b] - ref->mean[b]);
      }
    }
  }
  for (auto& v : ref->covariance) v /= static_cast<double>(budget);

  std::vector<ScenarioFunction> fns;
  for (std::size_t i = 0; i <= program.constraint_count(); ++i) fns.push_back(program.function(i));
  auto shared_fns = std::make_shared<std::vector<ScenarioFunction>>(std::move(fns));

  IndexedFn mean = [ref, shared_fns](std::size_t i, std::span<const double> x) {
    return mean_of(shared_fns->at(i), x, ref->scenarios, ref->mean);
  };
  IndexedFn variance = [ref, shared_fns](std::size_t i, std::span<const double> x) {
    const ScenarioFunction& f = shared_fns->at(i);
    if (f.is_scenario_free()) return 0.0;
    if (const auto& aff = f.affine()) {
      const std::size_t k = ref->mean.size();
      std::vector<double> c(k);
      aff->coefficients(x, c);
      double v = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) v += c[a] * ref->covariance[a * k + b] * c[b];
      }
      return std::max(v, 0.0);
    }
    const double m = mean_of(f, x, ref->scenarios, ref->mean);
    double acc = 0.0;
    for (const auto& xi : ref->scenarios) {
      const double d = f(x, xi) - m;
      acc += d * d;
    }
    return acc / static_cast<double>(ref->scenarios.size());
  };
  TrueOracle out(std::move(mean), std::move(variance));
  out.provenance_ = Provenance::monte_carlo;
  out.budget_ = budget;
  return out;
}

// --- StochasticProgram ------------------------------------------------------

StochasticProgram::StochasticProgram(SpaceDescriptor hard_set, ScenarioFunction objective,
                                     std::vector<ScenarioFunction> constraints,
                                     ProgramOptions options)
    : hard_set_(std::move(hard_set)),
      objective_(std::move(objective)),
      constraints_(std::move(constraints)),
      options_(std::move(options)) {
  require(objective_.valid(), ErrorKind::invalid_argument, "program needs an objective");
  for (const auto& c : constraints_) {
    require(c.valid(), ErrorKind::invalid_argument, "program constraint has no evaluator");
  }
  if (options_.holder.empty()) options_.holder.assign(constraints_.size() + 1, HolderSpec{});
  require(options_.holder.size() == constraints_.size() + 1, ErrorKind::invalid_argument,
          "Hoelder metadata needs one entry per function (objective plus constraints)");
  for (const auto& h : options_.holder) {
    require(h.alpha > 0.0 && h.alpha <= 1.0, ErrorKind::invalid_argument,
            "Hoelder exponents must lie in (0, 1]");
    if (h.modulus) {
      require(*h.modulus >= 0.0, ErrorKind::invalid_argument, "Hoelder modulus must be >= 0");
    }
  }
}

const ScenarioFunction& StochasticProgram::function(std::size_t i) const {
  require(i <= constraints_.size(), ErrorKind::invalid_argument,
          "function index " + std::to_string(i) + " out of range");
  return i == 0 ? objective_ : constraints_[i - 1];
}

const HolderSpec& StochasticProgram::holder(std::size_t i) const {
  require(i < options_.holder.size(), ErrorKind::invalid_argument, "Hoelder index out of range");
  return options_.holder[i];
}

const TrueOracle& StochasticProgram::oracle() const {
  require(has_oracle(), ErrorKind::missing_oracle,
          "program '" + options_.name + "' has no population oracle");
  return *options_.oracle;
}

StochasticProgram StochasticProgram::with_oracle(std::shared_ptr<const TrueOracle> oracle) const {
  StochasticProgram out = *this;
  out.options_.oracle = std::move(oracle);
  return out;
}

double StochasticProgram::true_value(std::size_t i, std::span<const double> x) const {
  return oracle().mean(i, x);
}

// --- Scenarios --------------------------------------------------------------

ScenarioSet draw_scenarios(const Sampler& sampler, std::size_t n, std::uint64_t seed) {
  ScenarioSet set;
  set.seed = seed;
  Rng rng = derived_rng(seed, 0);
  set.scenarios.reserve(n);
  for (std::size_t j = 0; j < n; ++j) set.scenarios.push_back(sampler(rng));
  return set;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ScenarioSet read_scenarios_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io, "scenario CSV is empty");
  const auto header = split_csv_line(line);
  require(!header.empty(), ErrorKind::io, "scenario CSV header is empty");
  for (std::size_t k = 0; k < header.size(); ++k) {
    require(header[k] == "xi_" + std::to_string(k + 1), ErrorKind::io,
            "scenario CSV header column " + std::to_string(k + 1) + " must be 'xi_" +
                std::to_string(k + 1) + "', found '" + header[k] + "'");
  }
  ScenarioSet set;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    require(cells.size() == header.size(), ErrorKind::io,
            "scenario CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                " columns, expected " + std::to_string(header.size()));
    Scenario xi;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == c.size() && !c.empty() && std::isfinite(v), ErrorKind::io,
              "scenario CSV row " + std::to_string(row) + ": '" + c + "' is not a finite decimal");
      xi.push_back(v);
    }
    set.scenarios.push_back(std::move(xi));
  }
  return set;
}

ScenarioSet read_scenarios_csv_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open scenario file '" + path + "'");
  return read_scenarios_csv(in);
}

void write_scenarios_csv(std::ostream& out, const ScenarioSet& set) {
  const std::size_t k = set.dimension();
  for (std::size_t a = 0; a < k; ++a) out << (a ? "," : "") << "xi_" << (a + 1);
  out << "\n";
  out.precision(17);
  for (const auto& xi : set.scenarios) {
    for (std::size_t a = 0; a < xi.size(); ++a) out << (a ? "," : "") << xi[a];
    out << "\n";
  }
}

// --- EmpiricalProblem -------------------------------------------------------

EmpiricalProblem::EmpiricalProblem(std::shared_ptr<const StochasticProgram> program,
                                   ScenarioSet scenarios, std::vector<double> relaxations)
    : program_(std::move(program)),
      scenarios_(std::move(scenarios)),
      relaxations_(std::move(relaxations)) {
  require(static_cast<bool>(program_), ErrorKind::invalid_argument, "empirical problem needs a program");
  require(!scenarios_.empty(), ErrorKind::empty_sample, "scenario set is empty");
  const std::size_t k = scenarios_.dimension();
  for (const auto& xi : scenarios_.scenarios) {
    require(xi.size() == k, ErrorKind::dimension_mismatch, "scenarios differ in dimension");
  }
  if (program_->scenario_dim() != 0) {
    require(k == program_->scenario_dim(), ErrorKind::dimension_mismatch,
            "scenario dimension " + std::to_string(k) + " does not match program's " +
                std::to_string(program_->scenario_dim()));
  }
  if (relaxations_.empty()) relaxations_.assign(program_->constraint_count(), 0.0);
  require(relaxations_.size() == program_->constraint_count(), ErrorKind::invalid_argument,
          "need one relaxation level per constraint");
  mean_scenario_.assign(k, 0.0);
  for (const auto& xi : scenarios_.scenarios) {
    for (std::size_t a = 0; a < k; ++a) mean_scenario_[a] += xi[a];
  }
  for (auto& v : mean_scenario_) v /= static_cast<double>(scenarios_.size());
}

double EmpiricalProblem::value(std::size_t i, std::span<const double> x) const {
  require(x.size() == program_->hard_set().dimension(), ErrorKind::dimension_mismatch,
          "point dimension does not match the hard set");
  const double v = mean_of(program_->function(i), x, scenarios_.scenarios, mean_scenario_);
  require(std::isfinite(v), ErrorKind::invalid_argument,
          "sample average of '" + program_->function(i).name() + "' is not finite");
  return v;
}

void EmpiricalProblem::subgradient(std::size_t i, std::span<const double> x,
                                   std::span<double> g) const {
  const ScenarioFunction& f = program_->function(i);
  std::fill(g.begin(), g.end(), 0.0);
  std::vector<double> part(g.size());
  if (f.is_scenario_free()) {
    f.subgradient(x, scenarios_.scenarios.front(), g);
    return;
  }
  for (const auto& xi : scenarios_.scenarios) {
    f.subgradient(x, xi, part);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += part[k];
  }
  for (auto& v : g) v /= static_cast<double>(scenarios_.size());
}

FeasibilityRecord EmpiricalProblem::membership(std::span<const double> x) const {
  require(x.size() == program_->hard_set().dimension(), ErrorKind::dimension_mismatch,
          "point has dimension " + std::to_string(x.size()) + ", hard set has " +
              std::to_string(program_->hard_set().dimension()));
  FeasibilityRecord rec;
  rec.in_hard_set = program_->hard_set().contains(x);
  bool all_ok = true;
  for (std::size_t i = 1; i <= program_->constraint_count(); ++i) {
    const double r = value(i, x) - relaxations_[i - 1];
    rec.residuals.push_back(r);
    if (r > kSetTolerance) all_ok = false;
  }
  rec.feasible = rec.in_hard_set && all_ok;
  return rec;
}

EmpiricalProblem build_empirical(std::shared_ptr<const StochasticProgram> program,
                                 ScenarioSet scenarios, std::vector<double> relaxations) {
  return EmpiricalProblem(std::move(program), std::move(scenarios), std::move(relaxations));
}

// --- Relaxed sets ------------------------------------------------------------

ConstraintView true_constraints(const StochasticProgram& program) {
  const TrueOracle& oracle = program.oracle();
  return {program.constraint_count(),
          [&oracle](std::size_t i, std::span<const double> x) { return oracle.mean(i, x); }};
}

ConstraintView empirical_constraints(const EmpiricalProblem& empirical) {
  return {empirical.program().constraint_count(),
          [&empirical](std::size_t i, std::span<const double> x) { return empirical.value(i, x); }};
}

ConstraintView shifted(ConstraintView view, double offset) {
  auto inner = view.value;
  view.value = [inner, offset](std::size_t i, std::span<const double> x) { return inner(i, x) + offset; };
  return view;
}

double max_constraint(const ConstraintView& view, std::span<const double> x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= view.count; ++i) worst = std::max(worst, view.value(i, x));
  return worst;
}

GridSet relaxed_set(const ConstraintView& view, std::span<const Point> grid, Norm norm,
                    const RelaxedSetQuery& query, double h) {
  GridSet out;
  out.h = h;
  out.tol_active = query.tol_active.value_or(h);
  out.description = to_string(query.kind) + " level " + std::to_string(query.level);
  const double tol = out.tol_compare;
  switch (query.kind) {
    case SetKind::relaxed:
    case SetKind::interior: {
      const double level = query.kind == SetKind::relaxed ? query.level : -query.level;
      for (const auto& x : grid) {
        if (max_constraint(view, x) <= level + tol) out.points.push_back(x);
      }
      break;
    }
    case SetKind::active: {
      require(query.index >= 1 && query.index <= view.count, ErrorKind::invalid_argument,
              "active set needs a constraint index in 1..m");
      for (const auto& x : grid) {
        if (max_constraint(view, x) > query.level + out.tol_active + tol) continue;
        if (std::abs(view.value(query.index, x) - query.level) <= out.tol_active + tol) {
          out.points.push_back(x);
        }
      }
      break;
    }
    case SetKind::exterior: {
      require(query.level >= 0.0 && query.regularity > 0.0, ErrorKind::invalid_argument,
              "exterior set needs level >= 0 and a positive regularity constant");
      std::vector<Point> feasible;
      for (const auto& x : grid) {
        if (max_constraint(view, x) <= tol) feasible.push_back(x);
      }
      if (feasible.empty()) break;
      const double radius = query.regularity * query.level;
      for (const auto& x : grid) {
        if (distance_to_set(x, feasible, norm) <= radius + tol) out.points.push_back(x);
      }
      break;
    }
  }
  return out;
}

GridSet relaxed_set_grid(const ConstraintView& view, const SpaceDescriptor& hard_set,
                         const RelaxedSetQuery& query, double h, std::size_t budget) {
  const auto grid = hard_set.grid(h, budget);
  return relaxed_set(view, grid, hard_set.norm(), query, h);
}

}  // namespace saa

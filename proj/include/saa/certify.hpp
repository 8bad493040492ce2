#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saa/geometry.hpp"
#include "saa/moments.hpp"
#include "saa/problem.hpp"

namespace saa {

enum class Theorem { fixed, exterior, interior };

std::string to_string(Theorem t);
Theorem theorem_from_string(const std::string& name);

struct Certificate {
  Theorem theorem = Theorem::fixed;
  std::string item = "all";
  double eps = 0.0;
  double p = 0.0;
  std::size_t m = 0;
  double constant = 1.0;
  double sigma = 0.0;
  std::optional<double> slater_margin;
  std::size_t n_required = 1;
  std::vector<std::string> events;
  // eps_hat_i for every constraint: +eps (exterior), -eps (interior), none (fixed).
  std::optional<double> relaxation;
};

// fixed:              N = ceil(C sigma^2 ln(1/p) / eps^2)
// exterior, interior: N = ceil(C sigma^2 (ln m + ln(1/p)) / eps^2)
// N >= 1 always. `item` selects which guaranteed events are listed.
Certificate sample_size(Theorem theorem, double sigma, double eps, double p, std::size_t m,
                        double constant = 1.0, std::optional<double> slater_margin = std::nullopt,
                        const std::string& item = "all");

// Guaranteed events of each theorem item ("i", "ii", "iii", or "all").
std::vector<std::string> guaranteed_events(Theorem theorem, const std::string& item);

struct SigmaAggregate {
  double value = 0.0;
  std::vector<std::string> keys;
};

// The theorem's sigma-hat as the maximum of the listed profile entries.
// Profile keys: sigma0(X), sigma0(Xbreve), sigmaI(Y), sigmaI(2eps),
// sigmaI(0), breve0(z), breve0(x*), breve0(y*), breveI(z), breveI(y),
// breveI(x*), breveI(y*). `convex` selects the localized exterior variant.
std::vector<std::string> sigma_keys(Theorem theorem, const std::string& item, bool convex = false);
SigmaAggregate aggregate_sigma(Theorem theorem, const std::string& item, bool convex,
                               const VarianceProfile& profile);

enum class RegularityProvenance { robinson, declared, grid_estimated };

std::string to_string(RegularityProvenance p);

struct RegularityInfo {
  double c = 0.0;
  std::optional<Point> slater_point;
  std::optional<double> slater_margin;
  RegularityProvenance provenance = RegularityProvenance::declared;
  bool vacuous = false;         // grid estimate with no violated points
  std::optional<Point> witness;  // grid point attaining the estimate
  std::size_t feasible_points = 0;
  std::size_t violated_points = 0;
};

// c = D / eps_ring.
RegularityInfo robinson_constant(double diameter, double slater_margin);

// max over violated grid points of (dist(x, X-grid) - cover)_+ / max_i [g_i(x)]_+,
// where `cover` bounds the distance from any point of X to the X-grid. With
// a valid cover the estimate never exceeds the true constant; cover = 0 is
// the raw grid ratio, which blows up just outside the boundary.
RegularityInfo estimate_regularity(const ConstraintView& view, std::span<const Point> grid, Norm norm,
                                   double cover = 0.0);
// Uses cover = diameter of one grid cell of side h.
RegularityInfo estimate_regularity(const StochasticProgram& program, double h,
                                   std::size_t budget = kDefaultGridBudget);

struct GapReport {
  double gamma = 0.0;
  double c = 0.0;           // exterior regularity constant
  double c_interior = 0.0;  // radius factor for gap
  double alpha0 = 1.0;
  double f_star = 0.0;
  double min_relaxed = 0.0;   // min over X_gamma
  std::optional<double> min_interior;  // min over X_{-gamma}
  double Gap = 0.0;
  std::optional<double> gap;
  double L_plus = 0.0;   // L_{gamma, c}
  std::optional<double> L_minus;  // L_{-gamma, c_interior}
  double Gap_bound = 0.0;
  std::optional<double> gap_bound;
  bool Gap_zero = false;  // (X_gamma)* meets X on the grid
  bool gap_zero = false;  // X* meets X_{-gamma} on the grid
  std::size_t grid_points = 0;
};

struct GapOptions {
  std::optional<double> c_interior;  // default: 2 D(X) / eps_ring when SCQ data given
  std::optional<double> slater_margin;
  double argmin_tolerance = 0.0;  // solution sets are {f <= min + tol}
};

// Brute-force Gap/gap on `grid` with objective f = value(0, .) and
// constraints from `view`.
GapReport gap_bounds(const std::function<double(std::span<const double>)>& f, const ConstraintView& view,
                     std::span<const Point> grid, Norm norm, double gamma, double c, double alpha0,
                     const GapOptions& options = {});

// Pair of function families indexed 0..m: f (population) and F_hat.
struct Perturbation {
  std::size_t m = 0;
  std::function<double(std::size_t, std::span<const double>)> f;
  std::function<double(std::size_t, std::span<const double>)> f_hat;
};

Perturbation perturbation(const EmpiricalProblem& empirical);

// Canonical text of a level, round-trip exact.
std::string level_key(double gamma);

struct LedgerRequest {
  std::vector<Point> y_grid;
  std::vector<double> levels;  // gamma values for Delta_i(gamma) and Delta_0(a|gamma)
  std::map<std::string, Point> anchors;
  std::vector<std::string> optimality_anchors;  // anchors a for Delta_0(a|gamma), every level
  std::vector<std::pair<std::string, std::string>> pairs;  // Delta_i(x, z)
  double h = 0.0;                     // grid resolution; tol_active defaults to it
  std::optional<double> tol_active;
  // Explicit set representations replacing the grid-derived ones.
  std::map<std::string, std::vector<std::vector<Point>>> active_sets;  // level key -> per i = 1..m
  std::map<std::string, std::vector<Point>> relaxed_sets;              // level key -> X_gamma
  std::function<bool(std::span<const double>)> in_hard_set;
};

// Named deviation entries. Vectors are indexed by function index:
//   Delta(Y)          i = 1..m stored at [i - 1]
//   Delta(gamma=g)    i = 1..m stored at [i - 1]
//   delta(a), Delta(a), f(a), Fhat(a), Delta(a,b)   i = 0..m
//   Delta0(a|gamma=g) single entry
struct DeviationLedger {
  std::size_t m = 0;
  std::map<std::string, std::vector<double>> entries;
  std::map<std::string, std::size_t> probe_size;

  const std::vector<double>& at(const std::string& key) const;
  bool has(const std::string& key) const { return entries.count(key) > 0; }
};

DeviationLedger deviation_ledger(const Perturbation& data, const LedgerRequest& request);
DeviationLedger deviation_ledger(const EmpiricalProblem& empirical, LedgerRequest request);

enum class Scheme {
  F,
  C1C2,
  C1plusC2,
  C1minusC2minus,
  P,
  Pminus,
  M,
  M0,
  Mminus,
  ExteriorFull,        // F + P + M
  ExteriorConvexFull,  // C1+ + C2 + P + M
  InteriorFull,        // C1_ + C2_ + P_ + M_
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);
bool requires_convexity(Scheme s);

struct SchemeParams {
  double gamma = 0.0;
  double eps = 0.0;  // the C1 tolerance with f_i(y) < eps < gamma
  double t = 0.0;
  double t1 = 0.0;
  std::vector<double> relaxations;  // eps_hat_i, i = 1..m
  std::optional<double> slater_margin;
  bool convex_attested = false;
  std::string y = "y";
  std::string x_star = "x*";
  std::string y_star = "y*";
};

struct ConditionResult {
  std::string name;
  bool holds = false;
  std::string detail;
};

struct CertificateCheck {
  Scheme scheme = Scheme::F;
  std::vector<ConditionResult> conditions;
  bool all_hold = false;
  std::vector<std::string> conclusions;
};

CertificateCheck check_certificates(const DeviationLedger& ledger, Scheme scheme, const SchemeParams& params);

}  // namespace saa

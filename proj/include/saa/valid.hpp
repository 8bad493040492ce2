#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "saa/certify.hpp"
#include "saa/distributions.hpp"
#include "saa/problem.hpp"

namespace saa {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval; z = 1.96 gives 95%.
WilsonInterval wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct TailRow {
  double t = 0.0;
  double threshold = 0.0;  // C sqrt(1 + t)
  std::size_t exceed = 0;
  double frequency = 0.0;
  double bound = 0.0;  // e^{-t}
  bool pass = false;   // frequency <= e^{-t}
};

struct TailReport {
  std::size_t n = 0;
  std::size_t replications = 0;
  double constant = 0.0;
  std::uint64_t seed = 0;
  std::vector<TailRow> rows;
};

struct TailPlan {
  Distribution law;
  std::function<double(double)> g;  // identity when empty
  std::optional<double> pg;         // P g; defaults to the law's mean for identity g
  std::optional<double> p_variance; // P [g - Pg]^2
  std::size_t n = 100;
  std::vector<double> t_grid{0.5, 1.0, 2.0, 3.0};
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  double constant = 3.0;
  int threads = 1;
};

// Frequency of {self-normalized statistic >= C sqrt(1 + t)} against e^{-t}.
TailReport tail_experiment(const TailPlan& plan);

struct UniformTailPlan {
  std::shared_ptr<const StochasticProgram> program;  // needs an oracle
  Sampler sampler;
  std::size_t index = 0;       // which F_i
  std::vector<Point> grid;     // sup grid; the sup is a lower bound on the true sup
  std::vector<Point> probe;    // Hoelder probe for per-scenario moduli L(xi)
  Point anchor;
  double a_alpha = 0.0;
  double population_modulus = 0.0;  // (P L^2)^{1/2}
  std::size_t n = 200;
  std::vector<double> t_grid{0.5, 1.0, 2.0};
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  double constant = 3.0;
  int threads = 1;
};

struct UniformTailReport {
  TailReport table;  // threshold column holds C A_alpha sqrt(1 + t)
  bool sup_is_lower_bound = true;
  double mean_sup = 0.0;
};

// Frequency of sup_x |(P_hat - P)(F(x) - F(y))| > C A_alpha sqrt((1+t)(L_hat^2 + P L^2)/N);
// strict so that a replication with sup = bound = 0 is not an exceedance.
UniformTailReport uniform_tail_experiment(const UniformTailPlan& plan);

// A problem family for coverage runs. The default evaluator tests the
// event tag on `grid` against brute-force ground truth from the oracle.
struct CoverageFamily {
  std::string name;
  Theorem theorem = Theorem::fixed;
  std::string item = "i";
  std::string event;  // see coverage_event_tags()
  std::shared_ptr<const StochasticProgram> program;
  Sampler sampler;
  double sigma = 0.0;  // variance aggregate fed to sample_size
  std::function<double(double eps)> sigma_at;  // eps-dependent aggregate; overrides sigma
  bool convex_variant = false;  // localized aggregate of the convex exterior item
  std::string sigma_note;
  std::optional<double> slater_margin;
  std::vector<Point> grid;
  // Overrides the grid evaluator: event holds for this SAA instance at eps.
  std::function<bool(const EmpiricalProblem&, double eps)> evaluate;
};

// "near-optimal" X_hat*_eps ⊆ X*_{2eps}; "value-bracket" f* - 2eps <= F_hat* <= f* + eps;
// "exterior" X_hat ⊆ X_{2eps}; "interior" X_hat ⊆ X.
std::vector<std::string> coverage_event_tags();

struct ExperimentPlan {
  std::string family;
  std::size_t replications = 1000;
  std::size_t first_replication = 0;  // replication r uses derived_rng(seed, r)
  std::vector<double> eps{0.1};
  std::vector<double> p{0.1};
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_override;
  int threads = 1;
};

struct CoverageRow {
  double eps = 0.0;
  double p = 0.0;
  std::size_t n = 0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  double frequency = 0.0;
  WilsonInterval interval;
  double floor = 0.0;  // 1 - p
  bool pass = false;   // interval.lo >= floor - 0.02
};

struct CoverageReport {
  std::string family;
  std::string event;
  Theorem theorem = Theorem::fixed;
  double constant = 1.0;
  std::uint64_t seed = 0;
  std::size_t first_replication = 0;
  std::vector<CoverageRow> rows;
  bool all_pass = false;
};

inline constexpr double kPassSlack = 0.02;

CoverageReport coverage_experiment(const ExperimentPlan& plan, const CoverageFamily& family, double constant);

// Sum of two runs over disjoint replication ranges of the same plan.
CoverageReport merge(const CoverageReport& a, const CoverageReport& b);

struct RateRow {
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct RateReport {
  std::vector<RateRow> rows;
  std::optional<double> slope;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  bool degenerate = false;
  bool pass = false;  // slope in [-0.6, -0.4]
  std::uint64_t seed = 0;
  std::size_t replications = 0;
};

// Least squares of ln mean on ln N with a 95% t interval.
RateReport fit_rate(const std::vector<std::size_t>& n, const std::vector<double>& means,
                    const std::vector<double>& std_errors = {});

struct RatePlan {
  std::shared_ptr<const StochasticProgram> program;
  Sampler sampler;
  std::size_t index = 0;
  std::vector<Point> grid;
  std::vector<std::size_t> n_grid;
  std::size_t replications = 200;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Mean over replications of sup_grid |F_hat_i - f_i| per N.
RateReport rate_experiment(const RatePlan& plan);

struct CalibrationResult {
  std::optional<double> c_star;
  std::vector<double> grid;                 // dyadic C values
  std::vector<std::string> families;
  std::vector<std::vector<bool>> pass;      // [family][C]
  std::vector<std::vector<CoverageReport>> reports;
};

struct CalibrationOptions {
  int min_exponent = -4;  // C grid 2^k, k = min..max
  int max_exponent = 4;
};

// C* = smallest grid value such that every family passes at it and at every
// larger grid value. Throws Uncalibratable when C_max fails.
CalibrationResult calibrate_constant(const std::vector<CoverageFamily>& families,
                                     const std::vector<ExperimentPlan>& plans,
                                     const CalibrationOptions& options = {});

}  // namespace saa

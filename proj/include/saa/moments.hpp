#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saa/distributions.hpp"
#include "saa/geometry.hpp"
#include "saa/problem.hpp"

namespace saa {

// Per-scenario Hoelder moduli L(xi_j) estimated as probe-grid suprema, and
// their root mean square.
struct HolderEstimate {
  std::size_t index = 0;
  double alpha = 1.0;
  double l_hat = 0.0;
  std::optional<double> l_pop;
  Provenance pop_provenance = Provenance::declared;
  std::vector<double> moduli;
};

// max over probe pairs of |F(x, xi) - F(y, xi)| / ||x - y||^alpha, one entry
// per scenario. Throws degenerate when no two probe points differ.
std::vector<double> scenario_moduli(const ScenarioFunction& f, double alpha,
                                    std::span<const Point> probe, Norm norm,
                                    std::span<const Scenario> scenarios, int threads = 1);

HolderEstimate estimate_holder(const StochasticProgram& program, std::size_t i,
                               std::span<const Point> probe, const ScenarioSet& scenarios,
                               int threads = 1);

// Population modulus sqrt(P L^2) from a reference sample of size `budget`.
double population_holder(const StochasticProgram& program, std::size_t i,
                         std::span<const Point> probe, const Sampler& sampler, std::size_t budget,
                         std::uint64_t seed, int threads = 1);

struct PointwiseVariance {
  double sigma_hat_sq = 0.0;  // P_hat [F_i(x) - f_i(x)]^2
  double sigma_sq = 0.0;      // P [F_i(x) - f_i(x)]^2
  double breve = 0.0;         // sqrt(sigma_hat_sq + sigma_sq)
  Provenance provenance = Provenance::oracle;
};

// Needs the program's oracle for f_i(x) and sigma_i(x)^2.
PointwiseVariance pointwise_variance(const EmpiricalProblem& empirical, std::size_t i,
                                     std::span<const double> x);

// A_alpha(Z) * sqrt(L_hat^2 + L^2).
double sigma_set(double a_alpha, double l_hat, double l_pop);

struct ProfileEntry {
  double value = 0.0;
  Provenance provenance = Provenance::oracle;
  std::string note;
};

// Named variance aggregates. Canonical keys used by the certificates:
//   sigma0(<set>)   A_{alpha_0}(set) sqrt(L_hat_0^2 + L_0^2)
//   sigmaI(<set>)   sup_i A_{alpha_i}(set) sqrt(L_hat_i^2 + L_i^2)
//   sigmaI(<lvl>)   same over the active level sets X_{i,gamma}
//   breve0(<pt>)    breve sigma_0 at an anchor point
//   breveI(<pt>)    sup_i breve sigma_i at an anchor point
struct VarianceProfile {
  std::map<std::string, ProfileEntry> entries;

  void set(const std::string& key, double value, Provenance provenance, std::string note = {});
  std::optional<ProfileEntry> find(const std::string& key) const;
};

struct ProfileRequest {
  std::vector<Point> probe;                             // Hoelder probe grid
  std::optional<ScenarioSet> pilot;                     // scenarios for L_hat; defaults to the SAA sample
  std::map<std::string, Point> anchors;                 // e.g. "z", "y", "x*"
  std::map<std::string, std::vector<Point>> sets;       // e.g. "X", "Y"
  std::map<std::string, double> levels;                 // e.g. "2eps" -> 2 * eps, for active sets
  double h = 0.05;                                      // grid resolution for active sets
  std::vector<std::optional<double>> population_modulus;  // overrides per index 0..m
  AAlphaOptions a_alpha_options{};
  int threads = 1;
};

struct ProfileResult {
  VarianceProfile profile;
  std::vector<HolderEstimate> holder;  // index 0..m
};

ProfileResult variance_profile(const EmpiricalProblem& empirical, const ProfileRequest& request);

struct SelfNormalizedStat {
  double numerator = 0.0;
  double denominator = 0.0;
  double value = 0.0;
};

// |P_hat g - P g| / sqrt((P_hat + P)[g - P g]^2 / N), with 0/0 read as 0.
SelfNormalizedStat self_normalized(std::span<const double> g, double pg, double p_variance);

struct PanchenkoStat {
  double s = 0.0;      // sup_g sum_j g(xi_j)
  double v_hat = 0.0;  // E[ sup_g sum_j (g(xi_j) - g(eta_j))^2 | xi ], resampled
  int resamples = 0;
};

using ScenarioMap = std::function<double(std::span<const double>)>;

PanchenkoStat panchenko(std::span<const ScenarioMap> family, std::span<const Scenario> xi,
                        const Sampler& sampler, Rng& rng, int resamples = 64);

}  // namespace saa

#include "saa/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "saa/error.hpp"
#include "saa/parallel.hpp"

namespace saa {

namespace {

struct ProbePairs {
  std::vector<std::size_t> a, b;
  std::vector<double> inv_scale;  // 1 / ||x_a - x_b||^alpha
};

ProbePairs probe_pairs(std::span<const Point> probe, Norm norm, double alpha) {
  ProbePairs pairs;
  for (std::size_t a = 0; a < probe.size(); ++a) {
    for (std::size_t b = a + 1; b < probe.size(); ++b) {
      const double d = distance(probe[a], probe[b], norm);
      if (d <= 0.0) continue;
      pairs.a.push_back(a);
      pairs.b.push_back(b);
      pairs.inv_scale.push_back(1.0 / std::pow(d, alpha));
    }
  }
  require(!pairs.a.empty(), ErrorKind::degenerate,
          "probe grid needs at least two distinct points for a Hoelder estimate");
  return pairs;
}

std::optional<double> known_population_modulus(const StochasticProgram& program, std::size_t i,
                                               Provenance& provenance) {
  if (const auto& m = program.holder(i).modulus) {
    provenance = Provenance::declared;
    return m;
  }
  if (program.has_oracle()) {
    if (auto m = program.oracle().holder(i)) {
      provenance = program.oracle().provenance();
      return m;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> scenario_moduli(const ScenarioFunction& f, double alpha,
                                    std::span<const Point> probe, Norm norm,
                                    std::span<const Scenario> scenarios, int threads) {
  require(!scenarios.empty(), ErrorKind::empty_sample, "Hoelder estimate needs scenarios");
  const ProbePairs pairs = probe_pairs(probe, norm, alpha);
  std::vector<double> moduli(scenarios.size(), 0.0);
  if (f.is_scenario_free()) {
    std::vector<double> v(probe.size());
    for (std::size_t k = 0; k < probe.size(); ++k) v[k] = f(probe[k], scenarios.front());
    double best = 0.0;
    for (std::size_t q = 0; q < pairs.a.size(); ++q) {
      best = std::max(best, std::abs(v[pairs.a[q]] - v[pairs.b[q]]) * pairs.inv_scale[q]);
    }
    std::fill(moduli.begin(), moduli.end(), best);
    return moduli;
  }
  parallel_for(scenarios.size(), threads, [&](std::size_t j) {
    std::vector<double> v(probe.size());
    for (std::size_t k = 0; k < probe.size(); ++k) v[k] = f(probe[k], scenarios[j]);
    double best = 0.0;
    for (std::size_t q = 0; q < pairs.a.size(); ++q) {
      best = std::max(best, std::abs(v[pairs.a[q]] - v[pairs.b[q]]) * pairs.inv_scale[q]);
    }
    moduli[j] = best;
  });
  return moduli;
}

HolderEstimate estimate_holder(const StochasticProgram& program, std::size_t i,
                               std::span<const Point> probe, const ScenarioSet& scenarios,
                               int threads) {
  HolderEstimate est;
  est.index = i;
  est.alpha = program.holder(i).alpha;
  est.moduli = scenario_moduli(program.function(i), est.alpha, probe, program.hard_set().norm(),
                               scenarios.scenarios, threads);
  double sq = 0.0;
  for (double m : est.moduli) sq += m * m;
  est.l_hat = std::sqrt(sq / static_cast<double>(est.moduli.size()));
  est.l_pop = known_population_modulus(program, i, est.pop_provenance);
  return est;
}

double population_holder(const StochasticProgram& program, std::size_t i,
                         std::span<const Point> probe, const Sampler& sampler, std::size_t budget,
                         std::uint64_t seed, int threads) {
  require(budget > 0, ErrorKind::missing_oracle, "population modulus needs a positive Monte Carlo budget");
  const ScenarioSet ref = draw_scenarios(sampler, budget, seed);
  const auto moduli = scenario_moduli(program.function(i), program.holder(i).alpha, probe,
                                      program.hard_set().norm(), ref.scenarios, threads);
  double sq = 0.0;
  for (double m : moduli) sq += m * m;
  return std::sqrt(sq / static_cast<double>(moduli.size()));
}

PointwiseVariance pointwise_variance(const EmpiricalProblem& empirical, std::size_t i,
                                     std::span<const double> x) {
  const StochasticProgram& program = empirical.program();
  const TrueOracle& oracle = program.oracle();
  const ScenarioFunction& f = program.function(i);
  PointwiseVariance out;
  out.provenance = oracle.provenance();
  const double fx = oracle.mean(i, x);
  out.sigma_sq = std::max(0.0, oracle.variance(i, x));
  const auto& scenarios = empirical.scenarios().scenarios;
  if (f.is_scenario_free()) {
    const double d = f(x, scenarios.front()) - fx;
    out.sigma_hat_sq = d * d;
  } else {
    double acc = 0.0;
    for (const auto& xi : scenarios) {
      const double d = f(x, xi) - fx;
      acc += d * d;
    }
    out.sigma_hat_sq = acc / static_cast<double>(scenarios.size());
  }
  out.breve = std::sqrt(out.sigma_hat_sq + out.sigma_sq);
  return out;
}

double sigma_set(double a_alpha, double l_hat, double l_pop) {
  require(a_alpha >= 0.0 && l_hat >= 0.0 && l_pop >= 0.0, ErrorKind::invalid_argument,
          "set variance inputs must be >= 0");
  return a_alpha * std::sqrt(l_hat * l_hat + l_pop * l_pop);
}

void VarianceProfile::set(const std::string& key, double value, Provenance provenance, std::string note) {
  require(value >= 0.0 && std::isfinite(value), ErrorKind::invalid_argument,
          "profile entry '" + key + "' must be finite and >= 0");
  entries[key] = ProfileEntry{value, provenance, std::move(note)};
}

std::optional<ProfileEntry> VarianceProfile::find(const std::string& key) const {
  const auto it = entries.find(key);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

ProfileResult variance_profile(const EmpiricalProblem& empirical, const ProfileRequest& request) {
  const StochasticProgram& program = empirical.program();
  const std::size_t m = program.constraint_count();
  const Norm norm = program.hard_set().norm();
  const ScenarioSet& pilot = request.pilot ? *request.pilot : empirical.scenarios();
  ProfileResult out;

  bool need_holder = !request.sets.empty() || !request.levels.empty();
  if (need_holder) {
    for (std::size_t i = 0; i <= m; ++i) {
      HolderEstimate est = estimate_holder(program, i, request.probe, pilot, request.threads);
      if (i < request.population_modulus.size() && request.population_modulus[i]) {
        est.l_pop = request.population_modulus[i];
        est.pop_provenance = Provenance::declared;
      }
      require(est.l_pop.has_value(), ErrorKind::missing_oracle,
              "population Hoelder modulus L_" + std::to_string(i) +
                  " is neither declared nor available from the oracle");
      out.holder.push_back(std::move(est));
    }
  }

  auto sigma_for = [&](std::size_t i, std::span<const Point> set) {
    const double a = set.empty() ? 0.0 : a_alpha(set, norm, out.holder[i].alpha, request.a_alpha_options).value;
    return sigma_set(a, out.holder[i].l_hat, *out.holder[i].l_pop);
  };
  auto worst_provenance = [&](std::size_t begin, std::size_t end) {
    Provenance p = Provenance::oracle;
    for (std::size_t i = begin; i < end; ++i) {
      if (out.holder[i].pop_provenance == Provenance::monte_carlo) return Provenance::monte_carlo;
      if (out.holder[i].pop_provenance == Provenance::declared) p = Provenance::declared;
    }
    return p;
  };

  for (const auto& [name, set] : request.sets) {
    const std::string note = "A_alpha over " + std::to_string(set.size()) + " grid points";
    out.profile.set("sigma0(" + name + ")", sigma_for(0, set), worst_provenance(0, 1), note);
    if (m > 0) {
      double worst = 0.0;
      for (std::size_t i = 1; i <= m; ++i) worst = std::max(worst, sigma_for(i, set));
      out.profile.set("sigmaI(" + name + ")", worst, worst_provenance(1, m + 1), note);
    }
  }

  if (m > 0 && !request.levels.empty()) {
    const ConstraintView view = true_constraints(program);
    const auto grid = program.hard_set().grid(request.h);
    for (const auto& [name, gamma] : request.levels) {
      double worst = 0.0;
      std::size_t total = 0;
      for (std::size_t i = 1; i <= m; ++i) {
        const GridSet active = relaxed_set(view, grid, norm, {SetKind::active, gamma, i}, request.h);
        total += active.points.size();
        worst = std::max(worst, sigma_for(i, active.points));
      }
      out.profile.set("sigmaI(" + name + ")", worst, Provenance::grid_estimated,
                      "active level sets at tol_active = h = " + std::to_string(request.h) + ", " +
                          std::to_string(total) + " grid points");
    }
  }

  for (const auto& [name, x] : request.anchors) {
    require(program.hard_set().contains(x), ErrorKind::invalid_argument,
            "anchor '" + name + "' lies outside the hard set");
    const auto v0 = pointwise_variance(empirical, 0, x);
    out.profile.set("breve0(" + name + ")", v0.breve, v0.provenance);
    if (m > 0) {
      double worst = 0.0;
      for (std::size_t i = 1; i <= m; ++i) worst = std::max(worst, pointwise_variance(empirical, i, x).breve);
      out.profile.set("breveI(" + name + ")", worst, v0.provenance);
    }
  }
  return out;
}

SelfNormalizedStat self_normalized(std::span<const double> g, double pg, double p_variance) {
  require(!g.empty(), ErrorKind::empty_sample, "self-normalized statistic needs a sample");
  require(p_variance >= 0.0, ErrorKind::invalid_argument, "population variance must be >= 0");
  const double n = static_cast<double>(g.size());
  double mean = 0.0, sq = 0.0;
  for (double v : g) {
    mean += v;
    sq += (v - pg) * (v - pg);
  }
  mean /= n;
  sq /= n;
  SelfNormalizedStat s;
  s.numerator = std::abs(mean - pg);
  s.denominator = std::sqrt((sq + p_variance) / n);
  s.value = s.denominator > 0.0 ? s.numerator / s.denominator : 0.0;
  return s;
}

PanchenkoStat panchenko(std::span<const ScenarioMap> family, std::span<const Scenario> xi,
                        const Sampler& sampler, Rng& rng, int resamples) {
  require(!family.empty(), ErrorKind::invalid_argument, "Panchenko statistic needs a nonempty family");
  require(!xi.empty(), ErrorKind::empty_sample, "Panchenko statistic needs a sample");
  require(resamples >= 1, ErrorKind::invalid_argument, "need at least one resample for V_hat");
  const std::size_t n = xi.size();
  std::vector<std::vector<double>> g_xi(family.size(), std::vector<double>(n));
  PanchenkoStat out;
  out.s = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < family.size(); ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      g_xi[k][j] = family[k](xi[j]);
      sum += g_xi[k][j];
    }
    out.s = std::max(out.s, sum);
  }
  double acc = 0.0;
  for (int r = 0; r < resamples; ++r) {
    std::vector<Scenario> eta(n);
    for (auto& e : eta) e = sampler(rng);
    double best = 0.0;
    for (std::size_t k = 0; k < family.size(); ++k) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = g_xi[k][j] - family[k](eta[j]);
        sum += d * d;
      }
      best = std::max(best, sum);
    }
    acc += best;
  }
  out.v_hat = acc / resamples;
  out.resamples = resamples;
  return out;
}

}  // namespace saa

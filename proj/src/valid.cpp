#include "saa/valid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "saa/error.hpp"
#include "saa/moments.hpp"
#include "saa/parallel.hpp"

namespace saa {

WilsonInterval wilson(std::size_t successes, std::size_t trials, double z) {
  require(trials > 0, ErrorKind::invalid_argument, "Wilson interval needs at least one trial");
  require(successes <= trials, ErrorKind::invalid_argument, "successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  // the endpoints at 0 and n successes are exactly 0 and 1
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

TailReport tail_experiment(const TailPlan& plan) {
  require(plan.replications > 0, ErrorKind::invalid_argument, "tail experiment needs R >= 1");
  require(plan.n > 0, ErrorKind::empty_sample, "tail experiment needs N >= 1");
  require(!plan.t_grid.empty(), ErrorKind::invalid_argument, "t grid is empty");
  require(plan.constant > 0.0, ErrorKind::invalid_argument, "C must be > 0");
  const bool identity = !plan.g;
  require(identity || (plan.pg && plan.p_variance), ErrorKind::missing_oracle,
          "a custom g needs P g and P [g - Pg]^2");
  const double pg = plan.pg.value_or(plan.law.mean());
  const double pvar = plan.p_variance.value_or(plan.law.variance());

  std::vector<double> stat(plan.replications);
  parallel_for(plan.replications, plan.threads, [&](std::size_t r) {
    Rng rng = derived_rng(plan.seed, r);
    std::vector<double> g(plan.n);
    for (auto& v : g) {
      const double xi = plan.law.sample(rng);
      v = identity ? xi : plan.g(xi);
    }
    stat[r] = self_normalized(g, pg, pvar).value;
  });

  TailReport rep;
  rep.n = plan.n;
  rep.replications = plan.replications;
  rep.constant = plan.constant;
  rep.seed = plan.seed;
  for (double t : plan.t_grid) {
    require(t >= 0.0, ErrorKind::invalid_argument, "t must be >= 0");
    TailRow row;
    row.t = t;
    row.threshold = plan.constant * std::sqrt(1.0 + t);
    row.exceed = static_cast<std::size_t>(
        std::count_if(stat.begin(), stat.end(), [&](double s) { return s >= row.threshold; }));
    row.frequency = static_cast<double>(row.exceed) / static_cast<double>(plan.replications);
    row.bound = std::exp(-t);
    row.pass = row.frequency <= row.bound;
    rep.rows.push_back(row);
  }
  return rep;
}

UniformTailReport uniform_tail_experiment(const UniformTailPlan& plan) {
  require(plan.replications > 0, ErrorKind::invalid_argument, "uniform tail experiment needs R >= 1");
  require(plan.n > 0, ErrorKind::empty_sample, "uniform tail experiment needs N >= 1");
  require(plan.program && plan.program->has_oracle(), ErrorKind::missing_oracle,
          "uniform tail experiment needs a population oracle");
  require(!plan.grid.empty(), ErrorKind::invalid_argument, "sup grid is empty");
  const StochasticProgram& prog = *plan.program;
  const std::size_t i = plan.index;
  const Norm norm = prog.hard_set().norm();
  const double alpha = prog.holder(i).alpha;

  std::vector<double> truth(plan.grid.size());
  for (std::size_t k = 0; k < plan.grid.size(); ++k) truth[k] = prog.true_value(i, plan.grid[k]);
  const double truth_anchor = prog.true_value(i, plan.anchor);

  std::vector<double> sup(plan.replications), lhat_sq(plan.replications);
  parallel_for(plan.replications, plan.threads, [&](std::size_t r) {
    Rng rng = derived_rng(plan.seed, r);
    ScenarioSet set;
    set.seed = plan.seed;
    set.scenarios.reserve(plan.n);
    for (std::size_t j = 0; j < plan.n; ++j) set.scenarios.push_back(plan.sampler(rng));
    double l2 = 0.0;
    if (plan.probe.size() >= 2) {
      const auto moduli = scenario_moduli(prog.function(i), alpha, plan.probe, norm, set.scenarios);
      for (double l : moduli) l2 += l * l;
      l2 /= static_cast<double>(plan.n);
    }
    lhat_sq[r] = l2;
    const EmpiricalProblem emp(plan.program, std::move(set), std::vector<double>(prog.constraint_count(), 0.0));
    const double base = emp.value(i, plan.anchor) - truth_anchor;
    double s = 0.0;
    for (std::size_t k = 0; k < plan.grid.size(); ++k) {
      s = std::max(s, std::abs(emp.value(i, plan.grid[k]) - truth[k] - base));
    }
    sup[r] = s;
  });

  UniformTailReport rep;
  rep.table.n = plan.n;
  rep.table.replications = plan.replications;
  rep.table.constant = plan.constant;
  rep.table.seed = plan.seed;
  rep.mean_sup = std::accumulate(sup.begin(), sup.end(), 0.0) / static_cast<double>(plan.replications);
  const double pl2 = plan.population_modulus * plan.population_modulus;
  const double n = static_cast<double>(plan.n);
  for (double t : plan.t_grid) {
    TailRow row;
    row.t = t;
    row.threshold = plan.constant * plan.a_alpha * std::sqrt(1.0 + t);
    for (std::size_t r = 0; r < plan.replications; ++r) {
      const double bound = row.threshold * std::sqrt((lhat_sq[r] + pl2) / n);
      // strict: a degenerate 0-vs-0 replication is not an exceedance
      if (sup[r] > bound) ++row.exceed;
    }
    row.frequency = static_cast<double>(row.exceed) / static_cast<double>(plan.replications);
    row.bound = std::exp(-t);
    row.pass = row.frequency <= row.bound;
    rep.table.rows.push_back(row);
  }
  return rep;
}

std::vector<std::string> coverage_event_tags() { return {"near-optimal", "value-bracket", "exterior", "interior"}; }

namespace {

std::string canonical_event(const std::string& tag) {
  if (tag == "near-optimal" || tag == "X̂*_ε ⊆ X*_{2ε}") return "near-optimal";
  if (tag == "value-bracket" || tag == "|F̂*−f*| bracket") return "value-bracket";
  if (tag == "exterior" || tag == "X̂ ⊆ X_{2ε}") return "exterior";
  if (tag == "interior" || tag == "X̂ ⊆ X") return "interior";
  fail(ErrorKind::invalid_argument, "unknown coverage event '" + tag + "'");
}

struct GridTruth {
  std::size_t m = 0;
  std::vector<std::vector<double>> f;  // [i][k]
  std::vector<double> gmax;
  double f_star = 0.0;
};

GridTruth grid_truth(const StochasticProgram& prog, const std::vector<Point>& grid) {
  GridTruth gt;
  gt.m = prog.constraint_count();
  gt.f.assign(gt.m + 1, std::vector<double>(grid.size()));
  gt.gmax.assign(grid.size(), -std::numeric_limits<double>::infinity());
  gt.f_star = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i <= gt.m; ++i) gt.f[i][k] = prog.true_value(i, grid[k]);
    for (std::size_t i = 1; i <= gt.m; ++i) gt.gmax[k] = std::max(gt.gmax[k], gt.f[i][k]);
    if (gt.gmax[k] <= kSetTolerance) gt.f_star = std::min(gt.f_star, gt.f[0][k]);
  }
  return gt;
}

bool grid_event(const std::string& event, const EmpiricalProblem& emp, const std::vector<Point>& grid,
                const GridTruth& gt, double eps) {
  const std::size_t m = gt.m;
  std::vector<double> fh0;
  std::vector<std::size_t> xhat;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    bool in = true;
    for (std::size_t i = 1; i <= m && in; ++i) {
      in = emp.value(i, grid[k]) <= emp.relaxations()[i - 1] + kSetTolerance;
    }
    if (!in) continue;
    xhat.push_back(k);
    if (event == "near-optimal" || event == "value-bracket") fh0.push_back(emp.value(0, grid[k]));
  }
  if (event == "exterior" || event == "interior") {
    const double level = event == "exterior" ? 2.0 * eps : 0.0;
    return std::all_of(xhat.begin(), xhat.end(), [&](std::size_t k) { return gt.gmax[k] <= level + kSetTolerance; });
  }
  if (xhat.empty()) return event == "near-optimal";
  const double fhat_star = *std::min_element(fh0.begin(), fh0.end());
  if (event == "value-bracket") {
    return gt.f_star - 2.0 * eps <= fhat_star + kSetTolerance && fhat_star <= gt.f_star + eps + kSetTolerance;
  }
  for (std::size_t j = 0; j < xhat.size(); ++j) {
    if (fh0[j] > fhat_star + eps) continue;
    const std::size_t k = xhat[j];
    if (m > 0 && gt.gmax[k] > kSetTolerance) return false;
    if (gt.f[0][k] > gt.f_star + 2.0 * eps + kSetTolerance) return false;
  }
  return true;
}

}  // namespace

CoverageReport coverage_experiment(const ExperimentPlan& plan, const CoverageFamily& family, double constant) {
  require(plan.replications > 0, ErrorKind::invalid_argument, "coverage experiment needs R >= 1");
  require(!plan.eps.empty() && !plan.p.empty(), ErrorKind::invalid_argument, "eps and p grids must be nonempty");
  require(family.program != nullptr, ErrorKind::invalid_argument, "family has no program");
  require(family.program->has_oracle(), ErrorKind::missing_oracle, "coverage needs a population oracle");
  const StochasticProgram& prog = *family.program;
  const std::size_t m = prog.constraint_count();
  const std::string event = family.evaluate ? family.event : canonical_event(family.event);
  GridTruth truth;
  if (!family.evaluate) {
    require(!family.grid.empty(), ErrorKind::invalid_argument, "family grid is empty");
    truth = grid_truth(prog, family.grid);
    require(std::isfinite(truth.f_star), ErrorKind::infeasible, "feasible grid X is empty");
  }

  CoverageReport rep;
  rep.family = family.name;
  rep.event = family.event;
  rep.theorem = family.theorem;
  rep.constant = constant;
  rep.seed = plan.seed;
  rep.first_replication = plan.first_replication;
  for (double eps : plan.eps) {
    for (double p : plan.p) {
      const Certificate cert =
          sample_size(family.theorem, family.sigma_at ? family.sigma_at(eps) : family.sigma, eps, p, std::max<std::size_t>(m, 1), constant,
                      family.slater_margin, family.item);
      const std::size_t n = plan.n_override.value_or(cert.n_required);
      const std::vector<double> relax(m, cert.relaxation.value_or(0.0));
      std::vector<char> held(plan.replications, 0);
      parallel_for(plan.replications, plan.threads, [&](std::size_t r) {
        Rng rng = derived_rng(plan.seed, plan.first_replication + r);
        ScenarioSet set;
        set.seed = plan.seed;
        set.scenarios.reserve(n);
        for (std::size_t j = 0; j < n; ++j) set.scenarios.push_back(family.sampler(rng));
        const EmpiricalProblem emp(family.program, std::move(set), relax);
        held[r] = family.evaluate ? family.evaluate(emp, eps) : grid_event(event, emp, family.grid, truth, eps);
      });
      CoverageRow row;
      row.eps = eps;
      row.p = p;
      row.n = n;
      row.trials = plan.replications;
      row.successes = static_cast<std::size_t>(std::count(held.begin(), held.end(), 1));
      row.frequency = static_cast<double>(row.successes) / static_cast<double>(row.trials);
      row.interval = wilson(row.successes, row.trials);
      row.floor = 1.0 - p;
      row.pass = row.interval.lo >= row.floor - kPassSlack;
      rep.rows.push_back(row);
    }
  }
  rep.all_pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const CoverageRow& r) { return r.pass; });
  return rep;
}

CoverageReport merge(const CoverageReport& a, const CoverageReport& b) {
  require(a.rows.size() == b.rows.size() && a.family == b.family && a.constant == b.constant && a.seed == b.seed,
          ErrorKind::invalid_argument, "only runs of the same plan can be merged");
  CoverageReport out = a;
  out.first_replication = std::min(a.first_replication, b.first_replication);
  for (std::size_t j = 0; j < a.rows.size(); ++j) {
    require(a.rows[j].eps == b.rows[j].eps && a.rows[j].p == b.rows[j].p && a.rows[j].n == b.rows[j].n,
            ErrorKind::invalid_argument, "coverage rows do not line up");
    CoverageRow& r = out.rows[j];
    r.successes += b.rows[j].successes;
    r.trials += b.rows[j].trials;
    r.frequency = static_cast<double>(r.successes) / static_cast<double>(r.trials);
    r.interval = wilson(r.successes, r.trials);
    r.pass = r.interval.lo >= r.floor - kPassSlack;
  }
  out.all_pass = std::all_of(out.rows.begin(), out.rows.end(), [](const CoverageRow& r) { return r.pass; });
  return out;
}

namespace {

// two-sided 97.5% Student t quantiles, df = 1..30
double t_quantile(std::size_t df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  return df >= 1 && df <= 30 ? table[df - 1] : 1.96;
}

}  // namespace

RateReport fit_rate(const std::vector<std::size_t>& n, const std::vector<double>& means,
                    const std::vector<double>& std_errors) {
  require(n.size() >= 3, ErrorKind::invalid_argument, "rate fit needs at least 3 sample sizes");
  require(n.size() == means.size(), ErrorKind::dimension_mismatch, "one mean per sample size");
  RateReport rep;
  for (std::size_t j = 0; j < n.size(); ++j) {
    require(means[j] >= 0.0, ErrorKind::invalid_argument, "mean deviations must be >= 0");
    rep.rows.push_back({n[j], means[j], j < std_errors.size() ? std_errors[j] : 0.0});
  }
  if (std::any_of(means.begin(), means.end(), [](double v) { return !(v > 0.0); })) {
    rep.degenerate = true;
    return rep;
  }
  const std::size_t k = n.size();
  std::vector<double> x(k), y(k);
  for (std::size_t j = 0; j < k; ++j) {
    x[j] = std::log(static_cast<double>(n[j]));
    y[j] = std::log(means[j]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(k);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    sxx += (x[j] - mx) * (x[j] - mx);
    sxy += (x[j] - mx) * (y[j] - my);
  }
  require(sxx > 0.0, ErrorKind::degenerate, "sample sizes must not all coincide");
  const double b = sxy / sxx;
  const double a = my - b * mx;
  double rss = 0.0;
  for (std::size_t j = 0; j < k; ++j) rss += std::pow(y[j] - a - b * x[j], 2);
  const double se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  rep.slope = b;
  rep.slope_lo = b - t_quantile(k - 2) * se;
  rep.slope_hi = b + t_quantile(k - 2) * se;
  rep.pass = b >= -0.6 && b <= -0.4;
  return rep;
}

RateReport rate_experiment(const RatePlan& plan) {
  require(plan.n_grid.size() >= 3, ErrorKind::invalid_argument, "rate experiment needs at least 3 sample sizes");
  require(plan.replications > 0, ErrorKind::invalid_argument, "rate experiment needs R >= 1");
  require(plan.program && plan.program->has_oracle(), ErrorKind::missing_oracle, "rate experiment needs an oracle");
  require(!plan.grid.empty(), ErrorKind::invalid_argument, "sup grid is empty");
  const StochasticProgram& prog = *plan.program;
  std::vector<double> truth(plan.grid.size());
  for (std::size_t k = 0; k < plan.grid.size(); ++k) truth[k] = prog.true_value(plan.index, plan.grid[k]);

  std::vector<double> means, errors;
  for (std::size_t a = 0; a < plan.n_grid.size(); ++a) {
    const std::size_t n = plan.n_grid[a];
    require(n > 0, ErrorKind::empty_sample, "sample sizes must be >= 1");
    std::vector<double> sup(plan.replications);
    // one independent stream family per sample size
    const std::uint64_t base = plan.seed + 0x9E3779B97F4A7C15ULL * (a + 1);
    parallel_for(plan.replications, plan.threads, [&](std::size_t r) {
      Rng rng = derived_rng(base, r);
      ScenarioSet set;
      set.scenarios.reserve(n);
      for (std::size_t j = 0; j < n; ++j) set.scenarios.push_back(plan.sampler(rng));
      const EmpiricalProblem emp(plan.program, std::move(set), std::vector<double>(prog.constraint_count(), 0.0));
      double s = 0.0;
      for (std::size_t k = 0; k < plan.grid.size(); ++k) {
        s = std::max(s, std::abs(emp.value(plan.index, plan.grid[k]) - truth[k]));
      }
      sup[r] = s;
    });
    const double r = static_cast<double>(plan.replications);
    const double mean = std::accumulate(sup.begin(), sup.end(), 0.0) / r;
    double var = 0.0;
    for (double s : sup) var += (s - mean) * (s - mean);
    var = plan.replications > 1 ? var / (r - 1.0) : 0.0;
    means.push_back(mean);
    errors.push_back(std::sqrt(var / r));
  }
  RateReport rep = fit_rate(plan.n_grid, means, errors);
  rep.seed = plan.seed;
  rep.replications = plan.replications;
  return rep;
}

CalibrationResult calibrate_constant(const std::vector<CoverageFamily>& families,
                                     const std::vector<ExperimentPlan>& plans, const CalibrationOptions& options) {
  require(!families.empty(), ErrorKind::invalid_argument, "calibration needs at least one family");
  require(families.size() == plans.size(), ErrorKind::dimension_mismatch, "one plan per family");
  require(options.min_exponent <= options.max_exponent, ErrorKind::invalid_argument, "empty C grid");
  CalibrationResult res;
  for (int e = options.min_exponent; e <= options.max_exponent; ++e) res.grid.push_back(std::ldexp(1.0, e));
  for (std::size_t f = 0; f < families.size(); ++f) {
    res.families.push_back(families[f].name);
    res.pass.emplace_back();
    res.reports.emplace_back();
    for (double c : res.grid) {
      res.reports[f].push_back(coverage_experiment(plans[f], families[f], c));
      res.pass[f].push_back(res.reports[f].back().all_pass);
    }
  }
  const auto all_pass_at = [&](std::size_t j) {
    return std::all_of(res.pass.begin(), res.pass.end(), [j](const std::vector<bool>& row) { return row[j]; });
  };
  std::optional<std::size_t> lowest;
  for (std::size_t j = res.grid.size(); j-- > 0;) {
    if (!all_pass_at(j)) break;
    lowest = j;
  }
  if (!lowest) {
    std::string diag = "no C <= " + std::to_string(res.grid.back()) + " passes; failing families at C_max:";
    for (std::size_t f = 0; f < families.size(); ++f) {
      if (res.pass[f].back()) continue;
      diag += " " + families[f].name;
      for (const auto& row : res.reports[f].back().rows) {
        if (!row.pass) {
          diag += " (eps=" + std::to_string(row.eps) + ", p=" + std::to_string(row.p) +
                  ", freq=" + std::to_string(row.frequency) + ")";
        }
      }
    }
    fail(ErrorKind::uncalibratable, diag);
  }
  res.c_star = res.grid[*lowest];
  return res;
}

}  // namespace saa

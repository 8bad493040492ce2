#include <cmath>

#include "doctest.h"
#include "saa/error.hpp"
#include "saa/families.hpp"
#include "saa/valid.hpp"

using namespace saa;

TEST_CASE("Wilson interval against the closed form") {
  const double z = 1.959963984540054, n = 100.0, z2 = z * z;
  const auto zero = wilson(0, 100);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == doctest::Approx(z2 / (n + z2)));
  const auto one = wilson(100, 100);
  CHECK(one.hi == 1.0);
  CHECK(one.lo == doctest::Approx(n / (n + z2)));
  const auto half = wilson(50, 100);
  const double hw = z * std::sqrt(0.25 / n + z2 / (4 * n * n)) / (1 + z2 / n);
  CHECK(half.lo == doctest::Approx(0.5 - hw));
  CHECK(half.hi == doctest::Approx(0.5 + hw));
  for (std::size_t s = 0; s <= 100; s += 7) {
    const auto w = wilson(s, 100);
    CHECK(w.lo <= s / 100.0);
    CHECK(w.hi >= s / 100.0);
  }
  CHECK_THROWS_AS(wilson(0, 0), Error);
}

TEST_CASE("self-normalized tail experiments") {
  TailPlan pm;
  pm.law = Distribution::point_mass(0.0);
  pm.replications = 200;
  for (const auto& row : tail_experiment(pm).rows) CHECK(row.exceed == 0);

  TailPlan bern;
  bern.law = Distribution::two_point(0.0, 1.0);
  bern.n = 100;
  bern.replications = 10000;
  bern.t_grid = {1.0};
  bern.seed = 3;
  const auto rep = tail_experiment(bern);
  CHECK(rep.rows[0].frequency <= std::exp(-1.0));
  CHECK(rep.rows[0].pass);

  // larger C lowers every row on the same seeds
  TailPlan heavy;
  heavy.law = Distribution::student_t(3.0);
  heavy.n = 50;
  heavy.replications = 2000;
  heavy.constant = 0.5;
  const auto low = tail_experiment(heavy);
  heavy.constant = 1.0;
  const auto high = tail_experiment(heavy);
  for (std::size_t j = 0; j < low.rows.size(); ++j) CHECK(high.rows[j].exceed <= low.rows[j].exceed);
  CHECK(tail_experiment(heavy).rows[1].exceed == high.rows[1].exceed);
  heavy.replications = 0;
  CHECK_THROWS_AS(tail_experiment(heavy), Error);
}

TEST_CASE("uniform tail experiments") {
  auto prog = simplex_linear_program(3, Distribution::student_t(3.0), 20000);
  UniformTailPlan plan;
  plan.program = prog;
  plan.sampler = iid_sampler(Distribution::student_t(3.0), 3);
  plan.grid = prog->hard_set().grid(0.1);
  plan.probe = SpaceDescriptor::simplex(3).grid(1.0);
  plan.anchor = {1.0, 0.0, 0.0};
  plan.a_alpha = a_alpha(prog->hard_set(), 1.0).value;
  plan.population_modulus = *prog->holder(0).modulus;
  plan.n = 100;
  plan.replications = 300;
  plan.seed = 5;
  const auto rep = uniform_tail_experiment(plan);
  CHECK(rep.sup_is_lower_bound);
  CHECK(rep.mean_sup > 0.0);
  for (const auto& row : rep.table.rows) CHECK(row.pass);

  // a one-point space: A_alpha = 0 and the sup is 0
  UniformTailPlan single = plan;
  single.grid = {plan.anchor};
  single.a_alpha = 0.0;
  const auto s = uniform_tail_experiment(single);
  CHECK(s.mean_sup == 0.0);
  for (const auto& row : s.table.rows) CHECK(row.exceed == 0);

  // scenario-free integrand
  auto fam = family_by_name("scenario-free");
  UniformTailPlan free = plan;
  free.program = fam.program;
  free.sampler = fam.sampler;
  free.grid = fam.grid;
  free.probe = {};
  free.anchor = {0.0};
  free.population_modulus = 0.0;
  const auto f = uniform_tail_experiment(free);
  CHECK(f.mean_sup == 0.0);
  for (const auto& row : f.table.rows) CHECK(row.frequency == 0.0);
}

TEST_CASE("coverage experiments") {
  const auto free = family_by_name("scenario-free");
  ExperimentPlan plan;
  plan.replications = 50;
  const auto rep = coverage_experiment(plan, free, 1.0);
  CHECK(rep.rows[0].n == 1);
  CHECK(rep.rows[0].frequency == 1.0);

  auto interior = family_by_name("disc-interior");
  plan.eps = {0.2};  // eps_ring / 2 = 0.125
  CHECK_THROWS_AS(coverage_experiment(plan, interior, 1.0), Error);

  // merging disjoint half-runs reproduces the full run
  auto quad = family_by_name("quadratic-1d");
  ExperimentPlan full;
  full.replications = 200;
  full.seed = 17;
  full.eps = {0.1, 0.2};
  const auto whole = coverage_experiment(full, quad, 1.0 / 32.0);
  ExperimentPlan a = full, b = full;
  a.replications = b.replications = 100;
  b.first_replication = 100;
  const auto merged = merge(coverage_experiment(a, quad, 1.0 / 32.0), coverage_experiment(b, quad, 1.0 / 32.0));
  for (std::size_t j = 0; j < whole.rows.size(); ++j) {
    CHECK(merged.rows[j].successes == whole.rows[j].successes);
    CHECK(merged.rows[j].trials == whole.rows[j].trials);
    CHECK(merged.rows[j].interval.lo == whole.rows[j].interval.lo);
  }
  const auto again = coverage_experiment(full, quad, 1.0 / 32.0);
  CHECK(again.rows[0].successes == whole.rows[0].successes);
  for (const auto& row : whole.rows) {
    CHECK(row.frequency >= row.interval.lo);
    CHECK(row.frequency <= row.interval.hi);
  }
}

TEST_CASE("rate fits") {
  std::vector<std::size_t> n{64, 256, 1024, 4096};
  std::vector<double> m;
  for (auto v : n) m.push_back(1.0 / std::sqrt(static_cast<double>(v)));
  const auto exact = fit_rate(n, m);
  REQUIRE(exact.slope);
  CHECK(*exact.slope == doctest::Approx(-0.5));
  CHECK(exact.slope_lo == doctest::Approx(-0.5));
  CHECK(exact.pass);
  const auto flat = fit_rate(n, {0.0, 0.0, 0.0, 0.0});
  CHECK(flat.degenerate);
  CHECK_FALSE(flat.slope);
  CHECK_THROWS_AS(fit_rate({1, 2}, {1.0, 0.5}), Error);

  auto prog = simplex_linear_program(3, Distribution::student_t(3.0), 1000);
  RatePlan plan;
  plan.program = prog;
  plan.sampler = iid_sampler(Distribution::student_t(3.0), 3);
  plan.grid = prog->hard_set().grid(0.5);
  plan.n_grid = {64, 256, 1024};
  plan.replications = 100;
  const auto rep = rate_experiment(plan);
  REQUIRE(rep.slope);
  CHECK(*rep.slope < -0.3);
  CHECK(*rep.slope > -0.7);

  auto free = family_by_name("scenario-free");
  plan.program = free.program;
  plan.sampler = free.sampler;
  plan.grid = free.grid;
  CHECK(rate_experiment(plan).degenerate);
}

TEST_CASE("calibration") {
  const auto free = family_by_name("scenario-free");
  ExperimentPlan plan;
  plan.replications = 50;  // 20 could never clear 0.88: 20 / (20 + z^2) < 0.85
  CalibrationOptions opt;
  opt.min_exponent = -3;
  opt.max_exponent = 1;
  const auto res = calibrate_constant({free}, {plan}, opt);
  REQUIRE(res.c_star);
  CHECK(*res.c_star == 0.125);
  CHECK(res.pass[0].size() == 5);

  // a family whose event never holds cannot be calibrated
  auto broken = free;
  broken.evaluate = [](const EmpiricalProblem&, double) { return false; };
  CHECK_THROWS_AS(calibrate_constant({broken}, {plan}, opt), Error);
}

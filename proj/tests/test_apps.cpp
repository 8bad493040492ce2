#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "saa/apps.hpp"
#include "saa/error.hpp"
#include "saa/solve.hpp"

using namespace saa;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("CVaR examples") {
  const std::vector<double> a{3.0, -1.0, 2.5};
  CHECK(cvar(a, 1.0) == doctest::Approx(mean(a)));
  CHECK(cvar(std::vector<double>{0, 1}, 0.5) == doctest::Approx(1.0));
  for (double t = 0.0; t <= 1.0; t += 0.125) CHECK(cvar_objective(std::vector<double>{0, 1}, 0.5, t) == doctest::Approx(1.0));
  CHECK(cvar_objective(std::vector<double>{0, 1}, 0.5, 1.5) > 1.0);
  CHECK(cvar(std::vector<double>{1, 2, 3, 4}, 0.5) == doctest::Approx(3.5));
  CHECK_THROWS_AS(cvar(a, 0.0), Error);
  CHECK_THROWS_AS(cvar(std::vector<double>{}, 0.5), Error);
}

TEST_CASE("CVaR closed form against search and its properties") {
  std::mt19937_64 rng(21);
  std::student_t_distribution<double> t3(3.0);
  std::uniform_real_distribution<double> u(0.02, 1.0);
  for (int s = 0; s < 100; ++s) {
    std::vector<double> g(5 + rng() % 60);
    for (auto& v : g) v = t3(rng);
    const double p = u(rng);
    const double c = cvar(g, p);
    CHECK(std::abs(c - oracle::cvar_by_search(g, p)) <= 1e-6);
    std::vector<double> shifted = g, scaled = g;
    for (auto& v : shifted) v += 1.75;
    for (auto& v : scaled) v *= 2.5;
    CHECK(cvar(shifted, p) == doctest::Approx(c + 1.75).epsilon(1e-12));
    CHECK(cvar(scaled, p) == doctest::Approx(2.5 * c).epsilon(1e-12));
    CHECK(cvar(g, std::min(1.0, p + 0.1)) <= c + 1e-12);
    CHECK(c >= mean(g) - 1e-12);
  }
}

TEST_CASE("returns CSV") {
  std::istringstream ok("a,b\n0.1,0.2\n-0.05,0.3\n");
  const auto ds = read_returns_csv(ok);
  CHECK(ds.d == 2);
  CHECK(ds.rows.size() == 2);
  std::istringstream missing("a,b\n0.1,\n");
  CHECK_THROWS_AS(read_returns_csv(missing), Error);
  std::istringstream empty("a,b\n");
  CHECK_THROWS_AS(read_returns_csv(empty), Error);
  CHECK_THROWS_AS(read_returns_csv_file("/nonexistent/returns.csv"), Error);
}

TEST_CASE("portfolio examples") {
  ReturnsDataset det;
  det.d = 2;
  det.rows.assign(10, Scenario{0.1, 0.2});
  const auto pp = build_portfolio(det, 0.5, 0.0);
  CHECK(pp.t_lo <= -0.2);
  CHECK(pp.t_hi >= -0.1);
  const EmpiricalProblem emp(pp.program, pp.scenarios, {0.0});
  const auto sol = solve_saa(emp);
  CHECK(sol.x[0] == doctest::Approx(0.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
  CHECK(sol.value == doctest::Approx(-0.2));
  const Point at{0.0, 1.0, -0.2};
  CHECK(emp.membership(at).feasible);

  // a huge beta leaves the max-mean vertex
  const auto loose = build_portfolio(synthetic_returns({0.05, 0.1}, 0.1, 200, Distribution::student_t(3), 4), 0.2, 1e6);
  const EmpiricalProblem el(loose.program, loose.scenarios, {0.0});
  const auto s2 = solve_saa(el, {.h = 0.05});
  double m0 = 0.0, m1 = 0.0;
  for (const auto& r : loose.dataset.rows) {
    m0 += r[0];
    m1 += r[1];
  }
  CHECK(s2.x[m1 > m0 ? 1 : 0] == doctest::Approx(1.0));

  // one asset: feasibility is CVaR_p[-xi] <= beta
  const auto single = synthetic_returns({0.0}, 1.0, 40, Distribution::gaussian(0, 1), 9);
  std::vector<double> losses;
  for (const auto& r : single.rows) losses.push_back(-r[0]);
  const double cv = cvar(losses, 0.3);
  for (double beta : {cv - 0.05, cv + 0.05}) {
    const auto one = build_portfolio(single, 0.3, beta);
    const EmpiricalProblem e1(one.program, one.scenarios, {0.0});
    if (beta < cv) {
      CHECK_THROWS_AS(solve_saa(e1, {.h = 0.002}), Error);
    } else {
      CHECK(solve_saa(e1, {.h = 0.002}).x[0] == 1.0);
    }
  }
  CHECK_THROWS_AS(build_portfolio(ReturnsDataset{}, 0.5, 0.0), Error);
}

TEST_CASE("portfolio reformulation matches the direct CVaR problem") {
  const auto ds = synthetic_returns({0.02, 0.06}, 0.1, 60, Distribution::student_t(3), 12);
  const double p = 0.2;
  // direct: grid over x with the closed-form CVaR constraint
  const double h = 0.01;
  double beta = 0.0;
  {
    std::vector<double> l;
    for (const auto& r : ds.rows) l.push_back(-(0.5 * r[0] + 0.5 * r[1]));
    beta = cvar(l, p);
  }
  double direct = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 100; ++k) {
    const double x1 = k * h;
    std::vector<double> l;
    double m = 0.0;
    for (const auto& r : ds.rows) {
      l.push_back(-((1 - x1) * r[0] + x1 * r[1]));
      m += (1 - x1) * r[0] + x1 * r[1];
    }
    if (cvar(l, p) <= beta + 1e-12) direct = std::min(direct, -m / ds.rows.size());
  }
  const auto pp = build_portfolio(ds, p, beta);
  const EmpiricalProblem emp(pp.program, pp.scenarios, {0.0});
  const auto sol = solve_saa(emp, {.h = h});
  // the t grid can miss the exact order statistic: slack is the objective change over one x step
  double lmax = 0.0;
  for (const auto& r : ds.rows) lmax = std::max(lmax, std::abs(r[1] - r[0]));
  CHECK(sol.value >= direct - 1e-12);
  CHECK(sol.value <= direct + lmax * h * 2.0);
}

TEST_CASE("lasso examples") {
  LassoData data;
  for (double a : {-1.0, 0.5, 1.0, 2.0}) {
    data.features.push_back({a});
    data.responses.push_back(2.0 * a);
  }
  const auto wide = build_lasso(data, 3.0, false);
  const EmpiricalProblem e3(wide.program, wide.scenarios, {});
  const auto s3 = solve_saa(e3, {.h = 0.01});
  CHECK(s3.x[0] == doctest::Approx(2.0));
  CHECK(s3.value == doctest::Approx(0.0).epsilon(1e-12));

  const auto tight = build_lasso(data, 1.0, false);
  const EmpiricalProblem e1(tight.program, tight.scenarios, {});
  const auto s1 = solve_saa(e1, {.h = 0.01});
  CHECK(s1.x[0] == doctest::Approx(1.0));
  double mx2 = 0.0;
  for (const auto& a : data.features) mx2 += a[0] * a[0];
  CHECK(s1.value == doctest::Approx(mx2 / 4.0));

  SolverConfig sg;
  sg.method = Method::switching_subgradient;
  sg.iterations = 50000;
  const auto sub = solve_saa(e1, sg);
  CHECK(sub.value <= s1.value + sg.tol_opt + 1e-9);

  LassoData four;
  four.features = {{2.0}, {-2.0}};
  four.responses = {1.0, 1.0};
  CHECK(build_lasso(four, 1.0, true).diagonal[0] == doctest::Approx(2.0));
  LassoData zero;
  zero.features = {{0.0, 1.0}, {0.0, 2.0}};
  zero.responses = {1.0, 2.0};
  CHECK_THROWS_AS(build_lasso(zero, 1.0, true), Error);
  CHECK_THROWS_AS(build_lasso(data, 0.0, false), Error);

  // weighted: recorded diagonal maps u back to beta
  const auto w = build_lasso(four, 1.0, true);
  CHECK(w.coefficients(std::vector<double>{1.0})[0] == doctest::Approx(0.5));
}

TEST_CASE("l1-ball projection is nearest among grid points") {
  const auto ball = SpaceDescriptor::ball({0, 0}, 1.0, Norm::l1);
  const auto grid = ball.grid(0.05);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Point x{u(rng), u(rng)};
    const Point p = ball.project(x);
    CHECK(std::abs(p[0]) + std::abs(p[1]) <= 1.0 + 1e-12);
    const double d = std::hypot(x[0] - p[0], x[1] - p[1]);
    for (const auto& g : grid) CHECK(std::hypot(x[0] - g[0], x[1] - g[1]) >= d - 1e-12);
  }
}

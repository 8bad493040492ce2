#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "saa/error.hpp"
#include "saa/moments.hpp"

using namespace saa;

namespace {

ScenarioFunction linear_xi() {
  return ScenarioFunction("xi*x", [](std::span<const double> x, std::span<const double> xi) {
    return xi[0] * x[0];
  });
}

ScenarioSet set_of(std::vector<double> v) {
  ScenarioSet s;
  for (double a : v) s.scenarios.push_back({a});
  return s;
}

// f(x) = m x, sigma^2(x) = v x^2 for F = xi x with E xi = m, Var xi = v.
std::shared_ptr<const TrueOracle> linear_oracle(double m, double v, std::optional<double> l = {}) {
  return std::make_shared<TrueOracle>(
      [m](std::size_t, std::span<const double> x) { return m * x[0]; },
      [v](std::size_t, std::span<const double> x) { return v * x[0] * x[0]; },
      std::vector<std::optional<double>>{l});
}

}  // namespace

TEST_CASE("Hoelder estimates from probe grids") {
  const StochasticProgram prog(SpaceDescriptor::box({0}, {1}), linear_xi());
  const std::vector<Point> probe{{0.0}, {1.0}};
  const auto est = estimate_holder(prog, 0, probe, set_of({1, -3}));
  CHECK(est.moduli == std::vector<double>{1.0, 3.0});
  CHECK(est.l_hat == doctest::Approx(std::sqrt(5.0)));

  const StochasticProgram flat(SpaceDescriptor::box({0}, {1}),
                               ScenarioFunction("c", [](std::span<const double>, std::span<const double> xi) {
                                 return xi[0];
                               }));
  CHECK(estimate_holder(flat, 0, probe, set_of({1, 5})).l_hat == 0.0);

  const StochasticProgram sq(SpaceDescriptor::box({0}, {1}),
                             ScenarioFunction("x2", [](std::span<const double> x, std::span<const double>) {
                               return x[0] * x[0];
                             }));
  CHECK(estimate_holder(sq, 0, probe, set_of({0.3})).l_hat == doctest::Approx(1.0));

  CHECK_THROWS_AS(estimate_holder(prog, 0, std::vector<Point>{{0.5}, {0.5}}, set_of({1})), Error);
}

TEST_CASE("Hoelder estimate grows under grid refinement") {
  const StochasticProgram sq(SpaceDescriptor::box({0}, {1}),
                             ScenarioFunction("x2", [](std::span<const double> x, std::span<const double> xi) {
                               return x[0] * x[0] * xi[0];
                             }));
  const auto s = set_of({0.5, 1.2, -2.0});
  double prev = 0.0;
  for (int n : {1, 2, 4, 8, 16}) {
    const auto grid = SpaceDescriptor::box({0}, {1}).grid(1.0 / n);
    const double l = estimate_holder(sq, 0, grid, s).l_hat;
    CHECK(l >= prev - 1e-15);
    prev = l;
  }
}

TEST_CASE("pointwise variances") {
  ProgramOptions opt;
  opt.oracle = linear_oracle(2.0, 1.0);
  auto prog = std::make_shared<StochasticProgram>(SpaceDescriptor::box({0}, {1}), linear_xi(),
                                                  std::vector<ScenarioFunction>{}, opt);
  const auto emp = build_empirical(prog, set_of({1, 3}), {});
  const auto v = pointwise_variance(emp, 0, std::vector<double>{1.0});
  CHECK(v.sigma_hat_sq == doctest::Approx(1.0));
  CHECK(v.sigma_sq == doctest::Approx(1.0));
  CHECK(v.breve == doctest::Approx(std::sqrt(2.0)));
  CHECK(v.breve >= std::max(std::sqrt(v.sigma_hat_sq), std::sqrt(v.sigma_sq)) / std::sqrt(2.0));
  CHECK(v.breve <= std::sqrt(v.sigma_hat_sq) + std::sqrt(v.sigma_sq) + 1e-15);

  // duplicated scenario list leaves the empirical variance unchanged
  const auto dup = build_empirical(prog, set_of({1, 3, 1, 3}), {});
  CHECK(pointwise_variance(dup, 0, std::vector<double>{0.7}).sigma_hat_sq ==
        doctest::Approx(pointwise_variance(emp, 0, std::vector<double>{0.7}).sigma_hat_sq));

  // deterministic integrand
  ProgramOptions det;
  det.oracle = std::make_shared<TrueOracle>([](std::size_t, std::span<const double> x) { return x[0] * x[0]; },
                                            [](std::size_t, std::span<const double>) { return 0.0; });
  auto dprog = std::make_shared<StochasticProgram>(
      SpaceDescriptor::box({0}, {1}),
      ScenarioFunction("x2", [](std::span<const double> x, std::span<const double>) { return x[0] * x[0]; })
          .scenario_free(),
      std::vector<ScenarioFunction>{}, det);
  const auto demp = build_empirical(dprog, set_of({4, 5}), {});
  for (double x : {0.0, 0.3, 1.0}) CHECK(pointwise_variance(demp, 0, std::vector<double>{x}).sigma_hat_sq == 0.0);

  auto bare = std::make_shared<StochasticProgram>(SpaceDescriptor::box({0}, {1}), linear_xi());
  const auto bemp = build_empirical(bare, set_of({1}), {});
  try {
    pointwise_variance(bemp, 0, std::vector<double>{0.5});
    FAIL("expected missing oracle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_oracle);
  }
}

TEST_CASE("set variance assembly") {
  CHECK(sigma_set(2.0, 3.0, 4.0) == doctest::Approx(10.0));
  CHECK(sigma_set(3.0, 3.0, 4.0) >= sigma_set(2.0, 3.0, 4.0));
  CHECK(sigma_set(2.0, 3.5, 4.0) >= sigma_set(2.0, 3.0, 4.0));
  CHECK(sigma_set(2.0, 3.0, 4.5) >= sigma_set(2.0, 3.0, 4.0));
}

TEST_CASE("variance profile entries") {
  ProgramOptions opt;
  opt.oracle = linear_oracle(0.0, 3.0, std::sqrt(3.0));
  auto cons = ScenarioFunction("xi*x-0.5", [](std::span<const double> x, std::span<const double> xi) {
    return xi[0] * x[0] - 0.5;
  });
  opt.oracle = std::make_shared<TrueOracle>(
      [](std::size_t i, std::span<const double> x) { return i == 0 ? 0.0 : -0.5 + 0.0 * x[0]; },
      [](std::size_t, std::span<const double> x) { return 3.0 * x[0] * x[0]; },
      std::vector<std::optional<double>>{std::sqrt(3.0), std::sqrt(3.0)});
  auto prog = std::make_shared<StochasticProgram>(SpaceDescriptor::box({0}, {1}), linear_xi(),
                                                  std::vector<ScenarioFunction>{cons}, opt);
  const auto emp = build_empirical(prog, set_of({1, -2, 0.5}), {0.0});
  ProfileRequest req;
  req.probe = prog->hard_set().grid(0.25);
  req.anchors["z"] = {0.5};
  req.sets["Y"] = prog->hard_set().grid(0.01);
  const auto res = variance_profile(emp, req);
  REQUIRE(res.profile.find("sigma0(Y)"));
  REQUIRE(res.profile.find("sigmaI(Y)"));
  REQUIRE(res.profile.find("breve0(z)"));
  REQUIRE(res.profile.find("breveI(z)"));
  CHECK(res.holder[0].l_hat == doctest::Approx(std::sqrt((1 + 4 + 0.25) / 3.0)));
  const double a = a_alpha(req.sets["Y"], Norm::linf, 1.0).value;
  CHECK(res.profile.find("sigma0(Y)")->value == doctest::Approx(sigma_set(a, res.holder[0].l_hat, std::sqrt(3.0))));
  for (const auto& [k, e] : res.profile.entries) CHECK(e.value >= 0.0);
}

TEST_CASE("self-normalized statistic") {
  const std::vector<double> c{2, 2, 2};
  CHECK(self_normalized(c, 2.0, 0.0).value == 0.0);
  const std::vector<double> g{1, 1, 1, 0};
  const auto s = self_normalized(g, 0.5, 0.25);
  CHECK(s.numerator == doctest::Approx(0.25));
  CHECK(s.denominator == doctest::Approx(0.35355339));
  CHECK(s.value == doctest::Approx(0.70710678));
  std::vector<double> g2;
  for (double v : g) g2.push_back(5 * v + 7);
  CHECK(self_normalized(g2, 5 * 0.5 + 7, 25 * 0.25).value == doctest::Approx(s.value));
  CHECK_THROWS_AS(self_normalized(std::vector<double>{}, 0.0, 1.0), Error);
}

TEST_CASE("self-normalized affine invariance on random data") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> g(20);
    for (auto& v : g) v = n(rng);
    double a = u(rng);
    if (std::abs(a) < 1e-3) a = 1.0;
    const double b = u(rng);
    std::vector<double> t;
    for (double v : g) t.push_back(a * v + b);
    const double base = self_normalized(g, 0.0, 1.0).value;
    CHECK(self_normalized(t, b, a * a).value == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("Panchenko statistic") {
  const std::vector<ScenarioMap> family{[](std::span<const double> xi) { return xi[0]; },
                                        [](std::span<const double> xi) { return -xi[0]; }};
  const std::vector<Scenario> xi{{1.0}, {2.0}};
  Rng rng(5);
  Sampler zero = [](Rng&) { return Scenario{0.0}; };
  const auto st = panchenko(family, xi, zero, rng, 64);
  CHECK(st.s == 3.0);
  CHECK(st.v_hat == 5.0);
  CHECK(st.resamples == 64);
}

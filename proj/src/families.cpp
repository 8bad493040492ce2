#include "saa/families.hpp"

#include <cmath>
#include <numbers>

#include "saa/error.hpp"

namespace saa {

namespace {

constexpr double kDiscScale = 0.5;
constexpr double kDiscMargin = 0.25;  // eps_ring at the Slater point 0

// E |X| for X ~ t(3) is 2 sqrt(3) / pi.
constexpr double kT3AbsMean = 2.0 * 1.7320508075688772 / std::numbers::pi;

std::vector<Point> interval_grid(double lo, double hi, double h) {
  return SpaceDescriptor::box({lo}, {hi}).grid(h);
}

CoverageFamily quadratic_family(bool noisy) {
  auto f0 = ScenarioFunction("(x-0.3)^2+xi*x",
                             [](std::span<const double> x, std::span<const double> xi) {
                               return (x[0] - 0.3) * (x[0] - 0.3) + xi[0] * x[0];
                             })
                .with_affine({[](std::span<const double> x) { return (x[0] - 0.3) * (x[0] - 0.3); },
                              [](std::span<const double> x, std::span<double> c) { c[0] = x[0]; }})
                .with_subgradient([](std::span<const double> x, std::span<const double> xi, std::span<double> g) {
                  g[0] = 2.0 * (x[0] - 0.3) + xi[0];
                })
                .convex();
  const Distribution law = noisy ? Distribution::student_t(3.0) : Distribution::point_mass(0.0);
  const double var = law.variance();
  auto oracle = std::make_shared<TrueOracle>(
      [](std::size_t, std::span<const double> x) { return (x[0] - 0.3) * (x[0] - 0.3); },
      [var](std::size_t, std::span<const double> x) { return var * x[0] * x[0]; },
      std::vector<std::optional<double>>{}, SolutionData{.optimal_value = 0.0, .minimizer = Point{0.3}});
  ProgramOptions opt;
  opt.name = noisy ? "quadratic-1d" : "scenario-free";
  opt.scenario_dim = 1;
  opt.convex = true;
  opt.oracle = oracle;
  if (!noisy) {
    f0 = ScenarioFunction("(x-0.3)^2",
                          [](std::span<const double> x, std::span<const double>) {
                            return (x[0] - 0.3) * (x[0] - 0.3);
                          })
             .with_subgradient([](std::span<const double> x, std::span<const double>, std::span<double> g) {
               g[0] = 2.0 * (x[0] - 0.3);
             })
             .scenario_free()
             .convex();
  }
  auto prog = std::make_shared<StochasticProgram>(SpaceDescriptor::box({0}, {1}), f0,
                                                  std::vector<ScenarioFunction>{}, opt);
  CoverageFamily fam;
  fam.name = opt.name;
  fam.theorem = Theorem::fixed;
  fam.item = "i";
  fam.event = "near-optimal";
  fam.program = prog;
  fam.sampler = iid_sampler(law, 1);
  // sigma_0(X) = A_1([0,1]) sqrt(L_hat^2 + L^2) with L(xi) <= |xi| + 1.4 on [0, 1]
  const double a = a_alpha(prog->hard_set(), 1.0).value;
  const double l2 = noisy ? var + 2.8 * kT3AbsMean + 1.96 : 1.96;
  fam.sigma = noisy ? a * std::sqrt(2.0 * l2) : 0.0;
  fam.sigma_note = noisy ? "A_1([0,1]) sqrt(2 E(|xi| + 1.4)^2)" : "scenario-free: 0";
  fam.grid = interval_grid(0.0, 1.0, 0.001);
  return fam;
}

CoverageFamily disc_family(bool interior) {
  const double s2 = kDiscScale * kDiscScale * 3.0;  // Var(0.5 t(3))
  auto f0 = ScenarioFunction("(x1-1)^2+(x2-0.5)^2+xi1*x2",
                             [](std::span<const double> x, std::span<const double> xi) {
                               return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 0.5) * (x[1] - 0.5) + xi[0] * x[1];
                             })
                .with_affine({[](std::span<const double> x) {
                                return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 0.5) * (x[1] - 0.5);
                              },
                              [](std::span<const double> x, std::span<double> c) {
                                c[0] = x[1];
                                c[1] = 0.0;
                              }})
                .with_subgradient([](std::span<const double> x, std::span<const double> xi, std::span<double> g) {
                  g[0] = 2.0 * (x[0] - 1.0);
                  g[1] = 2.0 * (x[1] - 0.5) + xi[0];
                })
                .convex();
  auto f1 = ScenarioFunction("|x|^2-0.25+<xi,x>",
                             [](std::span<const double> x, std::span<const double> xi) {
                               return x[0] * x[0] + x[1] * x[1] - kDiscMargin + xi[0] * x[0] + xi[1] * x[1];
                             })
                .with_affine({[](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] - kDiscMargin; },
                              [](std::span<const double> x, std::span<double> c) {
                                c[0] = x[0];
                                c[1] = x[1];
                              }})
                .with_subgradient([](std::span<const double> x, std::span<const double> xi, std::span<double> g) {
                  g[0] = 2.0 * x[0] + xi[0];
                  g[1] = 2.0 * x[1] + xi[1];
                })
                .convex();
  auto oracle = std::make_shared<TrueOracle>(
      [](std::size_t i, std::span<const double> x) {
        if (i == 0) return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 0.5) * (x[1] - 0.5);
        return x[0] * x[0] + x[1] * x[1] - kDiscMargin;
      },
      [s2](std::size_t i, std::span<const double> x) {
        return i == 0 ? s2 * x[1] * x[1] : s2 * (x[0] * x[0] + x[1] * x[1]);
      },
      std::vector<std::optional<double>>{},
      SolutionData{.slater_point = Point{0.0, 0.0}, .slater_margin = kDiscMargin});
  ProgramOptions opt;
  opt.name = interior ? "disc-interior" : "disc-exterior";
  opt.scenario_dim = 2;
  opt.convex = true;
  opt.oracle = oracle;
  auto prog = std::make_shared<StochasticProgram>(SpaceDescriptor::box({-1, -1}, {1, 1}, Norm::l2), f0,
                                                  std::vector<ScenarioFunction>{f1}, opt);
  CoverageFamily fam;
  fam.name = opt.name;
  fam.program = prog;
  fam.sampler = iid_sampler(Distribution::student_t(3.0, kDiscScale), 2);
  fam.item = "i";
  fam.grid = prog->hard_set().grid(0.02);
  // E|xi|_2^2 = 2 Var(xi_k)
  const double xi_sq = 2.0 * s2;
  if (interior) {
    // sigma_I(0) over the circle {f_1 = 0}, where F_1 differences are <xi, x - y>
    fam.theorem = Theorem::interior;
    fam.event = "interior";
    fam.slater_margin = kDiscMargin;
    std::vector<Point> circle;
    for (int k = 0; k < 64; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 64.0;
      circle.push_back({0.5 * std::cos(a), 0.5 * std::sin(a)});
    }
    fam.sigma = a_alpha(circle, Norm::l2, 1.0).value * std::sqrt(2.0 * xi_sq);
    fam.sigma_note = "A_1(circle) sqrt(2 E|xi|^2); breve sigma_1 vanishes at y = z = 0";
  } else {
    // convex variant: sigma_I(2 eps) over the circle {f_1 = 2 eps}
    fam.theorem = Theorem::exterior;
    fam.event = "exterior";
    fam.convex_variant = true;
    const double scale = std::sqrt(2.0 * xi_sq);
    fam.sigma_at = [scale](double eps) {
      const double r = std::sqrt(kDiscMargin + 2.0 * eps);
      std::vector<Point> ring;
      for (int k = 0; k < 64; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 64.0;
        ring.push_back({r * std::cos(a), r * std::sin(a)});
      }
      return a_alpha(ring, Norm::l2, 1.0).value * scale;
    };
    fam.sigma = fam.sigma_at(0.1);
    fam.sigma_note = "A_1({f_1 = 2 eps}) sqrt(2 E|xi|^2); breve sigma_1 vanishes at y = z = 0";
  }
  return fam;
}

}  // namespace

std::vector<std::string> family_names() { return {"scenario-free", "quadratic-1d", "disc-exterior", "disc-interior"}; }

CoverageFamily family_by_name(const std::string& name) {
  if (name == "scenario-free") return quadratic_family(false);
  if (name == "quadratic-1d") return quadratic_family(true);
  if (name == "disc-exterior") return disc_family(false);
  if (name == "disc-interior") return disc_family(true);
  fail(ErrorKind::invalid_argument, "unknown family '" + name + "'");
}

std::shared_ptr<const StochasticProgram> simplex_linear_program(std::size_t d, Distribution law,
                                                                std::size_t modulus_budget,
                                                                std::uint64_t modulus_seed) {
  require(d >= 1, ErrorKind::invalid_argument, "simplex dimension must be >= 1");
  auto f = ScenarioFunction("<xi,x>",
                            [](std::span<const double> x, std::span<const double> xi) {
                              double v = 0.0;
                              for (std::size_t k = 0; k < x.size(); ++k) v += xi[k] * x[k];
                              return v;
                            })
               .with_affine({[](std::span<const double>) { return 0.0; },
                             [](std::span<const double> x, std::span<double> c) {
                               for (std::size_t k = 0; k < x.size(); ++k) c[k] = x[k];
                             }})
               .with_subgradient([](std::span<const double>, std::span<const double> xi, std::span<double> g) {
                 for (std::size_t k = 0; k < g.size(); ++k) g[k] = xi[k];
               })
               .convex();
  // P L^2 with L(xi) = max_{a,b} |xi_a - xi_b| / 2, the l1 modulus on the simplex
  Rng rng = derived_rng(modulus_seed, 0);
  double acc = 0.0;
  for (std::size_t j = 0; j < modulus_budget; ++j) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < d; ++k) {
      const double v = law.sample(rng);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    acc += 0.25 * (hi - lo) * (hi - lo);
  }
  const double modulus = modulus_budget > 0 ? std::sqrt(acc / static_cast<double>(modulus_budget)) : 0.0;
  const double mu = law.mean(), var = law.variance();
  auto oracle = std::make_shared<TrueOracle>(
      [mu](std::size_t, std::span<const double> x) {
        double v = 0.0;
        for (double a : x) v += mu * a;
        return v;
      },
      [var](std::size_t, std::span<const double> x) {
        double v = 0.0;
        for (double a : x) v += var * a * a;
        return v;
      },
      std::vector<std::optional<double>>{modulus});
  ProgramOptions opt;
  opt.name = "simplex-linear";
  opt.scenario_dim = d;
  opt.convex = true;
  opt.oracle = oracle;
  opt.holder = {HolderSpec{1.0, modulus}};
  return std::make_shared<StochasticProgram>(SpaceDescriptor::simplex(d), f, std::vector<ScenarioFunction>{}, opt);
}

}  // namespace saa

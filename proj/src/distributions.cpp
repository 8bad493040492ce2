#include "saa/distributions.hpp"

#include <cmath>

#include "saa/error.hpp"

namespace saa {

Rng derived_rng(std::uint64_t base, std::uint64_t index) {
  const std::uint64_t seed = base ^ index;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

Distribution Distribution::student_t(double dof, double scale) {
  require(dof > 2.0, ErrorKind::invalid_argument, "student-t needs dof > 2 for a finite variance");
  return {DistributionKind::student_t, dof, scale, false};
}

Distribution Distribution::lognormal(double log_mean, double log_sd) {
  require(log_sd >= 0.0, ErrorKind::invalid_argument, "lognormal log-sd must be >= 0");
  return {DistributionKind::lognormal, log_mean, log_sd, false};
}

Distribution Distribution::pareto(double shape, double scale) {
  require(shape > 2.0 && scale > 0.0, ErrorKind::invalid_argument,
          "pareto needs shape > 2 and scale > 0");
  return {DistributionKind::pareto, shape, scale, false};
}

Distribution Distribution::gaussian(double mean, double sd) {
  require(sd >= 0.0, ErrorKind::invalid_argument, "gaussian sd must be >= 0");
  return {DistributionKind::gaussian, mean, sd, false};
}

Distribution Distribution::uniform(double lo, double hi) {
  require(lo <= hi, ErrorKind::invalid_argument, "uniform needs lo <= hi");
  return {DistributionKind::uniform, lo, hi, false};
}

Distribution Distribution::two_point(double lo, double hi) {
  return {DistributionKind::two_point, lo, hi, false};
}

Distribution Distribution::point_mass(double value) {
  return {DistributionKind::point_mass, value, value, false};
}

Distribution Distribution::as_centered() const {
  Distribution d = *this;
  d.centered = true;
  return d;
}

double Distribution::sample(Rng& rng) const {
  double v = 0.0;
  switch (kind) {
    case DistributionKind::student_t:
      v = b * std::student_t_distribution<double>(a)(rng);
      break;
    case DistributionKind::lognormal:
      v = std::lognormal_distribution<double>(a, b)(rng);
      break;
    case DistributionKind::pareto: {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      v = b * std::pow(1.0 - u, -1.0 / a);
      break;
    }
    case DistributionKind::gaussian:
      v = std::normal_distribution<double>(a, b)(rng);
      break;
    case DistributionKind::uniform:
      v = std::uniform_real_distribution<double>(a, b)(rng);
      break;
    case DistributionKind::two_point:
      v = std::bernoulli_distribution(0.5)(rng) ? b : a;
      break;
    case DistributionKind::point_mass:
      v = a;
      break;
  }
  if (!centered) return v;
  return v - (Distribution{kind, a, b, false}).mean();
}

double Distribution::mean() const {
  if (centered) return 0.0;
  switch (kind) {
    case DistributionKind::student_t: return 0.0;
    case DistributionKind::lognormal: return std::exp(a + 0.5 * b * b);
    case DistributionKind::pareto: return a * b / (a - 1.0);
    case DistributionKind::gaussian: return a;
    case DistributionKind::uniform:
    case DistributionKind::two_point: return 0.5 * (a + b);
    case DistributionKind::point_mass: return a;
  }
  return 0.0;
}

double Distribution::variance() const {
  switch (kind) {
    case DistributionKind::student_t: return b * b * a / (a - 2.0);
    case DistributionKind::lognormal: return (std::exp(b * b) - 1.0) * std::exp(2.0 * a + b * b);
    case DistributionKind::pareto: return b * b * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
    case DistributionKind::gaussian: return b * b;
    case DistributionKind::uniform: return (b - a) * (b - a) / 12.0;
    case DistributionKind::two_point: return 0.25 * (b - a) * (b - a);
    case DistributionKind::point_mass: return 0.0;
  }
  return 0.0;
}

std::string Distribution::name() const {
  std::string base;
  switch (kind) {
    case DistributionKind::student_t: base = "student_t"; break;
    case DistributionKind::lognormal: base = "lognormal"; break;
    case DistributionKind::pareto: base = "pareto"; break;
    case DistributionKind::gaussian: base = "gaussian"; break;
    case DistributionKind::uniform: base = "uniform"; break;
    case DistributionKind::two_point: base = "two_point"; break;
    case DistributionKind::point_mass: base = "point_mass"; break;
  }
  return centered ? base + "_centered" : base;
}

Distribution distribution_from_name(const std::string& name) {
  if (name == "student_t3" || name == "t3") return Distribution::student_t(3.0);
  if (name == "lognormal") return Distribution::lognormal(0.0, 1.0).as_centered();
  if (name == "pareto") return Distribution::pareto(2.5).as_centered();
  if (name == "gaussian") return Distribution::gaussian(0.0, 1.0);
  if (name == "uniform") return Distribution::uniform(-1.0, 1.0);
  if (name == "bernoulli") return Distribution::two_point(0.0, 1.0);
  if (name == "point_mass" || name == "deterministic") return Distribution::point_mass(0.0);
  fail(ErrorKind::invalid_argument, "unknown distribution '" + name + "'");
}

Sampler iid_sampler(Distribution law, std::size_t dim) {
  return [law, dim](Rng& rng) {
    Scenario xi(dim);
    for (auto& v : xi) v = law.sample(rng);
    return xi;
  };
}

}  // namespace saa

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "saa/geometry.hpp"

namespace saa {

using Rng = std::mt19937_64;
using Scenario = std::vector<double>;
using Sampler = std::function<Scenario(Rng&)>;

// Seed of replication `index` under `base`: base XOR index, spread through a
// seed sequence so neighbouring indices give unrelated streams.
Rng derived_rng(std::uint64_t base, std::uint64_t index);

enum class DistributionKind { student_t, lognormal, pareto, gaussian, uniform, two_point, point_mass };

// Univariate law with closed-form first two moments.
//   student_t:  dof = a (> 2), scaled by b
//   lognormal:  log-mean a, log-sd b
//   pareto:     shape a (> 2), scale b; centred draws subtract the mean
//   gaussian:   mean a, sd b
//   uniform:    on [a, b]
//   two_point:  a or b with probability 1/2 each
//   point_mass: a
struct Distribution {
  DistributionKind kind = DistributionKind::gaussian;
  double a = 0.0;
  double b = 1.0;
  bool centered = false;  // subtract the mean from every draw

  static Distribution student_t(double dof, double scale = 1.0);
  static Distribution lognormal(double log_mean, double log_sd);
  static Distribution pareto(double shape, double scale = 1.0);
  static Distribution gaussian(double mean, double sd);
  static Distribution uniform(double lo, double hi);
  static Distribution two_point(double lo, double hi);
  static Distribution point_mass(double value);

  Distribution as_centered() const;

  double sample(Rng& rng) const;
  double mean() const;
  double variance() const;
  std::string name() const;
};

Distribution distribution_from_name(const std::string& name);

// Scenario of `dim` independent draws from `law`.
Sampler iid_sampler(Distribution law, std::size_t dim);

}  // namespace saa

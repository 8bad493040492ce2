#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "saa/distributions.hpp"
#include "saa/problem.hpp"

namespace saa {

// min_t t + mean[(G - t)_+] / p, attained at the ceil((1 - p) N)-th order
// statistic (1-based, ties to the lower index).
double cvar(std::span<const double> losses, double p);
double cvar_objective(std::span<const double> losses, double p, double t);

struct ReturnsDataset {
  std::size_t d = 0;
  std::vector<std::string> assets;
  std::vector<Scenario> rows;  // N x d return rates
  std::string source;          // "csv:<path>" or "synthetic"
  std::uint64_t seed = 0;
  std::string distribution;
};

// Header row of asset names, then one row of d finite returns per scenario.
ReturnsDataset read_returns_csv(std::istream& in, const std::string& source = "csv");
ReturnsDataset read_returns_csv_file(const std::string& path);

// rows[j][k] = means[k] + scale * draw, draws iid from `law`.
ReturnsDataset synthetic_returns(std::vector<double> means, double scale, std::size_t n, Distribution law,
                                 std::uint64_t seed);

struct PortfolioProblem {
  ReturnsDataset dataset;
  double p = 1.0;
  double beta = 0.0;
  double t_lo = 0.0;  // min loss - 1
  double t_hi = 0.0;  // max loss + 1
  std::shared_ptr<const StochasticProgram> program;  // decision (x_1..x_d, t)
  ScenarioSet scenarios;
};

// min -mean R(x) over the simplex x t-box subject to t + mean[(-R - t)_+]/p - beta <= 0.
PortfolioProblem build_portfolio(const ReturnsDataset& dataset, double p, double beta);

struct LassoData {
  std::vector<Scenario> features;  // N x d
  std::vector<double> responses;
  std::string source;
  std::uint64_t seed = 0;
};

// Header of feature names plus a final response column.
LassoData read_lasso_csv(std::istream& in, const std::string& source = "csv");
LassoData read_lasso_csv_file(const std::string& path);
LassoData synthetic_lasso(std::vector<double> coefficients, std::size_t n, Distribution feature_law,
                          Distribution noise_law, std::uint64_t seed);

struct LassoProblem {
  double radius = 1.0;
  bool weighted = false;
  // diag(D_hat_2) = sqrt(mean a_k^2); decisions u = D_hat_2 beta live in the plain ball
  std::vector<double> diagonal;
  std::shared_ptr<const StochasticProgram> program;
  ScenarioSet scenarios;  // (a_1..a_d, y)

  // beta from the program's decision u
  std::vector<double> coefficients(std::span<const double> u) const;
};

LassoProblem build_lasso(const LassoData& data, double radius, bool weighted);

}  // namespace saa

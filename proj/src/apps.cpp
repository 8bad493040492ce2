#include "saa/apps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "saa/error.hpp"

namespace saa {

double cvar_objective(std::span<const double> losses, double p, double t) {
  double excess = 0.0;
  for (double g : losses) excess += std::max(g - t, 0.0);
  return t + excess / (p * static_cast<double>(losses.size()));
}

double cvar(std::span<const double> losses, double p) {
  require(!losses.empty(), ErrorKind::empty_sample, "CVaR of an empty sample");
  require(p > 0.0 && p <= 1.0, ErrorKind::invalid_argument, "CVaR level p must lie in (0, 1]");
  std::vector<double> sorted(losses.begin(), losses.end());
  std::stable_sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // guard (1 - p) N against rounding just above an integer
  const double pos = (1.0 - p) * n;
  auto k = static_cast<std::size_t>(std::ceil(pos - 1e-12 * std::max(1.0, pos)));
  if (k == 0) k = 1;
  const double t = sorted[std::min(k, sorted.size()) - 1];
  return cvar_objective(sorted, p, t);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& cell, std::size_t line) {
  require(!cell.empty(), ErrorKind::io, "missing entry on line " + std::to_string(line));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::io, "non-numeric entry '" + cell + "' on line " + std::to_string(line));
  }
  require(used == cell.size() && std::isfinite(v), ErrorKind::io,
          "bad entry '" + cell + "' on line " + std::to_string(line));
  return v;
}

// header + numeric table
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_table(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::io, "empty CSV");
  const auto header = split(line);
  require(!header.empty(), ErrorKind::io, "CSV header is empty");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    require(cells.size() == header.size(), ErrorKind::io,
            "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " columns, expected " +
                std::to_string(header.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, lineno));
    rows.push_back(std::move(row));
  }
  return {header, rows};
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::io, "cannot open '" + path + "'");
  return in;
}

}  // namespace

ReturnsDataset read_returns_csv(std::istream& in, const std::string& source) {
  auto [header, rows] = read_table(in);
  require(!rows.empty(), ErrorKind::empty_sample, "returns CSV has no scenarios");
  ReturnsDataset ds;
  ds.d = header.size();
  ds.assets = header;
  ds.rows = std::move(rows);
  ds.source = source;
  return ds;
}

ReturnsDataset read_returns_csv_file(const std::string& path) {
  auto in = open_file(path);
  return read_returns_csv(in, "csv:" + path);
}

ReturnsDataset synthetic_returns(std::vector<double> means, double scale, std::size_t n, Distribution law,
                                 std::uint64_t seed) {
  require(!means.empty(), ErrorKind::invalid_argument, "need at least one asset");
  require(n >= 1, ErrorKind::empty_sample, "need at least one scenario");
  ReturnsDataset ds;
  ds.d = means.size();
  for (std::size_t k = 0; k < ds.d; ++k) ds.assets.push_back("asset_" + std::to_string(k + 1));
  Rng rng = derived_rng(seed, 0);
  for (std::size_t j = 0; j < n; ++j) {
    Scenario row(ds.d);
    for (std::size_t k = 0; k < ds.d; ++k) row[k] = means[k] + scale * law.sample(rng);
    ds.rows.push_back(std::move(row));
  }
  ds.source = "synthetic";
  ds.seed = seed;
  ds.distribution = law.name();
  return ds;
}

PortfolioProblem build_portfolio(const ReturnsDataset& dataset, double p, double beta) {
  require(!dataset.rows.empty(), ErrorKind::empty_sample, "portfolio needs a nonempty dataset");
  require(p > 0.0 && p <= 1.0, ErrorKind::invalid_argument, "CVaR level p must lie in (0, 1]");
  require(std::isfinite(beta), ErrorKind::invalid_argument, "beta must be finite");
  const std::size_t d = dataset.d;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : dataset.rows) {
    require(row.size() == d, ErrorKind::dimension_mismatch, "dataset rows must have d entries");
    for (double r : row) {
      lo = std::min(lo, -r);
      hi = std::max(hi, -r);
    }
  }
  PortfolioProblem pp;
  pp.dataset = dataset;
  pp.p = p;
  pp.beta = beta;
  pp.t_lo = lo - 1.0;
  pp.t_hi = hi + 1.0;

  auto objective = ScenarioFunction("-R(x)",
                                    [d](std::span<const double> z, std::span<const double> xi) {
                                      double r = 0.0;
                                      for (std::size_t k = 0; k < d; ++k) r += xi[k] * z[k];
                                      return -r;
                                    })
                       .with_affine({[](std::span<const double>) { return 0.0; },
                                     [d](std::span<const double> z, std::span<double> c) {
                                       for (std::size_t k = 0; k < d; ++k) c[k] = -z[k];
                                     }})
                       .with_subgradient([d](std::span<const double>, std::span<const double> xi, std::span<double> g) {
                         for (std::size_t k = 0; k < d; ++k) g[k] = -xi[k];
                         g[d] = 0.0;
                       })
                       .convex();
  const double inv_p = 1.0 / p;
  auto constraint =
      ScenarioFunction("t+[-R-t]_+/p-beta",
                       [d, inv_p, beta](std::span<const double> z, std::span<const double> xi) {
                         double r = 0.0;
                         for (std::size_t k = 0; k < d; ++k) r += xi[k] * z[k];
                         return z[d] + inv_p * std::max(-r - z[d], 0.0) - beta;
                       })
          .with_subgradient([d, inv_p](std::span<const double> z, std::span<const double> xi, std::span<double> g) {
            double r = 0.0;
            for (std::size_t k = 0; k < d; ++k) r += xi[k] * z[k];
            // the kink takes the inactive branch
            const bool active = -r - z[d] > 0.0;
            for (std::size_t k = 0; k < d; ++k) g[k] = active ? -inv_p * xi[k] : 0.0;
            g[d] = active ? 1.0 - inv_p : 1.0;
          })
          .convex();
  ProgramOptions opt;
  opt.name = "portfolio";
  opt.scenario_dim = d;
  opt.convex = true;
  auto space = SpaceDescriptor::product({SpaceDescriptor::simplex(d, Norm::l2),
                                         SpaceDescriptor::box({pp.t_lo}, {pp.t_hi}, Norm::l2)},
                                        Norm::l2);
  pp.program = std::make_shared<StochasticProgram>(std::move(space), objective,
                                                   std::vector<ScenarioFunction>{constraint}, opt);
  pp.scenarios.scenarios = dataset.rows;
  pp.scenarios.seed = dataset.seed;
  return pp;
}

LassoData read_lasso_csv(std::istream& in, const std::string& source) {
  auto [header, rows] = read_table(in);
  require(header.size() >= 2, ErrorKind::io, "lasso CSV needs at least one feature and a response column");
  require(!rows.empty(), ErrorKind::empty_sample, "lasso CSV has no rows");
  LassoData data;
  for (auto& row : rows) {
    data.responses.push_back(row.back());
    row.pop_back();
    data.features.push_back(std::move(row));
  }
  data.source = source;
  return data;
}

LassoData read_lasso_csv_file(const std::string& path) {
  auto in = open_file(path);
  return read_lasso_csv(in, "csv:" + path);
}

LassoData synthetic_lasso(std::vector<double> coefficients, std::size_t n, Distribution feature_law,
                          Distribution noise_law, std::uint64_t seed) {
  require(!coefficients.empty(), ErrorKind::invalid_argument, "need at least one coefficient");
  require(n >= 1, ErrorKind::empty_sample, "need at least one observation");
  LassoData data;
  Rng rng = derived_rng(seed, 0);
  for (std::size_t j = 0; j < n; ++j) {
    Scenario a(coefficients.size());
    double y = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = feature_law.sample(rng);
      y += coefficients[k] * a[k];
    }
    data.features.push_back(std::move(a));
    data.responses.push_back(y + noise_law.sample(rng));
  }
  data.source = "synthetic";
  data.seed = seed;
  return data;
}

std::vector<double> LassoProblem::coefficients(std::span<const double> u) const {
  std::vector<double> beta(u.begin(), u.end());
  for (std::size_t k = 0; k < beta.size(); ++k) beta[k] /= diagonal[k];
  return beta;
}

LassoProblem build_lasso(const LassoData& data, double radius, bool weighted) {
  require(radius > 0.0 && std::isfinite(radius), ErrorKind::invalid_argument, "lasso radius must be > 0");
  require(!data.features.empty() && data.features.size() == data.responses.size(), ErrorKind::empty_sample,
          "lasso needs matching nonempty features and responses");
  const std::size_t d = data.features.front().size();
  require(d >= 1, ErrorKind::invalid_argument, "lasso needs at least one feature");
  LassoProblem lp;
  lp.radius = radius;
  lp.weighted = weighted;
  lp.diagonal.assign(d, 1.0);
  if (weighted) {
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (const auto& a : data.features) s += a[k] * a[k];
      lp.diagonal[k] = std::sqrt(s / static_cast<double>(data.features.size()));
      require(lp.diagonal[k] > 0.0, ErrorKind::degenerate,
              "feature " + std::to_string(k + 1) + " has zero second moment; D_hat_2 weighting is undefined");
    }
  }
  for (std::size_t j = 0; j < data.features.size(); ++j) {
    require(data.features[j].size() == d, ErrorKind::dimension_mismatch, "feature rows must have equal length");
    Scenario s = data.features[j];
    s.push_back(data.responses[j]);
    lp.scenarios.scenarios.push_back(std::move(s));
  }
  lp.scenarios.seed = data.seed;
  const std::vector<double> inv = [&] {
    std::vector<double> v(d);
    for (std::size_t k = 0; k < d; ++k) v[k] = 1.0 / lp.diagonal[k];
    return v;
  }();
  auto loss = ScenarioFunction("(y-<a,beta>)^2",
                               [d, inv](std::span<const double> u, std::span<const double> xi) {
                                 double pred = 0.0;
                                 for (std::size_t k = 0; k < d; ++k) pred += xi[k] * inv[k] * u[k];
                                 const double r = xi[d] - pred;
                                 return r * r;
                               })
                  .with_subgradient([d, inv](std::span<const double> u, std::span<const double> xi, std::span<double> g) {
                    double pred = 0.0;
                    for (std::size_t k = 0; k < d; ++k) pred += xi[k] * inv[k] * u[k];
                    const double r = xi[d] - pred;
                    for (std::size_t k = 0; k < d; ++k) g[k] = -2.0 * r * xi[k] * inv[k];
                  })
                  .convex();
  ProgramOptions opt;
  opt.name = weighted ? "lasso-weighted" : "lasso";
  opt.scenario_dim = d + 1;
  opt.convex = true;
  lp.program = std::make_shared<StochasticProgram>(SpaceDescriptor::ball(Point(d, 0.0), radius, Norm::l1), loss,
                                                   std::vector<ScenarioFunction>{}, opt);
  return lp;
}

}  // namespace saa

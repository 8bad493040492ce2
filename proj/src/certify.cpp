#include "saa/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "saa/error.hpp"

namespace saa {

namespace {

// Inequality checks carry the same slack as set membership.
bool leq(double a, double b) { return a <= b + kSetTolerance; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::fixed: return "fixed";
    case Theorem::exterior: return "exterior";
    case Theorem::interior: return "interior";
  }
  return "fixed";
}

Theorem theorem_from_string(const std::string& name) {
  if (name == "fixed") return Theorem::fixed;
  if (name == "exterior") return Theorem::exterior;
  if (name == "interior") return Theorem::interior;
  fail(ErrorKind::invalid_argument, "unknown theorem '" + name + "' (expected fixed, exterior or interior)");
}

std::vector<std::string> guaranteed_events(Theorem theorem, const std::string& item) {
  require(item == "i" || item == "ii" || item == "iii" || item == "all", ErrorKind::invalid_argument,
          "theorem item must be i, ii, iii or all");
  std::vector<std::string> out;
  auto add = [&](std::initializer_list<const char*> ev) { out.insert(out.end(), ev.begin(), ev.end()); };
  switch (theorem) {
    case Theorem::fixed:
      require(item != "iii", ErrorKind::invalid_argument, "the fixed-set theorem has items i and ii");
      if (item == "i" || item == "all") add({"X̂*_ε ⊆ X*_{2ε}"});
      if (item == "ii" || item == "all") add({"f* − 2ε ≤ F̂*", "F̂* ≤ f* + ε"});
      break;
    case Theorem::exterior:
      add({"X̂ ⊆ X_{2ε} ⊆ X̆_{2cε}"});
      if (item != "i") add({"D(X̂, X) ≤ 2cε", "f(x̂) ≤ f* + 2ε for all x̂ ∈ X̂*_ε"});
      if (item == "iii" || item == "all") add({"F̂* ≤ f* + ε", "f* ≤ F̂* + ε + Gap(2ε)"});
      break;
    case Theorem::interior:
      add({"X̂ ⊆ X"});
      if (item != "i") add({"X̂*_ε ⊆ X*_{2ε+gap(2ε)}"});
      if (item == "iii" || item == "all") add({"F̂* ≤ f* + ε + gap(2ε)", "f* ≤ F̂* + 2ε"});
      break;
  }
  return out;
}

Certificate sample_size(Theorem theorem, double sigma, double eps, double p, std::size_t m,
                        double constant, std::optional<double> slater_margin, const std::string& item) {
  require(eps > 0.0 && std::isfinite(eps), ErrorKind::invalid_argument, "eps must be > 0");
  require(p > 0.0 && p <= 1.0, ErrorKind::invalid_argument, "p must lie in (0, 1]");
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorKind::invalid_argument, "sigma must be >= 0");
  require(constant > 0.0 && std::isfinite(constant), ErrorKind::invalid_argument, "C must be > 0");
  Certificate cert;
  cert.theorem = theorem;
  cert.item = item;
  cert.eps = eps;
  cert.p = p;
  cert.m = m;
  cert.constant = constant;
  cert.sigma = sigma;
  cert.slater_margin = slater_margin;
  cert.events = guaranteed_events(theorem, item);

  double log_term = std::log(1.0 / p);
  if (theorem != Theorem::fixed) {
    require(m >= 1, ErrorKind::invalid_argument, "perturbed-constraint theorems need m >= 1");
    log_term += std::log(static_cast<double>(m));
  }
  if (theorem == Theorem::exterior) cert.relaxation = eps;
  if (theorem == Theorem::interior) {
    require(slater_margin.has_value(), ErrorKind::slater_margin,
            "interior certificates need the Slater margin eps_ring(x_bar)");
    require(*slater_margin > 0.0, ErrorKind::slater_margin, "Slater margin must be > 0");
    if (eps > *slater_margin / 2.0) {
      fail(ErrorKind::slater_margin, "interior theorem needs eps <= eps_ring/2: eps = " + fmt(eps) +
                                         ", eps_ring/2 = " + fmt(*slater_margin / 2.0));
    }
    cert.relaxation = -eps;
  }
  const double raw = constant * sigma * sigma * log_term / (eps * eps);
  // Rounding noise in C sigma^2 log(.) / eps^2 must not push an integer up.
  const double value = std::ceil(raw - 1e-12 * std::max(1.0, raw));
  if (!(value < 9.0e15)) {
    throw Error(ErrorKind::budget, "required sample size overflows (" + fmt(raw) + ")");
  }
  cert.n_required = std::max<std::size_t>(1, static_cast<std::size_t>(std::max(0.0, value)));
  return cert;
}

std::vector<std::string> sigma_keys(Theorem theorem, const std::string& item, bool convex) {
  (void)guaranteed_events(theorem, item);
  std::vector<std::string> keys;
  switch (theorem) {
    case Theorem::fixed:
      keys = {"sigma0(X)"};
      if (item != "i") keys.insert(keys.end(), {"breve0(z)", "breve0(x*)"});
      break;
    case Theorem::exterior:
      if (convex) {
        keys = {"sigmaI(2eps)", "breveI(y)", "breveI(z)"};
      } else {
        keys = {"sigmaI(Y)", "breveI(z)"};
      }
      if (item != "i") keys.insert(keys.end(), {"breveI(x*)", "sigma0(Xbreve)"});
      if (item == "iii" || item == "all") keys.push_back("breve0(x*)");
      break;
    case Theorem::interior:
      keys = {"sigmaI(0)", "breveI(y)", "breveI(z)"};
      // Point-anchored terms at y* enter through breve sigma, as in the proof.
      if (item != "i") keys.insert(keys.end(), {"breveI(y*)", "sigma0(X)"});
      if (item == "iii" || item == "all") keys.push_back("breve0(y*)");
      break;
  }
  return keys;
}

SigmaAggregate aggregate_sigma(Theorem theorem, const std::string& item, bool convex,
                               const VarianceProfile& profile) {
  SigmaAggregate agg;
  agg.keys = sigma_keys(theorem, item, convex);
  for (const auto& key : agg.keys) {
    const auto entry = profile.find(key);
    require(entry.has_value(), ErrorKind::missing_entry, "variance profile lacks entry '" + key + "'");
    agg.value = std::max(agg.value, entry->value);
  }
  return agg;
}

std::string to_string(RegularityProvenance p) {
  switch (p) {
    case RegularityProvenance::robinson: return "robinson";
    case RegularityProvenance::declared: return "declared";
    case RegularityProvenance::grid_estimated: return "grid-estimated";
  }
  return "declared";
}

RegularityInfo robinson_constant(double diameter, double slater_margin) {
  require(diameter > 0.0 && std::isfinite(diameter), ErrorKind::invalid_argument,
          "Robinson constant needs D(X) > 0");
  require(slater_margin > 0.0 && std::isfinite(slater_margin), ErrorKind::slater_margin,
          "Robinson constant needs a strictly feasible point (eps_ring > 0)");
  RegularityInfo info;
  info.c = diameter / slater_margin;
  info.slater_margin = slater_margin;
  info.provenance = RegularityProvenance::robinson;
  return info;
}

RegularityInfo estimate_regularity(const ConstraintView& view, std::span<const Point> grid, Norm norm,
                                   double cover) {
  require(cover >= 0.0, ErrorKind::invalid_argument, "grid cover radius must be >= 0");
  std::vector<Point> feasible;
  std::vector<std::pair<const Point*, double>> violated;
  for (const auto& x : grid) {
    const double v = view.count == 0 ? 0.0 : max_constraint(view, x);
    if (v <= kSetTolerance) {
      feasible.push_back(x);
    } else {
      violated.emplace_back(&x, v);
    }
  }
  require(!feasible.empty(), ErrorKind::infeasible, "feasible grid X is empty");
  RegularityInfo info;
  info.provenance = RegularityProvenance::grid_estimated;
  info.feasible_points = feasible.size();
  info.violated_points = violated.size();
  if (violated.empty()) {
    info.vacuous = true;
    return info;
  }
  for (const auto& [x, v] : violated) {
    const double ratio = positive_part(distance_to_set(*x, feasible, norm) - cover) / v;
    if (ratio > info.c) {
      info.c = ratio;
      info.witness = *x;
    }
  }
  return info;
}

RegularityInfo estimate_regularity(const StochasticProgram& program, double h, std::size_t budget) {
  const SpaceDescriptor& y = program.hard_set();
  const auto grid = y.grid(h, budget);
  const double d = static_cast<double>(y.dimension());
  const double cell = y.norm() == Norm::linf ? h : (y.norm() == Norm::l2 ? h * std::sqrt(d) : h * d);
  RegularityInfo info = estimate_regularity(true_constraints(program), grid, y.norm(), cell);
  const auto& sol = program.oracle().solution();
  info.slater_point = sol.slater_point;
  info.slater_margin = sol.slater_margin;
  return info;
}

namespace {

// min over z in `centers` of the Hoelder ratio sup over B[z, radius] of f.
double local_modulus(std::span<const Point> grid, std::span<const double> values,
                     const std::vector<std::size_t>& centers, double radius, double alpha, Norm norm) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t zc : centers) {
    std::vector<std::size_t> ball;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (distance(grid[k], grid[zc], norm) <= radius + kSetTolerance) ball.push_back(k);
    }
    double sup = 0.0;
    for (std::size_t a = 0; a < ball.size() && sup < best; ++a) {
      for (std::size_t b = a + 1; b < ball.size(); ++b) {
        const double d = distance(grid[ball[a]], grid[ball[b]], norm);
        if (d <= 0.0) continue;
        sup = std::max(sup, std::abs(values[ball[a]] - values[ball[b]]) / std::pow(d, alpha));
      }
    }
    best = std::min(best, sup);
  }
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace

GapReport gap_bounds(const std::function<double(std::span<const double>)>& f, const ConstraintView& view,
                     std::span<const Point> grid, Norm norm, double gamma, double c, double alpha0,
                     const GapOptions& options) {
  require(gamma > 0.0, ErrorKind::invalid_argument, "Gap needs gamma > 0");
  require(c > 0.0, ErrorKind::invalid_argument, "regularity constant must be > 0");
  require(alpha0 > 0.0 && alpha0 <= 1.0, ErrorKind::invalid_argument, "alpha0 must lie in (0, 1]");
  require(!grid.empty(), ErrorKind::infeasible, "empty grid");
  GapReport rep;
  rep.gamma = gamma;
  rep.c = c;
  rep.alpha0 = alpha0;
  rep.grid_points = grid.size();

  std::vector<double> fv(grid.size()), gv(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    fv[k] = f(grid[k]);
    gv[k] = view.count == 0 ? -std::numeric_limits<double>::infinity() : max_constraint(view, grid[k]);
  }
  const double inf = std::numeric_limits<double>::infinity();
  double f_star = inf, min_relaxed = inf, min_interior = inf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (gv[k] <= kSetTolerance) f_star = std::min(f_star, fv[k]);
    if (gv[k] <= gamma + kSetTolerance) min_relaxed = std::min(min_relaxed, fv[k]);
    if (gv[k] <= -gamma + kSetTolerance) min_interior = std::min(min_interior, fv[k]);
  }
  require(std::isfinite(f_star), ErrorKind::infeasible, "feasible grid X is empty");
  rep.f_star = f_star;
  rep.min_relaxed = min_relaxed;
  rep.Gap = f_star - min_relaxed;

  const double tol = options.argmin_tolerance;
  std::vector<std::size_t> relaxed_argmin, argmin;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (gv[k] <= gamma + kSetTolerance && fv[k] <= min_relaxed + tol) relaxed_argmin.push_back(k);
    if (gv[k] <= kSetTolerance && fv[k] <= f_star + tol) argmin.push_back(k);
  }
  for (std::size_t k : relaxed_argmin) {
    if (gv[k] <= kSetTolerance) rep.Gap_zero = true;
  }
  if (rep.Gap_zero && tol == 0.0) rep.Gap = 0.0;
  rep.L_plus = local_modulus(grid, fv, relaxed_argmin, c * gamma, alpha0, norm);
  rep.Gap_bound = rep.L_plus * std::pow(c * gamma, alpha0);

  std::optional<double> c_int = options.c_interior;
  if (!c_int && options.slater_margin) {
    std::vector<Point> feasible;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (gv[k] <= kSetTolerance) feasible.push_back(grid[k]);
    }
    c_int = 2.0 * diameter(feasible, norm) / *options.slater_margin;
  }
  if (options.slater_margin) {
    require(gamma <= *options.slater_margin / 2.0 + kSetTolerance, ErrorKind::slater_margin,
            "gap needs gamma <= eps_ring / 2");
  }
  if (c_int && std::isfinite(min_interior)) {
    rep.c_interior = *c_int;
    rep.min_interior = min_interior;
    double gap = min_interior - f_star;
    for (std::size_t k : argmin) {
      if (gv[k] <= -gamma + kSetTolerance) rep.gap_zero = true;
    }
    if (rep.gap_zero && tol == 0.0) gap = 0.0;
    rep.gap = gap;
    rep.L_minus = local_modulus(grid, fv, argmin, *c_int * gamma, alpha0, norm);
    rep.gap_bound = *rep.L_minus * std::pow(*c_int * gamma, alpha0);
  } else if (c_int) {
    fail(ErrorKind::infeasible, "interior grid X_{-gamma} is empty at gamma = " + fmt(gamma));
  }
  return rep;
}

Perturbation perturbation(const EmpiricalProblem& empirical) {
  const StochasticProgram& program = empirical.program();
  const TrueOracle& oracle = program.oracle();
  Perturbation p;
  p.m = program.constraint_count();
  p.f = [&oracle](std::size_t i, std::span<const double> x) { return oracle.mean(i, x); };
  p.f_hat = [&empirical](std::size_t i, std::span<const double> x) { return empirical.value(i, x); };
  return p;
}

std::string level_key(double gamma) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", gamma == 0.0 ? 0.0 : gamma);
  return buf;
}

const std::vector<double>& DeviationLedger::at(const std::string& key) const {
  const auto it = entries.find(key);
  require(it != entries.end(), ErrorKind::missing_entry, "deviation ledger lacks entry '" + key + "'");
  return it->second;
}

DeviationLedger deviation_ledger(const Perturbation& data, const LedgerRequest& request) {
  const std::size_t m = data.m;
  DeviationLedger led;
  led.m = m;
  const auto& grid = request.y_grid;
  const double ninf = -std::numeric_limits<double>::infinity();

  // values[i][k] over the Y probe grid
  std::vector<std::vector<double>> fv(m + 1, std::vector<double>(grid.size()));
  std::vector<std::vector<double>> fh(m + 1, std::vector<double>(grid.size()));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      fv[i][k] = data.f(i, grid[k]);
      fh[i][k] = data.f_hat(i, grid[k]);
    }
  }
  std::vector<double> gmax(grid.size(), ninf);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 1; i <= m; ++i) gmax[k] = std::max(gmax[k], fv[i][k]);
  }

  if (!grid.empty() && m > 0) {
    std::vector<double> d(m, 0.0);
    for (std::size_t i = 1; i <= m; ++i) {
      for (std::size_t k = 0; k < grid.size(); ++k) d[i - 1] = std::max(d[i - 1], fv[i][k] - fh[i][k]);
    }
    led.entries["Delta(Y)"] = d;
    led.probe_size["Delta(Y)"] = grid.size();
  }

  for (const auto& [name, x] : request.anchors) {
    if (request.in_hard_set) {
      require(request.in_hard_set(x), ErrorKind::invalid_argument, "anchor '" + name + "' lies outside Y");
    }
    std::vector<double> f(m + 1), h(m + 1), lo(m + 1), hi(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      f[i] = data.f(i, x);
      h[i] = data.f_hat(i, x);
      lo[i] = positive_part(h[i] - f[i]);
      hi[i] = positive_part(f[i] - h[i]);
    }
    led.entries["f(" + name + ")"] = f;
    led.entries["Fhat(" + name + ")"] = h;
    led.entries["delta(" + name + ")"] = lo;
    led.entries["Delta(" + name + ")"] = hi;
  }

  const double tol_active = request.tol_active.value_or(request.h);
  for (double gamma : request.levels) {
    const std::string key = level_key(gamma);
    if (m > 0) {
      std::vector<double> d(m, 0.0);
      std::size_t probes = 0;
      const auto it = request.active_sets.find(key);
      for (std::size_t i = 1; i <= m; ++i) {
        if (it != request.active_sets.end()) {
          require(it->second.size() == m, ErrorKind::invalid_argument, "explicit active sets need one list per constraint");
          for (const auto& x : it->second[i - 1]) {
            d[i - 1] = std::max(d[i - 1], gamma - data.f_hat(i, x));
            ++probes;
          }
        } else {
          for (std::size_t k = 0; k < grid.size(); ++k) {
            if (gmax[k] > gamma + tol_active + kSetTolerance) continue;
            if (std::abs(fv[i][k] - gamma) > tol_active + kSetTolerance) continue;
            // equals gamma - F_hat_i on the exact level set
            d[i - 1] = std::max(d[i - 1], fv[i][k] - fh[i][k]);
            ++probes;
          }
        }
      }
      led.entries["Delta(gamma=" + key + ")"] = d;
      led.probe_size["Delta(gamma=" + key + ")"] = probes;
    }
    for (const auto& a : request.optimality_anchors) {
      const auto ait = request.anchors.find(a);
      require(ait != request.anchors.end(), ErrorKind::missing_entry, "optimality anchor '" + a + "' not supplied");
      const double fa = data.f(0, ait->second), ha = data.f_hat(0, ait->second);
      double sup = 0.0;
      std::size_t probes = 0;
      const auto rit = request.relaxed_sets.find(key);
      if (rit != request.relaxed_sets.end()) {
        for (const auto& x : rit->second) {
          sup = std::max(sup, data.f(0, x) - fa - (data.f_hat(0, x) - ha));
          ++probes;
        }
      } else {
        for (std::size_t k = 0; k < grid.size(); ++k) {
          if (gmax[k] > gamma + kSetTolerance) continue;
          sup = std::max(sup, fv[0][k] - fa - (fh[0][k] - ha));
          ++probes;
        }
      }
      const std::string okey = "Delta0(" + a + "|gamma=" + key + ")";
      led.entries[okey] = {sup};
      led.probe_size[okey] = probes;
    }
  }

  for (const auto& [a, b] : request.pairs) {
    const auto ia = request.anchors.find(a), ib = request.anchors.find(b);
    require(ia != request.anchors.end() && ib != request.anchors.end(), ErrorKind::missing_entry,
            "pair anchors must be supplied");
    std::vector<double> d(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      d[i] = positive_part(data.f(i, ia->second) - data.f(i, ib->second) -
                           (data.f_hat(i, ia->second) - data.f_hat(i, ib->second)));
    }
    led.entries["Delta(" + a + "," + b + ")"] = d;
  }
  return led;
}

DeviationLedger deviation_ledger(const EmpiricalProblem& empirical, LedgerRequest request) {
  const SpaceDescriptor& y = empirical.program().hard_set();
  if (!request.in_hard_set) {
    request.in_hard_set = [&y](std::span<const double> x) { return y.contains(x); };
  }
  return deviation_ledger(perturbation(empirical), request);
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::F: return "F";
    case Scheme::C1C2: return "C1/C2";
    case Scheme::C1plusC2: return "C1+/C2";
    case Scheme::C1minusC2minus: return "C1_/C2_";
    case Scheme::P: return "P";
    case Scheme::Pminus: return "P_";
    case Scheme::M: return "M";
    case Scheme::M0: return "M0";
    case Scheme::Mminus: return "M_";
    case Scheme::ExteriorFull: return "F+P+M";
    case Scheme::ExteriorConvexFull: return "C1+/C2+P+M";
    case Scheme::InteriorFull: return "C1_/C2_+P_+M_";
  }
  return "F";
}

Scheme scheme_from_string(const std::string& name) {
  for (Scheme s : {Scheme::F, Scheme::C1C2, Scheme::C1plusC2, Scheme::C1minusC2minus, Scheme::P, Scheme::Pminus,
                   Scheme::M, Scheme::M0, Scheme::Mminus, Scheme::ExteriorFull, Scheme::ExteriorConvexFull,
                   Scheme::InteriorFull}) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorKind::invalid_argument, "unknown certificate scheme '" + name + "'");
}

bool requires_convexity(Scheme s) {
  return s == Scheme::C1C2 || s == Scheme::C1plusC2 || s == Scheme::C1minusC2minus ||
         s == Scheme::ExteriorConvexFull || s == Scheme::InteriorFull;
}

namespace {

class Checker {
 public:
  Checker(const DeviationLedger& ledger, const SchemeParams& params, CertificateCheck& out)
      : led_(ledger), p_(params), out_(out) {}

  double relax(std::size_t i) const { return p_.relaxations[i - 1]; }

  void add(const std::string& name, bool holds, const std::string& detail) {
    out_.conditions.push_back({name, holds, detail});
  }

  // for all i in I: lhs(i) <= rhs(i)
  template <class L, class R>
  void for_all(const std::string& name, L lhs, R rhs) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 1; i <= led_.m; ++i) {
      const double a = lhs(i), b = rhs(i);
      if (!leq(a, b)) {
        ok = false;
        detail = "i=" + std::to_string(i) + ": " + fmt(a) + " > " + fmt(b);
        break;
      }
    }
    add(name, ok, ok ? "holds for all i" : detail);
  }

  void cond_F() {
    const auto& d = led_.at("Delta(Y)");
    for_all("(F) Δ̂_i(Y) ≤ γ − ε̂_i", [&](std::size_t i) { return d[i - 1]; },
            [&](std::size_t i) { return p_.gamma - relax(i); });
  }

  void cond_C2(double level) {
    const auto& d = led_.at("Delta(gamma=" + level_key(level) + ")");
    if (level == 0.0) {
      for_all("(C2_) Δ̂_i(0) ≤ −ε̂_i", [&](std::size_t i) { return d[i - 1]; },
              [&](std::size_t i) { return -relax(i); });
    } else {
      for_all("(C2) Δ̂_i(γ) ≤ γ − ε̂_i", [&](std::size_t i) { return d[i - 1]; },
              [&](std::size_t i) { return p_.gamma - relax(i); });
    }
  }

  void cond_C1(const std::string& name, double level, double rhs) {
    const auto& d = led_.at("Delta(gamma=" + level_key(level) + ")");
    const auto& dy = led_.at("delta(" + p_.y + ")");
    for_all(name, [&](std::size_t i) { return d[i - 1] + dy[i]; }, [&](std::size_t) { return rhs; });
  }

  // hypothesis: f_i(y) < bound for every i
  void strict_anchor(const std::string& name, const std::string& anchor, double bound) {
    const auto& f = led_.at("f(" + anchor + ")");
    bool ok = true;
    for (std::size_t i = 1; i <= led_.m; ++i) ok = ok && f[i] < bound;
    add(name, ok, ok ? "holds" : "anchor '" + anchor + "' violates the strict bound " + fmt(bound));
  }

  void weak_anchor(const std::string& name, const std::string& anchor, double bound) {
    const auto& f = led_.at("f(" + anchor + ")");
    bool ok = true;
    for (std::size_t i = 1; i <= led_.m; ++i) ok = ok && leq(f[i], bound);
    add(name, ok, ok ? "holds" : "anchor '" + anchor + "' exceeds " + fmt(bound));
  }

  void cond_P() {
    const auto& d = led_.at("delta(" + p_.x_star + ")");
    for_all("(P) δ̂_i(x*) ≤ ε̂_i", [&](std::size_t i) { return d[i]; }, [&](std::size_t i) { return relax(i); });
  }

  void cond_Pminus() {
    const auto& d = led_.at("delta(" + p_.y_star + ")");
    for_all("(P_) δ̂_i(y*) ≤ γ + ε̂_i", [&](std::size_t i) { return d[i]; },
            [&](std::size_t i) { return p_.gamma + relax(i); });
  }

  void cond_M(const std::string& name, const std::string& anchor, double level) {
    const double v = led_.at("Delta0(" + anchor + "|gamma=" + level_key(level) + ")").front();
    const bool ok = leq(v, p_.t - p_.t1);
    add(name, ok, fmt(v) + (ok ? " ≤ " : " > ") + fmt(p_.t - p_.t1));
  }

  void nonneg_t() {
    add("t, t1 ≥ 0", p_.t >= 0.0 && p_.t1 >= 0.0, "t = " + fmt(p_.t) + ", t1 = " + fmt(p_.t1));
  }

 private:
  const DeviationLedger& led_;
  const SchemeParams& p_;
  CertificateCheck& out_;
};

}  // namespace

CertificateCheck check_certificates(const DeviationLedger& ledger, Scheme scheme, const SchemeParams& params) {
  if (requires_convexity(scheme)) {
    require(params.convex_attested, ErrorKind::attestation,
            "scheme " + to_string(scheme) + " needs a convexity attestation for the constraints");
  }
  require(params.relaxations.size() == ledger.m, ErrorKind::invalid_argument,
          "need one relaxation eps_hat_i per constraint");
  CertificateCheck out;
  out.scheme = scheme;
  Checker ck(ledger, params, out);
  const double g = params.gamma;
  const std::string G = fmt(g);
  std::vector<std::string> conclusions;

  switch (scheme) {
    case Scheme::F:
      ck.add("γ ≥ 0", g >= 0.0, "γ = " + G);
      ck.cond_F();
      conclusions = {"X̂ ⊆ X_{" + G + "}"};
      break;
    case Scheme::C1C2:
      ck.add("ε < γ", params.eps < g, "ε = " + fmt(params.eps) + ", γ = " + G);
      ck.strict_anchor("f_i(y) < ε", params.y, params.eps);
      ck.cond_C1("(C1) Δ̂_i(γ) + δ̂_i(y) ≤ γ − ε", g, g - params.eps);
      ck.cond_C2(g);
      conclusions = {"X̂ ⊆ X_{" + G + "}"};
      break;
    case Scheme::C1plusC2:
    case Scheme::ExteriorConvexFull:
      ck.add("γ > 0", g > 0.0, "γ = " + G);
      ck.strict_anchor("y ∈ int X_{γ/2}", params.y, g / 2.0);
      ck.cond_C1("(C1+) Δ̂_i(γ) + δ̂_i(y) ≤ γ/2", g, g / 2.0);
      ck.cond_C2(g);
      conclusions = {"X̂ ⊆ X_{" + G + "}"};
      if (scheme == Scheme::ExteriorConvexFull) {
        ck.nonneg_t();
        ck.weak_anchor("x* ∈ X", params.x_star, 0.0);
        ck.cond_P();
        ck.cond_M("(M) Δ̂_0(x*|γ) ≤ t − t1", params.x_star, g);
        conclusions.push_back("f(x̂) ≤ f* + " + fmt(params.t) + " for all x̂ ∈ X̂*_{" + fmt(params.t1) + "}");
      }
      break;
    case Scheme::C1minusC2minus:
    case Scheme::InteriorFull:
      ck.add("γ > 0", g > 0.0, "γ = " + G);
      if (params.slater_margin) {
        ck.add("γ ≤ ε̊", leq(g, *params.slater_margin), "ε̊ = " + fmt(*params.slater_margin));
      }
      ck.strict_anchor("y ∈ int X_{−γ}", params.y, -g);
      ck.cond_C1("(C1_) Δ̂_i(0) + δ̂_i(y) ≤ γ", 0.0, g);
      ck.cond_C2(0.0);
      conclusions = {"X̂ ⊆ X"};
      if (scheme == Scheme::InteriorFull) {
        ck.nonneg_t();
        ck.weak_anchor("y* ∈ X_{−γ}", params.y_star, -g);
        ck.cond_Pminus();
        ck.cond_M("(M_) Δ̂_0(y*|0) ≤ t − t1", params.y_star, 0.0);
        conclusions.push_back("X̂*_{" + fmt(params.t1) + "} ⊆ X*_{" + fmt(params.t) + "+gap(" + G + ")}");
      }
      break;
    case Scheme::P:
      ck.weak_anchor("x* ∈ X", params.x_star, 0.0);
      ck.cond_P();
      conclusions = {"x* ∈ X̂"};
      break;
    case Scheme::Pminus:
      ck.weak_anchor("y* ∈ X_{−γ}", params.y_star, -g);
      ck.cond_Pminus();
      conclusions = {"y* ∈ X̂"};
      break;
    case Scheme::M:
      ck.nonneg_t();
      ck.cond_M("(M) Δ̂_0(x*|γ) ≤ t − t1", params.x_star, g);
      break;
    case Scheme::Mminus:
      ck.nonneg_t();
      ck.cond_M("(M_) Δ̂_0(y*|0) ≤ t − t1", params.y_star, 0.0);
      break;
    case Scheme::M0:
      ck.add("no perturbed constraints", ledger.m == 0, "m = " + std::to_string(ledger.m));
      ck.nonneg_t();
      ck.cond_M("(M0) Δ̂_0(x*|0) ≤ t − t1", params.x_star, 0.0);
      conclusions = {"X̂*_{" + fmt(params.t1) + "} ⊆ X*_{" + fmt(params.t) + "}"};
      break;
    case Scheme::ExteriorFull:
      ck.add("γ ≥ 0", g >= 0.0, "γ = " + G);
      ck.nonneg_t();
      ck.cond_F();
      ck.weak_anchor("x* ∈ X", params.x_star, 0.0);
      ck.cond_P();
      ck.cond_M("(M) Δ̂_0(x*|γ) ≤ t − t1", params.x_star, g);
      conclusions = {"X̂ ⊆ X_{" + G + "}",
                     "f(x̂) ≤ f* + " + fmt(params.t) + " for all x̂ ∈ X̂*_{" + fmt(params.t1) + "}"};
      break;
  }
  out.all_hold = std::all_of(out.conditions.begin(), out.conditions.end(),
                             [](const ConditionResult& c) { return c.holds; });
  if (out.all_hold) out.conclusions = std::move(conclusions);
  return out;
}

}  // namespace saa

#include "saa/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "saa/error.hpp"
#include "saa/families.hpp"
#include "saa/parallel.hpp"

namespace saa {

namespace {

struct OptionSpec {
  std::string name;
  std::string help;
  bool flag = false;
};

struct SubcommandSpec {
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
};

const std::vector<OptionSpec> kCertifyOptions{
    {"sigma", "variance aggregate sigma-hat"},
    {"profile", "variance profile JSON (inline or path)"},
    {"C", "theorem constant (default 1)"},
    {"C-from", "calibration JSON whose c_star supplies C"},
};

std::vector<OptionSpec> with_certify(std::vector<OptionSpec> base) {
  base.push_back({"certify", "attach a certificate", true});
  base.push_back({"cert-eps", "certificate accuracy eps"});
  base.push_back({"cert-p", "certificate failure probability p"});
  base.insert(base.end(), kCertifyOptions.begin(), kCertifyOptions.end());
  return base;
}

const std::vector<OptionSpec> kSolverOptions{
    {"method", "grid or switching-subgradient"},
    {"h", "grid resolution"},
    {"iterations", "subgradient iterations"},
    {"tol-opt", "optimality tolerance"},
    {"tol-feas", "feasibility tolerance"},
    {"step-scale", "subgradient step scale"},
    {"budget", "grid point budget"},
};

std::vector<OptionSpec> with_solver(std::vector<OptionSpec> base) {
  base.insert(base.end(), kSolverOptions.begin(), kSolverOptions.end());
  return base;
}

const std::vector<SubcommandSpec>& subcommands() {
  static const std::vector<SubcommandSpec> specs{
      {"entropy", "packing entropy H(theta)",
       {{"space", "space JSON"}, {"theta", "separation"}, {"h", "candidate grid resolution"}, {"budget", "grid budget"}}},
      {"aalpha", "chaining complexity A_alpha",
       {{"space", "space JSON"},
        {"alpha", "Hoelder exponent"},
        {"h", "construction grid resolution"},
        {"max-index", "series truncation index"},
        {"budget", "grid budget"}}},
      {"certify", "theorem sample size and guaranteed events",
       [] {
         std::vector<OptionSpec> o{{"theorem", "fixed, exterior or interior"},
                                   {"eps", "accuracy"},
                                   {"p", "failure probability"},
                                   {"m", "number of constraints"},
                                   {"item", "theorem item: i, ii, iii or all"},
                                   {"convex", "localized convex exterior aggregate", true},
                                   {"slater-margin", "Slater margin eps_ring"}};
         o.insert(o.end(), kCertifyOptions.begin(), kCertifyOptions.end());
         return o;
       }()},
      {"solve", "solve a built-in SAA problem",
       with_solver({{"problem", "problem JSON"},
                    {"scenarios", "scenario CSV"},
                    {"n", "draw this many scenarios instead of reading a CSV"},
                    {"relax", "constraint relaxation eps_hat"}})},
      {"validate", "run a validation plan", {{"plan", "plan JSON"}}},
      {"calibrate", "calibrate the theorem constant", {{"families", "calibration JSON"}}},
      {"portfolio", "CVaR-constrained portfolio",
       with_certify(with_solver({{"returns", "returns CSV"},
                                 {"synthetic", "draw this many synthetic return rows"},
                                 {"assets", "synthetic asset count"},
                                 {"p", "CVaR level"},
                                 {"beta", "CVaR budget"}}))},
      {"lasso", "l1-constrained least squares",
       with_certify(with_solver({{"data", "lasso CSV"},
                                 {"synthetic", "draw this many synthetic rows"},
                                 {"dimension", "synthetic feature count"},
                                 {"radius", "l1 radius"},
                                 {"weighted", "use the D_hat_2 weighted ball", true}}))},
      {"report", "summarize artifacts", {{"format", "json or csv"}}},
  };
  return specs;
}

// ---------------------------------------------------------------- helpers

const std::string* find_param(const RunConfig& cfg, const std::string& key) {
  const auto it = cfg.parameters.find(key);
  return it == cfg.parameters.end() ? nullptr : &it->second;
}

bool has(const RunConfig& cfg, const std::string& key) { return find_param(cfg, key) != nullptr; }

std::string get_string(const RunConfig& cfg, const std::string& key) {
  const auto* v = find_param(cfg, key);
  require(v != nullptr, ErrorKind::invalid_argument, "missing required option --" + key);
  return *v;
}

double parse_double(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_argument, "--" + key + " expects a number, got '" + text + "'");
  }
  require(used == text.size() && std::isfinite(v), ErrorKind::invalid_argument,
          "--" + key + " expects a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_count(const std::string& text, const std::string& key) {
  require(!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); }),
          ErrorKind::invalid_argument, "--" + key + " expects a nonnegative integer, got '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    fail(ErrorKind::invalid_argument, "--" + key + " is out of range: '" + text + "'");
  }
}

double get_double(const RunConfig& cfg, const std::string& key) { return parse_double(get_string(cfg, key), key); }

double get_double(const RunConfig& cfg, const std::string& key, double fallback) {
  return has(cfg, key) ? get_double(cfg, key) : fallback;
}

std::size_t get_count(const RunConfig& cfg, const std::string& key, std::size_t fallback) {
  return has(cfg, key) ? static_cast<std::size_t>(parse_count(get_string(cfg, key), key)) : fallback;
}

bool get_flag(const RunConfig& cfg, const std::string& key) { return has(cfg, key); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Inline JSON when the text starts with '{' or '[', otherwise a file path.
Json load_json(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool inline_json = first != std::string::npos && (text[first] == '{' || text[first] == '[');
  const std::string body = inline_json ? text : read_file(text);
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::invalid_argument,
         std::string("malformed JSON") + (inline_json ? "" : " in '" + text + "'") + ": " + e.what());
  }
}

template <class T>
T json_get(const Json& j, const std::string& key, const T& fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::invalid_argument, "field '" + key + "' has the wrong type: " + e.what());
  }
}

template <class T>
T json_require(const Json& j, const std::string& key) {
  require(j.is_object() && j.contains(key) && !j.at(key).is_null(), ErrorKind::invalid_argument,
          "missing field '" + key + "'");
  return json_get<T>(j, key, T{});
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json artifact(const std::string& kind) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

Json number_or_null(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

Json points_json(const std::vector<Point>& pts) {
  Json a = Json::array();
  for (const auto& p : pts) a.push_back(p);
  return a;
}

std::uint64_t require_seed(const RunConfig& cfg, const Json& plan = Json::object()) {
  if (cfg.seed) return *cfg.seed;
  require(plan.is_object() && plan.contains("seed"), ErrorKind::invalid_argument,
          "a seed is required: give --seed or a \"seed\" field");
  return json_require<std::uint64_t>(plan, "seed");
}

// ---------------------------------------------------------------- entropy / aalpha

Json run_entropy(const RunConfig& cfg) {
  const auto space = space_from_json(load_json(get_string(cfg, "space")));
  const double theta = get_double(cfg, "theta");
  const double h = get_double(cfg, "h", 0.01);
  const auto res = entropy_number(space, theta, h, get_count(cfg, "budget", kDefaultGridBudget));
  Json j = artifact("entropy");
  j["space"] = space_to_json(space);
  j["theta"] = theta;
  j["h"] = h;
  j["size"] = res.size;
  j["H"] = res.entropy;
  if (res.bracket) {
    j["bracket"] = {{"lower", res.bracket->lower}, {"upper", res.bracket->upper}};
  } else {
    j["bracket"] = nullptr;
  }
  return j;
}

Json run_aalpha(const RunConfig& cfg) {
  const auto space = space_from_json(load_json(get_string(cfg, "space")));
  const double alpha = get_double(cfg, "alpha", 1.0);
  AAlphaOptions opt;
  opt.h = get_double(cfg, "h", opt.h);
  opt.max_index = static_cast<int>(get_count(cfg, "max-index", static_cast<std::size_t>(opt.max_index)));
  opt.budget = get_count(cfg, "budget", opt.budget);
  const auto res = a_alpha(space, alpha, opt);
  Json j = artifact("aalpha");
  j["space"] = space_to_json(space);
  j["alpha"] = alpha;
  j["A_alpha"] = res.value;
  j["diameter"] = res.diameter;
  j["truncation"] = res.truncation;
  j["tail_bound"] = res.tail_bound;
  j["entropies"] = res.entropies;
  j["candidates"] = res.candidates;
  j["grid_approximate"] = res.grid_approximate;
  return j;
}

// ---------------------------------------------------------------- certify

VarianceProfile profile_from_json(const Json& j) {
  const Json& entries = j.contains("entries") ? j.at("entries") : j;
  require(entries.is_object(), ErrorKind::invalid_argument, "profile must be an object of named entries");
  VarianceProfile profile;
  for (const auto& [key, value] : entries.items()) {
    if (key == "schema_version" || key == "kind") continue;
    if (value.is_number()) {
      profile.set(key, value.get<double>(), Provenance::declared);
    } else {
      require(value.is_object() && value.contains("value") && value.at("value").is_number(),
              ErrorKind::invalid_argument, "profile entry '" + key + "' needs a numeric value");
      profile.set(key, value.at("value").get<double>(), Provenance::declared, json_get<std::string>(value, "note", ""));
    }
  }
  return profile;
}

struct ConstantChoice {
  double value = 1.0;
  std::string source = "default";
};

ConstantChoice theorem_constant(const RunConfig& cfg) {
  require(!(has(cfg, "C") && has(cfg, "C-from")), ErrorKind::invalid_argument, "give at most one of --C and --C-from");
  if (has(cfg, "C")) return {get_double(cfg, "C"), "flag"};
  if (has(cfg, "C-from")) {
    const auto path = get_string(cfg, "C-from");
    const Json cal = load_json(path);
    require(cal.contains("c_star"), ErrorKind::invalid_argument, "'" + path + "' has no c_star field");
    require(cal.at("c_star").is_number(), ErrorKind::uncalibratable, "'" + path + "' records no calibrated constant");
    return {cal.at("c_star").get<double>(), "calibration:" + path};
  }
  return {};
}

Json certify_from(const RunConfig& cfg, Theorem theorem, double eps, double p, std::size_t m,
                  const std::string& item, bool convex, std::optional<double> slater) {
  require(has(cfg, "sigma") != has(cfg, "profile"), ErrorKind::invalid_argument, "give exactly one of --sigma and --profile");
  const auto constant = theorem_constant(cfg);
  double sigma = 0.0;
  Json keys = Json::array();
  std::string sigma_source = "flag";
  if (has(cfg, "sigma")) {
    sigma = get_double(cfg, "sigma");
  } else {
    const auto agg = aggregate_sigma(theorem, item, convex, profile_from_json(load_json(get_string(cfg, "profile"))));
    sigma = agg.value;
    keys = agg.keys;
    sigma_source = "profile";
  }
  Json j = to_json(sample_size(theorem, sigma, eps, p, m, constant.value, slater, item));
  j["C_source"] = constant.source;
  j["sigma_source"] = sigma_source;
  j["sigma_keys"] = keys;
  j["convex"] = convex;
  return j;
}

Json run_certify(const RunConfig& cfg) {
  const Theorem theorem = theorem_from_string(get_string(cfg, "theorem"));
  const std::size_t m = get_count(cfg, "m", theorem == Theorem::fixed ? 0 : 1);
  std::optional<double> slater;
  if (has(cfg, "slater-margin")) slater = get_double(cfg, "slater-margin");
  return certify_from(cfg, theorem, get_double(cfg, "eps"), get_double(cfg, "p"), m,
                      has(cfg, "item") ? get_string(cfg, "item") : std::string("all"), get_flag(cfg, "convex"), slater);
}

// ---------------------------------------------------------------- solve

SolverConfig solver_config(const RunConfig& cfg, std::uint64_t seed) {
  SolverConfig sc;
  if (has(cfg, "method")) sc.method = method_from_string(get_string(cfg, "method"));
  sc.h = get_double(cfg, "h", sc.h);
  sc.iterations = get_count(cfg, "iterations", sc.iterations);
  sc.tol_opt = get_double(cfg, "tol-opt", sc.tol_opt);
  sc.tol_feas = get_double(cfg, "tol-feas", sc.tol_feas);
  sc.step_scale = get_double(cfg, "step-scale", sc.step_scale);
  sc.grid_budget = get_count(cfg, "budget", sc.grid_budget);
  sc.seed = seed;
  sc.threads = cfg.threads;
  return sc;
}

struct BuiltinProblem {
  std::string name;
  std::shared_ptr<const StochasticProgram> program;
  Sampler sampler;
};

// {"family": <name>} or {"builtin": "simplex-linear", "dimension": d, "law": name}.
BuiltinProblem problem_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::invalid_argument, "problem must be a JSON object");
  if (j.contains("family")) {
    auto fam = family_by_name(json_require<std::string>(j, "family"));
    return {fam.name, fam.program, fam.sampler};
  }
  const auto builtin = json_require<std::string>(j, "builtin");
  require(builtin == "simplex-linear", ErrorKind::invalid_argument, "unknown builtin problem '" + builtin + "'");
  const auto d = json_get<std::size_t>(j, "dimension", 3);
  const auto law = distribution_from_name(json_get<std::string>(j, "law", "t3"));
  return {builtin, simplex_linear_program(d, law, json_get<std::size_t>(j, "modulus_budget", 200000)),
          iid_sampler(law, d)};
}

Json run_solve(const RunConfig& cfg) {
  const auto problem = problem_from_json(load_json(get_string(cfg, "problem")));
  require(has(cfg, "scenarios") != has(cfg, "n"), ErrorKind::invalid_argument, "give exactly one of --scenarios and --n");
  ScenarioSet scenarios;
  std::optional<std::uint64_t> seed;
  std::string source;
  if (has(cfg, "scenarios")) {
    source = "csv:" + get_string(cfg, "scenarios");
    scenarios = read_scenarios_csv_file(get_string(cfg, "scenarios"));
  } else {
    seed = require_seed(cfg);
    source = "sampled";
    scenarios = draw_scenarios(problem.sampler, get_count(cfg, "n", 0), *seed);
  }
  const double relax = get_double(cfg, "relax", 0.0);
  const std::vector<double> relaxations(problem.program->constraint_count(), relax);
  const auto emp = build_empirical(problem.program, std::move(scenarios), relaxations);
  const auto sol = solve_saa(emp, solver_config(cfg, seed.value_or(0)));
  Json j = artifact("solution");
  j["problem"] = problem.name;
  j["scenario_source"] = source;
  j["sample_size"] = emp.sample_size();
  j["relax"] = relax;
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["solution"] = to_json(sol);
  return j;
}

// ---------------------------------------------------------------- validate / calibrate

std::vector<double> json_doubles(const Json& plan, const std::string& key, std::vector<double> fallback) {
  return json_get<std::vector<double>>(plan, key, fallback);
}

ExperimentPlan experiment_plan(const Json& plan, const std::string& family, std::uint64_t seed, int threads) {
  ExperimentPlan ep;
  ep.family = family;
  ep.replications = json_get<std::size_t>(plan, "replications", ep.replications);
  ep.first_replication = json_get<std::size_t>(plan, "first_replication", 0);
  ep.eps = json_doubles(plan, "eps", ep.eps);
  ep.p = json_doubles(plan, "p", ep.p);
  ep.seed = seed;
  if (plan.contains("n")) ep.n_override = json_require<std::size_t>(plan, "n");
  ep.threads = threads;
  return ep;
}

Json run_coverage(const Json& plan, std::uint64_t seed, int threads) {
  const auto family = family_by_name(json_require<std::string>(plan, "family"));
  double constant = json_get<double>(plan, "C", 1.0);
  if (plan.contains("C_from")) {
    const Json cal = load_json(json_require<std::string>(plan, "C_from"));
    require(cal.contains("c_star") && cal.at("c_star").is_number(), ErrorKind::uncalibratable,
            "calibration file records no c_star");
    constant = cal.at("c_star").get<double>();
  }
  return to_json(coverage_experiment(experiment_plan(plan, family.name, seed, threads), family, constant));
}

std::vector<std::size_t> default_rate_grid() {
  std::vector<std::size_t> n;
  for (int k = 6; k <= 12; ++k) n.push_back(std::size_t{1} << k);
  return n;
}

Json run_rate(const Json& plan, std::uint64_t seed, int threads) {
  const auto d = json_get<std::size_t>(plan, "dimension", 3);
  const auto law = distribution_from_name(json_get<std::string>(plan, "law", "t3"));
  RatePlan rp;
  rp.program = simplex_linear_program(d, law, json_get<std::size_t>(plan, "modulus_budget", 20000));
  rp.sampler = iid_sampler(law, d);
  rp.grid = rp.program->hard_set().grid(json_get<double>(plan, "h", 0.1));
  rp.n_grid = json_get<std::vector<std::size_t>>(plan, "n", default_rate_grid());
  rp.replications = json_get<std::size_t>(plan, "replications", rp.replications);
  rp.seed = seed;
  rp.threads = threads;
  Json j = to_json(rate_experiment(rp));
  j["dimension"] = d;
  j["law"] = law.name();
  return j;
}

Json run_tail(const Json& plan, std::uint64_t seed, int threads) {
  TailPlan tp;
  tp.law = distribution_from_name(json_get<std::string>(plan, "law", "t3"));
  tp.n = json_get<std::size_t>(plan, "n", 200);
  tp.t_grid = json_doubles(plan, "t", tp.t_grid);
  tp.replications = json_get<std::size_t>(plan, "replications", tp.replications);
  tp.constant = json_get<double>(plan, "C", tp.constant);
  tp.seed = seed;
  tp.threads = threads;
  Json j = to_json(tail_experiment(tp));
  j["law"] = tp.law.name();
  return j;
}

Json run_uniform_tail(const Json& plan, std::uint64_t seed, int threads) {
  const auto d = json_get<std::size_t>(plan, "dimension", 3);
  const auto law = distribution_from_name(json_get<std::string>(plan, "law", "t3"));
  auto prog = simplex_linear_program(d, law, json_get<std::size_t>(plan, "modulus_budget", 200000));
  UniformTailPlan up;
  up.program = prog;
  up.sampler = iid_sampler(law, d);
  up.grid = prog->hard_set().grid(json_get<double>(plan, "h", 0.1));
  up.probe = SpaceDescriptor::simplex(d).grid(1.0);
  up.anchor = Point(d, 0.0);
  up.anchor[0] = 1.0;
  up.a_alpha = a_alpha(prog->hard_set(), 1.0).value;
  up.population_modulus = *prog->holder(0).modulus;
  up.n = json_get<std::size_t>(plan, "n", 200);
  up.t_grid = json_doubles(plan, "t", up.t_grid);
  up.replications = json_get<std::size_t>(plan, "replications", up.replications);
  up.constant = json_get<double>(plan, "C", up.constant);
  up.seed = seed;
  up.threads = threads;
  const auto rep = uniform_tail_experiment(up);
  Json j = to_json(rep.table);
  j["kind"] = "uniform-tail";
  j["law"] = law.name();
  j["dimension"] = d;
  j["A_alpha"] = up.a_alpha;
  j["population_modulus"] = up.population_modulus;
  j["sup_is_lower_bound"] = rep.sup_is_lower_bound;
  j["mean_sup"] = rep.mean_sup;
  return j;
}

Json run_validate(const RunConfig& cfg) {
  const Json plan = load_json(get_string(cfg, "plan"));
  require(plan.is_object(), ErrorKind::invalid_argument, "plan must be a JSON object");
  const auto type = json_get<std::string>(plan, "type", "coverage");
  const auto seed = require_seed(cfg, plan);
  Json j;
  if (type == "coverage") {
    j = run_coverage(plan, seed, cfg.threads);
  } else if (type == "rate") {
    j = run_rate(plan, seed, cfg.threads);
  } else if (type == "tail") {
    j = run_tail(plan, seed, cfg.threads);
  } else if (type == "uniform-tail") {
    j = run_uniform_tail(plan, seed, cfg.threads);
  } else {
    fail(ErrorKind::invalid_argument, "unknown plan type '" + type + "'");
  }
  j["plan"] = plan;
  return j;
}

// {"families": [name | {"name", "eps", "p", "replications"}], "replications",
//  "eps", "p", "seed", "min_exponent", "max_exponent"}
Json run_calibrate(const RunConfig& cfg) {
  const Json spec = load_json(get_string(cfg, "families"));
  require(spec.is_object() && spec.contains("families") && spec.at("families").is_array(), ErrorKind::invalid_argument,
          "calibration input needs a \"families\" array");
  const auto seed = require_seed(cfg, spec);
  std::vector<CoverageFamily> families;
  std::vector<ExperimentPlan> plans;
  for (const auto& entry : spec.at("families")) {
    Json merged = spec;
    merged.erase("families");
    std::string name;
    if (entry.is_string()) {
      name = entry.get<std::string>();
    } else {
      name = json_require<std::string>(entry, "name");
      for (const auto& [k, v] : entry.items()) merged[k] = v;
    }
    families.push_back(family_by_name(name));
    plans.push_back(experiment_plan(merged, name, seed, cfg.threads));
  }
  CalibrationOptions opt;
  opt.min_exponent = json_get<int>(spec, "min_exponent", opt.min_exponent);
  opt.max_exponent = json_get<int>(spec, "max_exponent", opt.max_exponent);
  Json j = to_json(calibrate_constant(families, plans, opt));
  j["seed"] = seed;
  j["input"] = spec;
  return j;
}

// ---------------------------------------------------------------- apps

Json maybe_certificate(const RunConfig& cfg, Theorem theorem, std::size_t m) {
  if (!get_flag(cfg, "certify")) return nullptr;
  return certify_from(cfg, theorem, get_double(cfg, "cert-eps"), get_double(cfg, "cert-p"), m, "all", false,
                      std::nullopt);
}

Json run_portfolio(const RunConfig& cfg) {
  require(has(cfg, "returns") != has(cfg, "synthetic"), ErrorKind::invalid_argument,
          "give exactly one of --returns and --synthetic");
  ReturnsDataset data;
  std::optional<std::uint64_t> seed;
  if (has(cfg, "returns")) {
    data = read_returns_csv_file(get_string(cfg, "returns"));
  } else {
    seed = require_seed(cfg);
    const auto d = get_count(cfg, "assets", 2);
    std::vector<double> means;
    for (std::size_t k = 0; k < d; ++k) means.push_back(0.02 * static_cast<double>(k + 1));
    data = synthetic_returns(means, 0.1, get_count(cfg, "synthetic", 0), Distribution::student_t(3.0), *seed);
  }
  const double p = get_double(cfg, "p");
  const double beta = get_double(cfg, "beta");
  const auto problem = build_portfolio(data, p, beta);
  // the exterior prescription relaxes the CVaR constraint by eps
  const Json cert = maybe_certificate(cfg, Theorem::exterior, 1);
  const double relax = cert.is_null() ? 0.0 : get_double(cfg, "cert-eps");
  const auto emp = build_empirical(problem.program, problem.scenarios, {relax});
  const auto sol = solve_saa(emp, solver_config(cfg, seed.value_or(0)));

  std::vector<double> losses;
  const Point w(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(data.d));
  for (const auto& r : data.rows) {
    double ret = 0.0;
    for (std::size_t k = 0; k < data.d; ++k) ret += w[k] * r[k];
    losses.push_back(-ret);
  }
  Json j = artifact("portfolio");
  j["dataset"] = {{"source", data.source}, {"assets", data.d}, {"rows", data.rows.size()},
                  {"distribution", data.distribution}};
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["p"] = p;
  j["beta"] = beta;
  j["relax"] = relax;
  j["weights"] = w;
  j["t"] = sol.x.back();
  j["expected_return"] = -sol.value;
  j["cvar"] = cvar(losses, p);
  j["solution"] = to_json(sol);
  j["certificate"] = cert;
  return j;
}

Json run_lasso(const RunConfig& cfg) {
  require(has(cfg, "data") != has(cfg, "synthetic"), ErrorKind::invalid_argument,
          "give exactly one of --data and --synthetic");
  LassoData data;
  std::optional<std::uint64_t> seed;
  if (has(cfg, "data")) {
    data = read_lasso_csv_file(get_string(cfg, "data"));
  } else {
    seed = require_seed(cfg);
    const auto d = get_count(cfg, "dimension", 2);
    std::vector<double> coef;
    for (std::size_t k = 0; k < d; ++k) coef.push_back(std::pow(-0.5, static_cast<double>(k)));
    data = synthetic_lasso(coef, get_count(cfg, "synthetic", 0), Distribution::student_t(3.0),
                           Distribution::gaussian(0.0, 0.5), *seed);
  }
  const auto problem = build_lasso(data, get_double(cfg, "radius"), get_flag(cfg, "weighted"));
  const auto emp = build_empirical(problem.program, problem.scenarios, {});
  const auto sol = solve_saa(emp, solver_config(cfg, seed.value_or(0)));
  Json j = artifact("lasso");
  j["dataset"] = {{"source", data.source}, {"features", data.features.empty() ? 0 : data.features.front().size()},
                  {"rows", data.features.size()}};
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["radius"] = problem.radius;
  j["weighted"] = problem.weighted;
  j["diagonal"] = problem.diagonal;
  j["coefficients"] = problem.coefficients(sol.x);
  j["solution"] = to_json(sol);
  j["certificate"] = maybe_certificate(cfg, Theorem::fixed, 0);
  return j;
}

// ---------------------------------------------------------------- report

Json summary_of(const Json& a) {
  const auto kind = json_get<std::string>(a, "kind", "");
  Json s = Json::object();
  if (kind == "certificate") {
    s["n_required"] = a.at("n_required");
  } else if (kind == "solution") {
    s["value"] = a.at("solution").at("value");
  } else if (kind == "portfolio" || kind == "lasso") {
    s["value"] = a.at("solution").at("value");
  } else if (kind == "coverage") {
    s["all_pass"] = a.at("all_pass");
  } else if (kind == "rate") {
    s["slope"] = a.at("slope");
    s["pass"] = a.at("pass");
  } else if (kind == "calibration") {
    s["c_star"] = a.at("c_star");
  } else if (kind == "entropy") {
    s["size"] = a.at("size");
  } else if (kind == "aalpha") {
    s["A_alpha"] = a.at("A_alpha");
  } else if (kind == "tail" || kind == "uniform-tail") {
    bool all = true;
    for (const auto& row : a.at("rows")) all = all && row.at("pass").get<bool>();
    s["all_pass"] = all;
  }
  return s;
}

Json run_report(const RunConfig& cfg) {
  require(!cfg.inputs.empty(), ErrorKind::invalid_argument, "report needs at least one --inputs artifact");
  const auto format = has(cfg, "format") ? get_string(cfg, "format") : std::string("json");
  require(format == "json" || format == "csv", ErrorKind::invalid_argument, "--format must be json or csv");
  Json j = artifact("report");
  Json rows = Json::array();
  for (const auto& path : cfg.inputs) {
    const Json a = load_json(path);
    const auto problems = validate_artifact(a);
    Json row;
    row["path"] = path;
    row["kind"] = json_get<std::string>(a, "kind", "");
    row["seed"] = a.is_object() && a.contains("seed") ? a.at("seed") : Json(nullptr);
    row["valid"] = problems.empty();
    row["problems"] = problems;
    row["summary"] = problems.empty() ? summary_of(a) : Json::object();
    rows.push_back(row);
  }
  j["artifacts"] = rows;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "path,kind,seed,valid,summary\n";
    for (const auto& r : rows) {
      csv << r.at("path").get<std::string>() << ',' << r.at("kind").get<std::string>() << ','
          << (r.at("seed").is_null() ? "" : r.at("seed").dump()) << ',' << (r.at("valid").get<bool>() ? "true" : "false")
          << ",\"" << r.at("summary").dump() << "\"\n";
    }
    j["csv"] = csv.str();
  }
  return j;
}

Json run(const RunConfig& cfg) {
  const auto& s = cfg.subcommand;
  if (s == "entropy") return run_entropy(cfg);
  if (s == "aalpha") return run_aalpha(cfg);
  if (s == "certify") return run_certify(cfg);
  if (s == "solve") return run_solve(cfg);
  if (s == "validate") return run_validate(cfg);
  if (s == "calibrate") return run_calibrate(cfg);
  if (s == "portfolio") return run_portfolio(cfg);
  if (s == "lasso") return run_lasso(cfg);
  if (s == "report") return run_report(cfg);
  fail(ErrorKind::invalid_argument, "unknown subcommand '" + s + "'");
}

Json error_json(const std::string& type, const std::string& message) {
  Json j = artifact("error");
  j["error"] = {{"type", type}, {"message", message}};
  return j;
}

}  // namespace

std::vector<std::string> subcommand_names() {
  std::vector<std::string> names;
  for (const auto& s : subcommands()) names.push_back(s.name);
  return names;
}

// ---------------------------------------------------------------- JSON conversions

SpaceDescriptor space_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::invalid_argument, "space must be a JSON object");
  const auto kind = json_require<std::string>(j, "kind");
  const bool has_norm = j.contains("norm");
  const auto norm_or = [&](Norm fallback) {
    return has_norm ? norm_from_string(json_require<std::string>(j, "norm")) : fallback;
  };
  if (kind == "box") {
    return SpaceDescriptor::box(json_require<Point>(j, "lo"), json_require<Point>(j, "hi"), norm_or(Norm::linf));
  }
  if (kind == "ball") {
    return SpaceDescriptor::ball(json_require<Point>(j, "center"), json_require<double>(j, "radius"), norm_or(Norm::l2));
  }
  if (kind == "simplex") return SpaceDescriptor::simplex(json_require<std::size_t>(j, "dimension"), norm_or(Norm::l1));
  if (kind == "cloud") {
    return SpaceDescriptor::cloud(json_require<std::vector<Point>>(j, "points"), norm_or(Norm::linf));
  }
  if (kind == "product") {
    std::vector<SpaceDescriptor> factors;
    require(j.contains("factors") && j.at("factors").is_array(), ErrorKind::invalid_argument,
            "product space needs a \"factors\" array");
    for (const auto& f : j.at("factors")) factors.push_back(space_from_json(f));
    return SpaceDescriptor::product(std::move(factors), norm_from_string(json_require<std::string>(j, "norm")));
  }
  fail(ErrorKind::invalid_argument, "unknown space kind '" + kind + "'");
}

Json space_to_json(const SpaceDescriptor& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  switch (s.kind()) {
    case SpaceKind::box:
      j["lo"] = s.lo();
      j["hi"] = s.hi();
      break;
    case SpaceKind::ball:
      j["center"] = s.center();
      j["radius"] = s.radius();
      break;
    case SpaceKind::simplex:
      j["dimension"] = s.dimension();
      break;
    case SpaceKind::cloud:
      j["points"] = points_json(s.points());
      break;
    case SpaceKind::product: {
      Json f = Json::array();
      for (const auto& factor : s.factors()) f.push_back(space_to_json(factor));
      j["factors"] = f;
      break;
    }
  }
  j["norm"] = to_string(s.norm());
  j["diameter"] = s.diameter();
  return j;
}

Json to_json(const Certificate& c) {
  Json j = artifact("certificate");
  j["theorem"] = to_string(c.theorem);
  j["item"] = c.item;
  j["eps"] = c.eps;
  j["p"] = c.p;
  j["m"] = c.m;
  j["C"] = c.constant;
  j["sigma"] = c.sigma;
  j["slater_margin"] = number_or_null(c.slater_margin);
  j["n_required"] = c.n_required;
  j["events"] = c.events;
  j["relaxation"] = number_or_null(c.relaxation);
  return j;
}

Json to_json(const Solution& s) {
  Json j = artifact("solution-record");
  j["x"] = s.x;
  j["value"] = s.value;
  j["lower"] = s.lower;
  j["certified_gap"] = s.certified_gap;
  j["residuals"] = s.residuals;
  j["iterations"] = s.iterations;
  j["method"] = to_string(s.method);
  j["budget_exhausted"] = s.budget_exhausted;
  j["grid_points"] = s.grid_points;
  j["seed"] = s.seed;
  return j;
}

Json to_json(const CoverageReport& r) {
  Json j = artifact("coverage");
  j["family"] = r.family;
  j["event"] = r.event;
  j["theorem"] = to_string(r.theorem);
  j["C"] = r.constant;
  j["seed"] = r.seed;
  j["first_replication"] = r.first_replication;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"eps", row.eps},
                    {"p", row.p},
                    {"n", row.n},
                    {"successes", row.successes},
                    {"trials", row.trials},
                    {"frequency", row.frequency},
                    {"wilson_lo", row.interval.lo},
                    {"wilson_hi", row.interval.hi},
                    {"floor", row.floor},
                    {"pass", row.pass}});
  }
  j["rows"] = rows;
  j["all_pass"] = r.all_pass;
  return j;
}

Json to_json(const RateReport& r) {
  Json j = artifact("rate");
  j["seed"] = r.seed;
  j["replications"] = r.replications;
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"n", row.n}, {"mean", row.mean}, {"std_error", row.std_error}});
  j["rows"] = rows;
  j["slope"] = number_or_null(r.slope);
  j["slope_lo"] = r.slope_lo;
  j["slope_hi"] = r.slope_hi;
  j["degenerate"] = r.degenerate;
  j["pass"] = r.pass;
  return j;
}

Json to_json(const TailReport& r) {
  Json j = artifact("tail");
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["replications"] = r.replications;
  j["C"] = r.constant;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"t", row.t},
                    {"threshold", row.threshold},
                    {"exceed", row.exceed},
                    {"frequency", row.frequency},
                    {"bound", row.bound},
                    {"pass", row.pass}});
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const CalibrationResult& r) {
  Json j = artifact("calibration");
  j["c_star"] = number_or_null(r.c_star);
  j["grid"] = r.grid;
  j["families"] = r.families;
  Json pass = Json::array();
  for (const auto& row : r.pass) pass.push_back(row);
  j["pass"] = pass;
  Json reports = Json::array();
  for (std::size_t f = 0; f < r.reports.size(); ++f) {
    Json per = Json::array();
    for (const auto& rep : r.reports[f]) {
      Json cell;
      cell["C"] = rep.constant;
      cell["all_pass"] = rep.all_pass;
      Json rows = Json::array();
      for (const auto& row : rep.rows) {
        rows.push_back({{"eps", row.eps}, {"p", row.p}, {"n", row.n}, {"frequency", row.frequency},
                        {"wilson_lo", row.interval.lo}, {"pass", row.pass}});
      }
      cell["rows"] = rows;
      per.push_back(cell);
    }
    reports.push_back(per);
  }
  j["reports"] = reports;
  return j;
}

// ---------------------------------------------------------------- schemas

namespace {

enum class FieldType { string, number, integer, boolean, array, object, number_or_null, object_or_null, any };

bool matches(const Json& v, FieldType t) {
  switch (t) {
    case FieldType::string: return v.is_string();
    case FieldType::number: return v.is_number();
    case FieldType::integer: return v.is_number_integer();
    case FieldType::boolean: return v.is_boolean();
    case FieldType::array: return v.is_array();
    case FieldType::object: return v.is_object();
    case FieldType::number_or_null: return v.is_number() || v.is_null();
    case FieldType::object_or_null: return v.is_object() || v.is_null();
    case FieldType::any: return true;
  }
  return false;
}

using Schema = std::vector<std::pair<std::string, FieldType>>;

const std::map<std::string, Schema>& schemas() {
  using F = FieldType;
  static const Schema solution_record{{"x", F::array},          {"value", F::number},      {"lower", F::number},
                                      {"certified_gap", F::number}, {"residuals", F::array}, {"iterations", F::integer},
                                      {"method", F::string},    {"budget_exhausted", F::boolean},
                                      {"grid_points", F::integer}, {"seed", F::integer}};
  static const std::map<std::string, Schema> s{
      {"entropy", {{"space", F::object}, {"theta", F::number}, {"h", F::number}, {"size", F::integer}, {"H", F::number},
                   {"bracket", F::object_or_null}}},
      {"aalpha", {{"space", F::object}, {"alpha", F::number}, {"A_alpha", F::number}, {"truncation", F::integer},
                  {"tail_bound", F::number}, {"entropies", F::array}}},
      {"certificate", {{"theorem", F::string}, {"item", F::string}, {"eps", F::number}, {"p", F::number},
                       {"m", F::integer}, {"C", F::number}, {"sigma", F::number}, {"slater_margin", F::number_or_null},
                       {"n_required", F::integer}, {"events", F::array}, {"relaxation", F::number_or_null}}},
      {"solution-record", solution_record},
      {"solution", {{"problem", F::string}, {"scenario_source", F::string}, {"sample_size", F::integer},
                    {"relax", F::number}, {"seed", F::any}, {"solution", F::object}}},
      {"coverage", {{"family", F::string}, {"event", F::string}, {"theorem", F::string}, {"C", F::number},
                    {"seed", F::integer}, {"rows", F::array}, {"all_pass", F::boolean}}},
      {"rate", {{"seed", F::integer}, {"replications", F::integer}, {"rows", F::array}, {"slope", F::number_or_null},
                {"degenerate", F::boolean}, {"pass", F::boolean}}},
      {"tail", {{"seed", F::integer}, {"n", F::integer}, {"replications", F::integer}, {"C", F::number},
                {"rows", F::array}}},
      {"uniform-tail", {{"seed", F::integer}, {"n", F::integer}, {"replications", F::integer}, {"C", F::number},
                        {"rows", F::array}, {"A_alpha", F::number}, {"mean_sup", F::number}}},
      {"calibration", {{"c_star", F::number_or_null}, {"grid", F::array}, {"families", F::array}, {"pass", F::array},
                       {"reports", F::array}, {"seed", F::integer}}},
      {"portfolio", {{"dataset", F::object}, {"seed", F::any}, {"p", F::number}, {"beta", F::number},
                     {"weights", F::array}, {"t", F::number}, {"cvar", F::number}, {"solution", F::object},
                     {"certificate", F::object_or_null}}},
      {"lasso", {{"dataset", F::object}, {"seed", F::any}, {"radius", F::number}, {"weighted", F::boolean},
                 {"coefficients", F::array}, {"solution", F::object}, {"certificate", F::object_or_null}}},
      {"report", {{"artifacts", F::array}}},
      {"error", {{"error", F::object}}},
  };
  return s;
}

}  // namespace

std::vector<std::string> validate_artifact(const Json& a) {
  std::vector<std::string> problems;
  if (!a.is_object()) return {"artifact is not a JSON object"};
  if (!a.contains("schema_version") || a.at("schema_version") != kSchemaVersion) {
    problems.push_back("schema_version missing or not " + std::string(kSchemaVersion));
  }
  if (!a.contains("kind") || !a.at("kind").is_string()) {
    problems.push_back("kind missing");
    return problems;
  }
  const auto kind = a.at("kind").get<std::string>();
  const auto it = schemas().find(kind);
  if (it == schemas().end()) {
    problems.push_back("unknown kind '" + kind + "'");
    return problems;
  }
  for (const auto& [field, type] : it->second) {
    if (!a.contains(field)) {
      problems.push_back("missing field '" + field + "'");
    } else if (!matches(a.at(field), type)) {
      problems.push_back("field '" + field + "' has the wrong type");
    }
  }
  for (const char* nested : {"solution", "certificate"}) {
    if (kind != "solution-record" && a.contains(nested) && a.at(nested).is_object()) {
      for (auto& p : validate_artifact(a.at(nested))) problems.push_back(std::string(nested) + ": " + p);
    }
  }
  return problems;
}

Json without_timestamp(Json a) {
  if (a.is_object()) a.erase("timestamp");
  return a;
}

// ---------------------------------------------------------------- dispatch

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sample average approximation certificates, solvers and validation", "saa"};
  // "--h" is the grid resolution, so help is long-form only
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::string output;
  int verbosity = 0;
  app.add_option("--threads", threads, "worker threads (1 is fully sequential; default SAA_CERTIFY_THREADS or 1)");
  app.add_option("--seed", seed, "base seed for stochastic subcommands");
  app.add_option("-o,--output", output, "write the artifact here instead of standard output");
  app.add_flag("-v,--verbose", verbosity, "repeat for more detail on standard error");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::vector<std::string> inputs;
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : subcommands()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    subs[spec.name] = sub;
    for (const auto& opt : spec.options) {
      if (opt.flag) {
        sub->add_flag("--" + opt.name, flags[spec.name][opt.name], opt.help);
      } else {
        sub->add_option("--" + opt.name, values[spec.name][opt.name], opt.help);
      }
    }
    if (spec.name == "report") sub->add_option("--inputs", inputs, "artifact JSON files")->expected(1, -1);
  }

  std::vector<std::string> argv_storage{"saa"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << '\n';
    return 2;
  }

  try {
    RunConfig cfg;
    cfg.subcommand = app.get_subcommands().front()->get_name();
    for (const auto& spec : subcommands()) {
      if (spec.name != cfg.subcommand) continue;
      auto* sub = subs[spec.name];
      for (const auto& opt : spec.options) {
        if (sub->count("--" + opt.name) == 0) continue;
        cfg.parameters[opt.name] = opt.flag ? std::string("true") : values[spec.name][opt.name];
      }
    }
    cfg.inputs = inputs;
    cfg.output = output;
    cfg.seed = seed;
    cfg.verbosity = verbosity;
    cfg.threads = resolve_threads(threads);

    Json j = run(cfg);
    if (cfg.seed && !j.contains("seed")) j["seed"] = *cfg.seed;
    Json params = Json::object();
    for (const auto& [k, v] : cfg.parameters) params[k] = v;
    j["parameters"] = params;
    j["timestamp"] = timestamp_now();
    const auto text = j.dump(2) + "\n";
    if (cfg.verbosity > 0) err << "saa " << cfg.subcommand << ": wrote " << j.at("kind").get<std::string>() << " artifact\n";
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.output, std::ios::binary);
      require(static_cast<bool>(f), ErrorKind::io, "cannot write file '" + cfg.output + "'");
      f << text;
      require(static_cast<bool>(f), ErrorKind::io, "failed writing '" + cfg.output + "'");
    }
    return 0;
  } catch (const Error& e) {
    err << error_json(std::string(to_string(e.kind())), e.what()).dump() << '\n';
  } catch (const Json::exception& e) {
    err << error_json("invalid_argument", e.what()).dump() << '\n';
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()).dump() << '\n';
  }
  return 2;
}

}  // namespace saa

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "saa/cli.hpp"

using namespace saa;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

Json artifact_of(const Run& r) {
  REQUIRE(r.code == 0);
  return Json::parse(r.out);
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "saa_cli_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

// Strips the timestamp line; everything else must match byte for byte.
std::string stable_text(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find("\"timestamp\"") == std::string::npos) kept += line + "\n";
  }
  return kept;
}

}  // namespace

TEST_CASE("entropy and aalpha examples") {
  const auto e = artifact_of(run({"entropy", "--space", R"({"kind":"box","lo":[0],"hi":[1]})", "--theta", "0.4", "--h", "0.01"}));
  CHECK(e["size"] == 3);
  CHECK(e["H"].get<double>() == doctest::Approx(std::log(3.0)));
  CHECK(validate_artifact(e).empty());

  const auto a = artifact_of(run({"aalpha", "--space", R"({"kind":"cloud","points":[[0],[1]]})", "--alpha", "1"}));
  CHECK(a["A_alpha"].get<double>() == doctest::Approx(1.552).epsilon(0.01));
  CHECK(a.contains("truncation"));
  CHECK(a.contains("tail_bound"));
  CHECK(validate_artifact(a).empty());
}

TEST_CASE("certify examples and constant sources") {
  const auto c = artifact_of(run({"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--C", "1", "--sigma", "2"}));
  CHECK(c["n_required"] == 1199);
  CHECK(validate_artifact(c).empty());

  const auto ext = artifact_of(run({"certify", "--theorem", "exterior", "--eps", "1", "--p", "0.36787944117144233", "--m", "1", "--sigma", "1"}));
  CHECK(ext["n_required"] == 1);
  CHECK(ext["relaxation"] == 1.0);

  const auto bad = run({"certify", "--theorem", "interior", "--eps", "0.6", "--p", "0.1", "--slater-margin", "1", "--sigma", "1"});
  CHECK(bad.code == 2);
  CHECK(Json::parse(bad.err)["error"]["type"] == "SlaterMargin");

  const auto profile = scratch("profile.json");
  write(profile, R"J({"entries": {"sigma0(X)": 2.0, "breve0(z)": 1.0, "breve0(x*)": {"value": 1.5}}})J");
  const auto p = artifact_of(run({"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--profile", profile}));
  CHECK(p["sigma"] == 2.0);
  CHECK(p["n_required"] == 1199);
  CHECK(p["sigma_keys"].size() == 3);
  CHECK(run({"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--profile", R"J({"sigma0(X)": 1})J"}).code == 2);

  const auto cal = scratch("cal.json");
  write(cal, R"({"schema_version": "1.0", "kind": "calibration", "c_star": 0.25})");
  const auto from = artifact_of(run({"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--sigma", "2", "--C-from", cal}));
  CHECK(from["C"] == 0.25);
  CHECK(from["n_required"] == 300);
  write(cal, R"({"c_star": null})");
  CHECK(run({"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--sigma", "2", "--C-from", cal}).code == 2);
  CHECK(run({"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--sigma", "2", "--C", "1", "--C-from", cal}).code == 2);
}

TEST_CASE("failures exit 2 with error JSON") {
  const auto unknown = run({"frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(Json::parse(unknown.err)["kind"] == "error");
  CHECK(run({}).code == 2);

  const auto missing = run({"solve", "--problem", "/nonexistent/problem.json", "--n", "5", "--seed", "1"});
  CHECK(missing.code == 2);
  const auto err = Json::parse(missing.err);
  CHECK(err["error"]["type"] == "IO");
  CHECK(err["error"]["message"].get<std::string>().find("/nonexistent/problem.json") != std::string::npos);

  CHECK(run({"entropy", "--space", "{not json", "--theta", "0.4"}).code == 2);
  CHECK(run({"entropy", "--space", R"({"kind":"box","lo":[0],"hi":[1]})", "--theta", "abc"}).code == 2);
  CHECK(run({"entropy", "--space", R"({"kind":"box","lo":[0],"hi":[1]})"}).code == 2);
  CHECK(run({"entropy", "--bogus", "1"}).code == 2);
  // stochastic subcommands insist on a seed
  CHECK(run({"solve", "--problem", R"({"family":"quadratic-1d"})", "--n", "5"}).code == 2);
  CHECK(run({"validate", "--plan", R"({"type":"tail","replications":10})"}).code == 2);
  CHECK(run({"--threads", "0", "certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--sigma", "2"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("threads fall back to SAA_CERTIFY_THREADS") {
  const std::vector<std::string> args{"certify", "--theorem", "fixed", "--eps", "0.1", "--p", "0.05", "--sigma", "2"};
  setenv("SAA_CERTIFY_THREADS", "nope", 1);
  CHECK(run(args).code == 2);
  std::vector<std::string> explicit_threads{"--threads", "1"};
  explicit_threads.insert(explicit_threads.end(), args.begin(), args.end());
  CHECK(run(explicit_threads).code == 0);
  setenv("SAA_CERTIFY_THREADS", "2", 1);
  CHECK(run(args).code == 0);
  unsetenv("SAA_CERTIFY_THREADS");
}

TEST_CASE("stochastic subcommands are reproducible and schema-valid") {
  const auto returns = scratch("returns.csv");
  write(returns, "a,b\n0.1,0.2\n0.1,0.2\n0.1,0.2\n0.1,0.2\n");
  const auto plan = scratch("plan.json");
  write(plan, R"({"type":"coverage","family":"quadratic-1d","C":0.0625,"replications":30,"eps":[0.1,0.2]})");
  const std::vector<std::vector<std::string>> commands{
      {"solve", "--problem", R"({"family":"disc-exterior"})", "--n", "50", "--relax", "0.05", "--h", "0.05"},
      {"solve", "--problem", R"({"builtin":"simplex-linear","dimension":3,"modulus_budget":2000})", "--n", "50",
       "--method", "switching-subgradient", "--iterations", "2000", "--tol-opt", "0.5"},
      {"validate", "--plan", plan},
      {"validate", "--plan", R"({"type":"rate","replications":20,"n":[64,128,256]})"},
      {"validate", "--plan", R"({"type":"tail","replications":100,"n":50})"},
      {"validate", "--plan", R"({"type":"uniform-tail","replications":20,"n":50,"modulus_budget":2000})"},
      {"calibrate", "--families", R"({"families":["scenario-free",{"name":"quadratic-1d","eps":[0.2]}],"replications":30,"min_exponent":-3,"max_exponent":0})"},
      {"portfolio", "--synthetic", "60", "--p", "0.2", "--beta", "0.3", "--h", "0.05"},
      {"lasso", "--synthetic", "60", "--radius", "1", "--weighted", "--h", "0.05", "--certify", "--cert-eps", "0.1",
       "--cert-p", "0.1", "--sigma", "1"},
  };
  std::vector<std::string> paths;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::vector<std::string> a{"--seed", "11"};
    a.insert(a.end(), commands[k].begin(), commands[k].end());
    std::vector<std::string> b{"--seed", "11", "--threads", "2"};
    b.insert(b.end(), commands[k].begin(), commands[k].end());
    std::vector<std::string> c{"--seed", "12"};
    c.insert(c.end(), commands[k].begin(), commands[k].end());
    const auto ra = run(a), rb = run(b), rc = run(c);
    INFO(commands[k][0] << " " << ra.err);
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(stable_text(ra.out) == stable_text(run(a).out));
    // thread count leaves no trace in the artifact
    CHECK(stable_text(ra.out) == stable_text(rb.out));
    const auto j = Json::parse(ra.out);
    CHECK(j["seed"] == 11);
    CHECK(j.contains("timestamp"));
    CHECK(without_timestamp(j) == without_timestamp(Json::parse(run(a).out)));
    CHECK(validate_artifact(j).empty());
    if (commands[k][0] != "calibrate" && commands[k][0] != "portfolio") CHECK(stable_text(rc.out) != stable_text(ra.out));
    paths.push_back(scratch("artifact" + std::to_string(k) + ".json"));
    write(paths.back(), ra.out);
  }

  // CSV ingestion: deterministic portfolio (0.1, 0.2) puts everything on asset 2
  const auto port = artifact_of(run({"portfolio", "--returns", returns, "--p", "0.5", "--beta", "0", "--h", "0.05"}));
  CHECK(port["weights"][1].get<double>() == doctest::Approx(1.0));
  CHECK(port["solution"]["value"].get<double>() == doctest::Approx(-0.2));
  CHECK(port["seed"].is_null());
  CHECK(validate_artifact(port).empty());

  // output file matches stdout
  const auto out_path = scratch("out.json");
  REQUIRE(run({"--seed", "11", "-o", out_path, "validate", "--plan", plan}).code == 0);
  std::ifstream f(out_path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(stable_text(ss.str()) == stable_text(run({"--seed", "11", "validate", "--plan", plan}).out));

  // report re-validates everything and flags a broken artifact
  const auto broken = scratch("broken.json");
  write(broken, R"({"schema_version":"1.0","kind":"certificate","n_required":"many"})");
  std::vector<std::string> report{"report", "--format", "csv", "--inputs"};
  report.insert(report.end(), paths.begin(), paths.end());
  report.push_back(broken);
  const auto rep = artifact_of(run(report));
  CHECK(validate_artifact(rep).empty());
  const auto& rows = rep["artifacts"];
  REQUIRE(rows.size() == paths.size() + 1);
  for (std::size_t k = 0; k < paths.size(); ++k) CHECK(rows[k]["valid"] == true);
  CHECK(rows[paths.size()]["valid"] == false);
  CHECK(rep["csv"].get<std::string>().rfind("path,kind,seed,valid,summary\n", 0) == 0);
}

TEST_CASE("space JSON round trip") {
  for (const char* text : {R"({"kind":"box","lo":[0,-1],"hi":[1,1]})", R"({"kind":"ball","center":[0,0],"radius":2,"norm":"l1"})",
                           R"({"kind":"simplex","dimension":3})", R"({"kind":"cloud","points":[[0],[1],[3]]})",
                           R"({"kind":"product","norm":"l2","factors":[{"kind":"simplex","dimension":2},{"kind":"box","lo":[0],"hi":[1]}]})"}) {
    const auto s = space_from_json(Json::parse(text));
    const auto back = space_from_json(space_to_json(s));
    CHECK(back.kind() == s.kind());
    CHECK(back.dimension() == s.dimension());
    CHECK(back.norm() == s.norm());
    CHECK(back.diameter() == s.diameter());
  }
  CHECK_THROWS(space_from_json(Json::parse(R"({"kind":"torus"})")));
  CHECK_THROWS(space_from_json(Json::parse(R"({"kind":"box","lo":[0]})")));
}

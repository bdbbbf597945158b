#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lefschetz/experiments.hpp"

namespace ex = lefschetz::experiments;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string bin() {
  const char* p = std::getenv("LEFSCHETZ_LAB_BIN");
  REQUIRE(p != nullptr);
  return p;
}

std::string tmp_name(const std::string& tag) {
  static int counter = 0;
  return "/tmp/lefschetz_cli_" + std::to_string(::getpid()) + "_" + tag + "_" +
         std::to_string(counter++);
}

RunResult run_cli(const std::vector<std::string>& args) {
  std::string o = tmp_name("out"), e = tmp_name("err");
  std::string cmd = "'" + bin() + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >" + o + " 2>" + e;
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  std::remove(o.c_str());
  std::remove(e.c_str());
  return r;
}

json parse_report(const std::string& text) {
  json j = json::parse(text);
  REQUIRE(j.is_object());
  return j;
}

json without_timing(json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("registry names are unique and resolvable") {
  const auto& specs = ex::registry();
  CHECK(specs.size() >= 17);
  for (const auto& s : specs) {
    const ex::ExperimentSpec* found = ex::find_experiment(s.name);
    REQUIRE(found != nullptr);
    CHECK(found->name == s.name);
    int count = 0;
    for (const auto& t : specs) count += t.name == s.name;
    CHECK(count == 1);
  }
  CHECK(ex::find_experiment("no-such-thing") == nullptr);
}

TEST_CASE("report JSON layout and pass mapping") {
  ex::Report rep;
  rep.experiment = "demo";
  rep.checks.push_back({"good", true});
  CHECK(rep.passed());
  rep.checks.push_back({"bad", false});
  CHECK_FALSE(rep.passed());
  auto j = rep.to_json(true);
  auto keys = std::vector<std::string>{};
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"schema", "experiment", "inputs", "results", "checks",
                                         "passed", "versions", "timing"});
  CHECK(j["schema"] == 1);
  CHECK(j["passed"] == false);
  auto inner = rep.to_json(false);
  CHECK(!inner.contains("timing"));
  CHECK(!inner.contains("versions"));
}

TEST_CASE("config files parse, override, and reject malformed lines") {
  std::string path = tmp_name("cfg");
  {
    std::ofstream f(path);
    f << "# comment\n\nexperiment = bochner\n  n = 3   # trailing\nphi = \"0.5*cos2\"\n";
  }
  auto pairs = ex::parse_config_file(path);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[1] == std::pair<std::string, std::string>{"n", "3"});
  CHECK(pairs[2].second == "0.5*cos2");

  ex::ExperimentConfig cfg;
  cfg.params["n"] = "2";  // command line wins
  ex::apply_config_pairs(cfg, pairs, cfg.params);
  CHECK(cfg.experiment == "bochner");
  CHECK(cfg.params.count("phi") == 1);
  CHECK(cfg.params["n"] == "2");

  ex::ExperimentConfig other;
  other.experiment = "nakano";
  CHECK_THROWS_AS(ex::apply_config_pairs(other, pairs, {}), ex::ValidationError);

  {
    std::ofstream f(path);
    f << "just words\n";
  }
  try {
    ex::parse_config_file(path);
    FAIL("expected ValidationError");
  } catch (const ex::ValidationError& e) {
    CHECK(std::string(e.what()).find(":1: expected key = value") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("validation issues carry field paths") {
  ex::ExperimentConfig cfg;
  cfg.experiment = "bochner";
  cfg.params["n"] = "99";
  cfg.params["bogus"] = "1";
  try {
    ex::run(cfg);
    FAIL("expected ValidationError");
  } catch (const ex::ValidationError& e) {
    std::string all;
    for (const auto& s : e.issues()) all += s + "\n";
    CHECK(all.find("bochner.n:") != std::string::npos);
    CHECK(all.find("bochner.bogus: unknown parameter") != std::string::npos);
  }

  ex::ExperimentConfig empty;
  try {
    ex::run(empty);
    FAIL("expected ValidationError");
  } catch (const ex::ValidationError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].find("experiment: required") != std::string::npos);
    CHECK(e.issues()[0].find("bochner") != std::string::npos);  // lists the names
  }
}

TEST_CASE("sampling experiments demand a seed") {
  for (const char* name : {"mis-sweep", "foliation-iota", "suite-full"}) {
    ex::ExperimentConfig cfg;
    cfg.experiment = name;
    try {
      ex::run(cfg);
      FAIL("expected ValidationError for ", name);
    } catch (const ex::ValidationError& e) {
      REQUIRE(!e.issues().empty());
      CHECK(e.issues()[0].find("seed: required") != std::string::npos);
    }
  }
  ex::ExperimentConfig cfg;
  cfg.experiment = "bochner";
  cfg.params["samples"] = "2";
  CHECK_THROWS_AS(ex::run(cfg), ex::ValidationError);
  cfg.seed = 5;
  CHECK(ex::run(cfg).passed());
}

TEST_CASE("cli: worked bochner example") {
  auto r = run_cli({"bochner", "--n", "2", "--q", "1", "--cutoff", "4", "--phi", "0.3*cos1"});
  CHECK(r.code == 0);
  json j = parse_report(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["experiment"] == "bochner");
  CHECK(j["inputs"]["n"] == "2");
  CHECK(j["inputs"]["phi"] == "0.3*cos1");
  CHECK(j["results"]["max_residual"].get<double>() <= 1e-8);
  CHECK(j["passed"] == true);
  CHECK(j["versions"].contains("lefschetz_lab"));
  CHECK(j["timing"].contains("seconds"));
  bool saw_energy = false;
  for (const auto& c : j["checks"]) {
    CHECK(c["pass"] == true);
    saw_energy = saw_energy || c["name"] == "energy_identity";
  }
  CHECK(saw_energy);
  // "schema" leads the serialized report
  CHECK(r.out.rfind("{\n  \"schema\": 1,", 0) == 0);
}

TEST_CASE("cli: coherence verdict") {
  auto r = run_cli({"coherence", "--K", "6", "--degree", "3"});
  CHECK(r.code == 0);
  json j = parse_report(r.out);
  CHECK(j["results"]["verdict"] == "non-coherent witness found");
  CHECK(j["passed"] == true);
}

TEST_CASE("cli: no experiment lists requirements, exit 2") {
  auto r = run_cli({});
  CHECK(r.code == 2);
  CHECK(r.err.find("experiment: required") != std::string::npos);
}

TEST_CASE("cli: unknown parameter rejected with path, exit 2") {
  std::string path = tmp_name("badcfg");
  {
    std::ofstream f(path);
    f << "experiment = mis-siu\nbogus = 1\n";
  }
  auto r = run_cli({"--config", path});
  CHECK(r.code == 2);
  CHECK(r.err.find("mis-siu.bogus: unknown parameter") != std::string::npos);
  std::remove(path.c_str());

  auto r2 = run_cli({"bochner", "--bogus", "1"});
  CHECK(r2.code == 2);
}

TEST_CASE("cli: missing seed exits 2") {
  auto r = run_cli({"foliation-iota"});
  CHECK(r.code == 2);
  CHECK(r.err.find("seed: required") != std::string::npos);
}

TEST_CASE("cli: module errors propagate verbatim, exit 3") {
  // cluster size too small for the requested degree cap: the module throws
  auto r = run_cli({"coherence", "--K", "3", "--degree", "3"});
  CHECK(r.code == 3);
  CHECK(!r.err.empty());
}

TEST_CASE("cli: dashed and grouped spellings agree") {
  auto a = run_cli({"mis-snc", "--alphas", "3/2,9/4"});
  auto b = run_cli({"mis", "snc", "--alphas", "3/2,9/4"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(without_timing(parse_report(a.out)) == without_timing(parse_report(b.out)));

  auto c = run_cli({"foliation-eta", "--S", "1", "--T=-w^2"});
  auto d = run_cli({"foliation", "eta", "--S", "1", "--T=-w^2"});
  REQUIRE(c.code == 0);
  REQUIRE(d.code == 0);
  CHECK(without_timing(parse_report(c.out)) == without_timing(parse_report(d.out)));

  auto e = run_cli({"mis", "coherence"});
  REQUIRE(e.code == 0);
  CHECK(parse_report(e.out)["experiment"] == "coherence");
}

TEST_CASE("cli: reports are byte-stable apart from timing") {
  std::vector<std::string> args{"mis-sweep", "--count", "2", "--degree", "3", "--seed", "11"};
  auto a = run_cli(args);
  auto b = run_cli(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  json ja = parse_report(a.out), jb = parse_report(b.out);
  CHECK(ja != jb);  // timing differs
  CHECK(without_timing(ja) == without_timing(jb));
  CHECK(without_timing(ja).dump() == without_timing(jb).dump());
  CHECK(ja["inputs"]["seed"] == 11);

  auto c = run_cli({"mis-sweep", "--count", "2", "--degree", "3", "--seed", "12"});
  REQUIRE(c.code == 0);
  CHECK(without_timing(parse_report(c.out))["results"]["samples"] !=
        without_timing(ja)["results"]["samples"]);
}

TEST_CASE("cli: config file plus command-line override") {
  std::string path = tmp_name("cfg2");
  {
    std::ofstream f(path);
    f << "experiment = mis-siu\na = 1/2\nb = 9/10\nc = 23/10\ntmax = 2\n";
  }
  auto base = run_cli({"--config", path});
  REQUIRE(base.code == 0);
  CHECK(parse_report(base.out)["inputs"]["b"] == "9/10");

  auto over = run_cli({"mis-siu", "--config", path, "--b", "7/8"});
  REQUIRE(over.code == 0);
  CHECK(parse_report(over.out)["inputs"]["b"] == "7/8");

  auto clash = run_cli({"bochner", "--config", path});
  CHECK(clash.code == 2);
  CHECK(clash.err.find("config.experiment") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("cli: --out and --csv write files, stdout stays quiet") {
  std::string out = tmp_name("rep") + ".json", csv = tmp_name("tab") + ".csv";
  auto r = run_cli({"mis-jump", "--out", out, "--csv", csv});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  json j = parse_report(slurp(out));
  CHECK(j["experiment"] == "mis-jump");
  std::string table = slurp(csv);
  CHECK(table.rfind("index,t,t_decimal\n", 0) == 0);
  size_t rows = std::count(table.begin(), table.end(), '\n');
  CHECK(rows == j["results"]["jumps"].size() + 1);
  std::remove(out.c_str());
  std::remove(csv.c_str());
}

TEST_CASE("cli: smoke suite runs nine experiments and passes") {
  auto r = run_cli({"suite", "smoke"});
  REQUIRE(r.code == 0);
  json j = parse_report(r.out);
  CHECK(j["experiment"] == "suite-smoke");
  CHECK(j["results"]["level"] == "smoke");
  REQUIRE(j["results"]["experiments"].size() == 9);
  CHECK(j["checks"].size() == 9);
  for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
  for (const auto& child : j["results"]["experiments"]) {
    CHECK(child["passed"] == true);
    CHECK(!child.contains("timing"));
  }
  CHECK(j["passed"] == true);
}

// lefschetz-lab: run a named experiment (or a suite) and emit a JSON report.
//
// Every experiment is exposed three ways: as a top-level subcommand with its
// canonical dashed name (mis-snc, foliation-eta, ...), under a group command
// (mis snc, foliation eta, coherence also answers to mis coherence), and via
// `--config file` with `experiment = name` inside.  Command-line values win
// over config-file values.  Exit codes: 0 every embedded check passed,
// 1 a check failed, 2 invalid configuration, 3 experiment error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lefschetz/experiments.hpp"

namespace ex = lefschetz::experiments;

namespace {

struct CliState {
  std::string experiment;  // chosen by whichever subcommand parsed
  std::map<std::string, std::string> params;
  std::string out, csv, config, seed_text;
  int jobs = 0;  // 0 = unset (config may fill it), effective default 1
};

void attach_params(CLI::App* cmd, const ex::ExperimentSpec& spec, CliState& st) {
  for (const auto& ps : spec.params) {
    cmd->add_option_function<std::string>(
        "--" + ps.key,
        [&st, key = ps.key](const std::string& v) { st.params[key] = v; },
        ps.help);
  }
  cmd->callback([&st, name = spec.name] { st.experiment = name; });
}

int run_and_report(CliState& st) {
  ex::ExperimentConfig cfg;
  cfg.experiment = st.experiment;
  cfg.params = st.params;
  cfg.out_path = st.out;
  cfg.csv_path = st.csv;
  cfg.jobs = st.jobs;
  if (!st.seed_text.empty()) {
    try {
      std::size_t pos = 0;
      cfg.seed = std::stoull(st.seed_text, &pos);
      if (pos != st.seed_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ex::ValidationError(
          {"seed: expected an unsigned 64-bit integer (got '" + st.seed_text + "')"});
    }
  }
  if (!st.config.empty())
    ex::apply_config_pairs(cfg, ex::parse_config_file(st.config), st.params);
  if (cfg.jobs <= 0) cfg.jobs = 1;

  ex::Report rep = ex::run(cfg);
  std::string text = rep.to_json(true).dump(2) + "\n";
  if (cfg.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out_path);
    if (!f) throw std::runtime_error("cannot write '" + cfg.out_path + "'");
    f << text;
  }
  if (!cfg.csv_path.empty()) {
    std::ofstream f(cfg.csv_path);
    if (!f) throw std::runtime_error("cannot write '" + cfg.csv_path + "'");
    f << rep.csv_text();
  }
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lefschetz-lab: numerical experiments on weighted torus identities,\n"
      "multiplier-style scaling ideals, and foliated splitting sections"};
  app.require_subcommand(0, 1);
  CliState st;

  app.add_option("--out", st.out, "write the JSON report to this path (default: stdout)");
  app.add_option("--seed", st.seed_text, "seed for sampling experiments (unsigned 64-bit)");
  app.add_option("--config", st.config, "flat `key = value` config file");
  app.add_option("--jobs", st.jobs, "run independent suite experiments in parallel")
      ->check(CLI::PositiveNumber);
  app.add_option("--csv", st.csv, "also write the report's CSV table to this path");

  CLI::App* mis = app.add_subcommand("mis", "scaling-ideal experiments");
  CLI::App* fol = app.add_subcommand("foliation", "splitting-section experiments");
  mis->require_subcommand(1);
  fol->require_subcommand(1);

  for (const auto& spec : ex::registry()) {
    if (spec.name == "suite-smoke" || spec.name == "suite-full") continue;
    std::vector<CLI::App*> cmds;
    cmds.push_back(app.add_subcommand(spec.name, spec.summary));
    if (spec.name.rfind("mis-", 0) == 0)
      cmds.push_back(mis->add_subcommand(spec.name.substr(4), spec.summary));
    if (spec.name == "coherence") cmds.push_back(mis->add_subcommand("coherence", spec.summary));
    if (spec.name.rfind("foliation-", 0) == 0)
      cmds.push_back(fol->add_subcommand(spec.name.substr(10), spec.summary));
    for (CLI::App* c : cmds) {
      c->fallthrough();
      attach_params(c, spec, st);
    }
  }

  CLI::App* suite = app.add_subcommand("suite", "run an experiment battery");
  suite->fallthrough();
  std::string level;
  suite->add_option("level", level, "smoke | full")->required();
  suite->callback([&] {
    if (level != "smoke" && level != "full")
      throw CLI::ValidationError("level", "expected 'smoke' or 'full' (got '" + level + "')");
    st.experiment = "suite-" + level;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    return run_and_report(st);
  } catch (const ex::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlsis/config.hpp"
#include "nlsis/error.hpp"
#include "nlsis/runner.hpp"
#include "nlsis/suite.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal-dispersal SIS model solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario from a JSON config");
  run_cmd->add_option("--config", config_path, "Scenario config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::string suite_out;
  std::vector<int> criteria;
  auto* suite_cmd = app.add_subcommand("suite", "Run the acceptance battery");
  suite_cmd->add_option("--out", suite_out, "Output directory")->required();
  suite_cmd->add_option("--criterion", criteria, "Run only these criteria (1-12)")
      ->check(CLI::Range(1, nlsis::kCriterionCount));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const nlsis::RunRecord record = nlsis::run(nlsis::load_config(config_path), out_dir);
      for (const auto& c : record.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      }
      std::cout << "wrote " << record.outputs.size() << " files to " << out_dir << " in "
                << record.wall_seconds << " s\n";
      return record.ok ? 0 : 1;
    }
    const nlsis::SuiteReport report =
        nlsis::theorem_suite(suite_out, std::set<int>(criteria.begin(), criteria.end()));
    for (const auto& r : report.rows) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << " (" << r.seconds
                << " s): " << r.detail << '\n';
    }
    std::cout << "suite finished in " << report.wall_seconds << " s\n";
    return report.passed ? 0 : 1;
  } catch (const nlsis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

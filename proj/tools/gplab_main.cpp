#include <exception>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "gplab/config.hpp"
#include "gplab/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gross-Pitaevskii numerical laboratory"};
  app.set_version_flag("--version", gplab::run::version());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  const std::map<std::string, std::string> help{
      {"scatter", "zero-energy scattering solution and the three scattering-length routes"},
      {"groundstate", "trapped GP minimizer"},
      {"evolve-gp", "split-step GP evolution with conservation diagnostics"},
      {"evolve-manybody", "exact N-body evolution, depletion and the Gronwall monitor"},
      {"verify-ops", "Fock, renormalization and operator-bound checks"},
      {"experiment-trapped-depletion", "N * depletion of trapped ground states across N and |V|_1"},
      {"run", "run the command named in the [run] section"}};
  auto names = gplab::config::commands();
  names.push_back("run");
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config,-c", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override [run] seed");
    sub->add_option("--out", out_dir, "override [run] output_dir");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();

  try {
    auto cfg = gplab::config::parse_config(config_path);
    if (command != "run") cfg.command = command;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--out")) cfg.output_dir = out_dir;
    const auto rep = gplab::run::run(cfg);
    for (const auto& c : rep.checks)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " [" << c.anchor << "] measured " << c.measured
                << ' ' << c.relation << ' ' << c.tolerance << '\n';
    std::cout << (rep.passed() ? "all checks passed" : "some checks failed") << " (" << rep.wall_time
              << " s), report in " << cfg.output_dir << "/report.json\n";
    return rep.passed() ? 0 : 1;
  } catch (const gplab::config::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

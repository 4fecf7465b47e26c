#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "replica/experiment.hpp"
#include "replica/presets.hpp"

namespace {

// "preset:NAME" selects a built-in experiment file.
replica::ExperimentFile load(const std::string& source) {
  constexpr std::string_view prefix = "preset:";
  if (source.rfind(prefix, 0) == 0) {
    const auto name = source.substr(prefix.size());
    const auto* preset = replica::find_preset(name);
    if (!preset) throw replica::ConfigError("no preset named '" + name + "'");
    return replica::parse_experiment_file(preset->json);
  }
  return replica::load_experiment_file(source);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replica predictions and Monte Carlo checks for MAP and MMSE estimation"};
  app.require_subcommand(1);

  replica::CommandOptions opt;
  std::uint64_t seed = 0;

  std::string predict_file;
  auto* predict = app.add_subcommand("predict", "solve the replica fixed points over each sweep");
  predict->add_option("file", predict_file, "experiment file, or preset:NAME")->required();
  predict->add_option("--out-dir", opt.out_dir, "directory for the CSV outputs");

  std::string simulate_file;
  auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo harness over each sweep");
  simulate->add_option("file", simulate_file, "experiment file, or preset:NAME")->required();
  simulate->add_option("--out-dir", opt.out_dir, "directory for the CSV outputs");
  simulate->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = simulate->add_option("--seed", seed, "override every master_seed");

  std::string compare_a;
  std::string compare_b;
  auto* compare = app.add_subcommand("compare", "join two result CSVs by sweep value");
  compare->add_option("a", compare_a, "predict or simulate CSV")->required();
  compare->add_option("b", compare_b, "predict or simulate CSV")->required();
  compare->add_option("--out-dir", opt.out_dir, "directory for the comparison outputs");
  compare->add_option("--tolerance-db", opt.tolerance_db, "largest allowed gap in dB");

  auto* presets = app.add_subcommand("presets", "built-in experiment files");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "list preset names");
  std::string show_name;
  auto* show = presets->add_subcommand("show", "print a preset as JSON");
  show->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : replica::exit_config_error;
  }
  if (*seed_opt) opt.seed = seed;

  try {
    if (*predict) return replica::predict_command(load(predict_file), opt, std::cerr);
    if (*simulate) return replica::simulate_command(load(simulate_file), opt, std::cerr);
    if (*compare) return replica::compare_command(compare_a, compare_b, opt, std::cout, std::cerr);
    if (*list) {
      for (const auto& p : replica::presets()) std::cout << p.name << "\t" << p.description << '\n';
      return 0;
    }
    if (*show) {
      const auto* p = replica::find_preset(show_name);
      if (!p) throw replica::ConfigError("no preset named '" + show_name + "'");
      std::cout << p->json << '\n';
      return 0;
    }
  } catch (const replica::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return replica::exit_config_error;
  } catch (const replica::NonConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return replica::exit_nonconvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return replica::exit_config_error;
  }
  return 0;
}

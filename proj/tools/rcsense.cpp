// rcsense command line: runs one experiment described by a TOML config.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "rcsense/commands.hpp"
#include "rcsense/config.hpp"
#include "rcsense/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rcsense: reservoir computing and SWEET sensing experiments"};
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool check = false;
  bool validate = false;

  app.add_option("--config", config_path, "experiment config (TOML)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads for sweep runs")->check(CLI::PositiveNumber);
  app.add_flag("--check", check, "verify an existing output directory against its manifest");
  app.add_flag("--validate-integration", validate,
               "repeat each SWEET run at dt/10 and require tau_c within 1%");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const rcsense::ExperimentConfig cfg = rcsense::load_config(config_path);
    rcsense::RunOptions opts;
    opts.out_dir = out_dir;
    if (*seed_opt) opts.seed = seed;
    opts.jobs = jobs;
    opts.validate_integration = validate;

    if (check) {
      const rcsense::CheckReport rep = rcsense::check_experiment(cfg, opts, std::cerr);
      return rep.ok ? 0 : 2;
    }
    const rcsense::RunReport rep = rcsense::run_experiment(cfg, opts, std::cerr);
    std::cout << rep.out_dir.string() << "\n";
    return 0;
  } catch (const rcsense::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rcsense::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

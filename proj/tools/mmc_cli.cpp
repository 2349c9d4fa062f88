// Command-line front end: run, gradcheck, init.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical or I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mmc/config.hpp"
#include "mmc/driver.hpp"
#include "mmc/errors.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

mmc::RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mmc::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return mmc::parse_config(text.str());
}

int cmd_run(const std::string& path, const std::string& output_dir, int max_iterations, bool quiet) {
  mmc::RunConfig config = load_config(path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (max_iterations > 0) config.max_iterations = max_iterations;

  const auto problem = mmc::resolve_problem(config);
  std::printf("problem: %s  mesh %dx%d  volume limit %.3g\n", std::string(mmc::to_string(config.problem)).c_str(),
              problem.mesh.nx(), problem.mesh.ny(), problem.spec.volume_fraction_max);

  auto progress = [&](const mmc::IterationRecord& r) {
    if (!quiet) {
      std::printf("it %4d  compliance %12.6f  volume fraction %.5f  change %.3e\n", r.iteration, r.compliance,
                  r.volume_fraction, r.max_design_change);
    }
  };
  const auto result = mmc::run_optimization(config, true, progress);
  const auto& last = result.history.back();
  std::printf("components: %zu\n", result.final_design.size());
  std::printf("design variables: %zu\n", result.design_variable_count);
  std::printf("iterations: %d (%s)\n", last.iteration, result.converged ? "converged" : "iteration limit");
  std::printf("final compliance: %.6f\n", last.compliance);
  std::printf("final volume fraction: %.6f\n", last.volume_fraction);
  std::printf("outputs written to %s\n", config.output_dir.c_str());
  return 0;
}

int cmd_gradcheck(const std::string& path, long long seed) {
  mmc::RunConfig config = load_config(path);
  const auto report = mmc::gradient_check(config, seed >= 0 ? static_cast<std::uint64_t>(seed) : config.seed);
  std::printf("%-4s %-3s %16s %16s %16s %16s\n", "comp", "var", "dC analytic", "dC fd", "dV analytic", "dV fd");
  static const char* names[] = {"x0", "y0", "L", "t", "p"};
  for (std::size_t j = 0; j < report.analytic_compliance.size(); ++j) {
    std::printf("%-4zu %-3s %16.8e %16.8e %16.8e %16.8e\n", j / 5 + 1, names[j % 5], report.analytic_compliance[j],
                report.fd_compliance[j], report.analytic_volume[j], report.fd_volume[j]);
  }
  const double worst = std::max(report.max_rel_error_compliance, report.max_rel_error_volume);
  std::printf("max relative error (compliance): %.3e\n", report.max_rel_error_compliance);
  std::printf("max relative error (volume): %.3e\n", report.max_rel_error_volume);
  std::printf("max relative error: %.3e\n", worst);
  return worst <= 1e-3 ? 0 : kExitNumerical;
}

int cmd_init(const std::string& problem, const std::string& out_path) {
  const std::string text = mmc::default_config_text(problem);
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitNumerical;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-compliance topology optimization with moving deformable components"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int max_iterations = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an optimization described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--output-dir", output_dir, "Override output.directory");
  run->add_option("--max-iterations", max_iterations, "Override optimizer.max_iterations")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Do not print per-iteration progress");

  long long seed = -1;
  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with central finite differences");
  grad->add_option("config", config_path, "Config file")->required();
  grad->add_option("--seed", seed, "Random design seed (defaults to the config seed)");

  std::string problem;
  std::string out_path;
  auto* init = app.add_subcommand("init", "Write a default config for a benchmark problem");
  init->add_option("problem", problem, "short_beam_a, short_beam_b or mbb")->required();
  init->add_option("-o,--output", out_path, "Destination file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, output_dir, max_iterations, quiet);
    if (*grad) return cmd_gradcheck(config_path, seed);
    if (*init) return cmd_init(problem, out_path);
  } catch (const mmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mmc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}

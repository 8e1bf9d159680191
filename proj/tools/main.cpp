/**
 * Command-line driver: `fedosov <command> --config <file> [--out <file>]`.
 * The report JSON goes to --out when given, stdout otherwise. Exit codes:
 * 0 every check passed, 1 a mathematical check failed, 2 unusable input.
 */

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fedosov/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact Fedosov star products on polynomial symplectic charts"};
  std::string command, config_path, out_path;
  app.add_option("command", command,
                 "one of: validate build star cochains assoc-check naturality "
                 "extract-connection equiv-apply equiv-construct derivation-check "
                 "moment-map cartan-check invariance-check transport")
      ->required();
  app.add_option("--config", config_path, "job configuration (JSON)")->required();
  app.add_option("--out", out_path, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints help or the error message
    return fedosov::cli::kExitInputError;
  }

  fedosov::cli::Report report;
  try {
    const fedosov::cli::JobConfig cfg = fedosov::cli::load_config(config_path);
    report = fedosov::cli::run_command(cfg, command);
  } catch (const fedosov::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fedosov::cli::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fedosov::cli::kExitInputError;
  }

  const std::string text = report.to_string();
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return fedosov::cli::kExitInputError;
    }
    out << text;
  }
  return report.pass ? fedosov::cli::kExitPass : fedosov::cli::kExitCheckFailed;
}

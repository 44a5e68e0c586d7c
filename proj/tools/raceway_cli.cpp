// raceway: optimal mixing permutations for a layered raceway pond.
//
//   raceway optimize --q 0.01 --T 1000 --workers 8
//   raceway sweep --N 7 --T 1,500,1000 --out fig4.csv
//   raceway ratios --out fig6.csv
//   raceway simulate --perm "2 1 3" --N 3 --laps 50
//
// Exit codes: 0 success, 1 configuration error, 2 cap or budget exceeded,
// 3 numerical invariant violation.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "raceway/config.hpp"
#include "raceway/errors.hpp"
#include "raceway/experiments.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitLimit = 2;
constexpr int kExitInvariant = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw raceway::InvalidInput("cannot read params file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal mixing permutations for microalgae raceway ponds"};
  app.require_subcommand(1);
  // --h is the pond depth, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");

  std::string params_file;
  std::map<std::string, std::string> flags;
  const std::pair<const char*, const char*> options[] = {
      {"Is", "surface light grid (umol/m^2/s): list, lin:a:b:n or log:a:b:n"},
      {"q", "fraction of light reaching the bottom, grid"},
      {"T", "lap duration grid (s)"},
      {"N", "number of layers"},
      {"h", "pond depth (m)"},
      {"laps", "laps to simulate"},
      {"perm", "permutation in one-line notation, e.g. \"2 3 1\""},
      {"c0", "initial state: zero, fixed, or a comma list of N values"},
      {"workers", "worker threads"},
      {"out", "output file (default: standard output)"},
      {"checkpoint", "checkpoint file for resumable searches"},
      {"budget", "maximum permutation evaluations"},
      {"seed", "seed for sampled checks"},
      {"verify-samples", "re-evaluate this many random permutations after optimize"},
  };

  for (const char* name : {"optimize", "sweep", "ratios", "simulate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--params-file", params_file,
                    "key=value file; command-line flags take precedence");
    for (const auto& [flag, help] : options) {
      sub->add_option_function<std::string>(
          std::string("--") + flag,
          [&flags, key = std::string(flag)](const std::string& v) {
            flags[key == "verify-samples" ? "verify_samples" : key] = v;
          },
          help);
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    auto config = raceway::ExperimentConfig::defaults(raceway::parse_mode(command));
    if (!params_file.empty()) {
      config.apply_text(read_file(params_file));
      config.mode = raceway::parse_mode(command);
    }
    for (const auto& [key, value] : flags) config.set(key, value);
    config.validate();

    if (config.out.empty()) {
      raceway::run(config, std::cout, std::cerr);
    } else {
      std::ostringstream buffer;
      raceway::run(config, buffer, std::cerr);
      std::ofstream f(config.out, std::ios::trunc);
      if (!f) throw raceway::InvalidInput("cannot write " + config.out);
      f << buffer.str();
    }
    return 0;
  } catch (const raceway::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const raceway::LimitExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitLimit;
  } catch (const raceway::InvariantViolation& e) {
    std::cerr << "numerical invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

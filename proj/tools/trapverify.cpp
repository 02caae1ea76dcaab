// trapverify: verify trapping regions of multi-agent learning dynamics.
//
//   trapverify verify --model dirac_gan --epsilon 0.01 --box=-0.1:0.1,-0.1:0.1
//   trapverify simulate --model cournot --box 0.15:0.3,0.1:0.3 --gamma auto --starts 4 --out traj.csv
//   trapverify gamma-bound --model cournot --box 0.15:0.3,0.1:0.3
//   trapverify models

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "trapping/cli/commands.hpp"

namespace {

using trapping::cli::FlagValues;

template <typename T>
void optional_flag(CLI::App& app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app.add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_experiment_flags(CLI::App& app, FlagValues& f, std::string& out) {
  optional_flag(app, "--config", f.config_path, "JSON experiment config; flags override its values");
  optional_flag(app, "--model", f.model, "dirac_gan | cournot | affine | external_table");
  optional_flag(app, "--epsilon", f.epsilon, "Dirac-GAN coupling epsilon");
  optional_flag(app, "--cournot-params", f.cournot_params, "JSON file with a, b, c");
  optional_flag(app, "--affine-params", f.affine_params, "JSON file with A, b");
  optional_flag(app, "--table", f.table, "JSON file with axes, values");
  optional_flag(app, "--box", f.box, "candidate box: lo:hi,lo:hi,...");
  optional_flag(app, "--mode", f.mode, "bsp | sampling");
  optional_flag(app, "--lipschitz", f.lipschitz, "auto | <number>");
  optional_flag(app, "--max-depth", f.max_depth, "subdivision depth cap per face (default 60)");
  optional_flag(app, "--margin", f.margin, "extra safety slack (default 0)");
  optional_flag(app, "--points-per-dim", f.points_per_dim, "sampling grid points per face dimension");
  optional_flag(app, "--gamma", f.gamma, "auto | <number>");
  optional_flag(app, "--steps", f.steps, "simulation steps");
  optional_flag(app, "--starts", f.starts, "number of random starts in the box");
  optional_flag(app, "--x0", f.x0, "explicit starts: a,b;c,d");
  optional_flag(app, "--stride", f.stride, "record every n-th point");
  optional_flag(app, "--seed", f.seed, "seed for random starts");
  optional_flag(app, "--threads", f.threads, "worker thread cap (0 = all cores)");
  app.add_flag("--oracle", f.oracle, "cross-check with the dense boundary oracle");
  app.add_option("--out", out, "output path (certificate or trajectory CSV); stdout when omitted");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trapping-region verification for multi-agent learning dynamics"};
  app.require_subcommand(1);

  FlagValues flags;
  std::string out;
  auto* verify = app.add_subcommand("verify", "verify a candidate box; writes a certificate");
  auto* simulate = app.add_subcommand("simulate", "simulate learning trajectories; writes CSV");
  auto* gamma = app.add_subcommand("gamma-bound", "print the certified learning-rate bound");
  auto* models = app.add_subcommand("models", "list available models");
  for (auto* sub : {verify, simulate, gamma}) add_experiment_flags(*sub, flags, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : trapping::cli::kExitUsage;
  }

  try {
    if (models->parsed()) {
      trapping::cli::list_models(std::cout);
      return 0;
    }
    auto config = trapping::cli::parse_config(flags);
    if (verify->parsed()) return trapping::cli::run_verify(config, out, std::cout, std::cerr);
    if (simulate->parsed()) return trapping::cli::run_simulate(config, out, std::cout, std::cerr);
    if (gamma->parsed()) return trapping::cli::run_gamma_bound(config, out, std::cout, std::cerr);
  } catch (const trapping::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return trapping::cli::kExitUsage;
  } catch (const trapping::EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return trapping::cli::kExitUndecided;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return trapping::cli::kExitUsage;
  }
  return trapping::cli::kExitUsage;
}

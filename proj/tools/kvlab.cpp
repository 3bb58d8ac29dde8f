// kvlab steady|spectral|evolve|verify|sweep --config FILE [--out DIR]
//       [--kappas LIST] [--allow-unstable]

#include <iostream>

#include <CLI11.hpp>

#include "kvlab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decay experiments for Kelvin-Voigt perturbations of a steady flow"};
  app.require_subcommand(1);
  kvlab::CommandOptions opt;
  opt.log = &std::cerr;

  auto add = [&](const char* name, const char* help, bool needs_config) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* c = sub->add_option("--config", opt.config_path, "flat key = value config, or a run manifest");
    if (needs_config) c->required();
    sub->add_option("--out", opt.out_dir, "artifact directory")->capture_default_str();
    sub->add_flag("--allow-unstable", opt.allow_unstable, "run even when lambda0 <= 0");
    return sub;
  };
  CLI::App* steady = add("steady", "solve the steady state and check the a priori bounds", true);
  CLI::App* spectral = add("spectral", "compute the spectral constants of the stored steady state", true);
  CLI::App* evolve = add("evolve", "integrate the perturbation and write the time series", true);
  CLI::App* verify = add("verify", "check the decay claims on a run directory", false);
  CLI::App* sweep = add("sweep", "kappa-uniformity experiment", true);
  sweep->add_option("--kappas", opt.kappas, "comma-separated kappa values")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kvlab::exit_config_error;
  }

  if (steady->parsed()) return kvlab::cmd_steady(opt);
  if (spectral->parsed()) return kvlab::cmd_spectral(opt);
  if (evolve->parsed()) return kvlab::cmd_evolve(opt);
  if (verify->parsed()) return kvlab::cmd_verify(opt);
  if (sweep->parsed()) return kvlab::cmd_sweep(opt);
  return kvlab::exit_config_error;
}

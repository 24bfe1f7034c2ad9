// Copyright 2026 The dpamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end: sweeps parameter grids, compares amplification
// methods, runs compositions, and verifies the brute-force oracle.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dpamp/cli.hpp"
#include "dpamp/errors.hpp"

namespace {

using dpamp::cli::ExperimentConfig;
using dpamp::cli::GridSpecs;

struct Options {
  ExperimentConfig config;
  GridSpecs specs;
  std::string config_path;
};

void AddCommonOptions(CLI::App* cmd, Options* opts) {
  ExperimentConfig* config = &opts->config;
  cmd->add_option("--mech", config->mechanism, "Base mechanism")
      ->check(CLI::IsMember({"gaussian", "laplace", "rr"}));
  cmd->add_option("--sigma", config->sigma, "Gaussian noise scale");
  cmd->add_option("--lambda", config->lambda, "Laplace noise scale");
  cmd->add_option("--theta", config->theta,
                  "Randomized-response true response probability");
  cmd->add_option("--sensitivity", config->sensitivity,
                  "L2 / L1 sensitivity of the base mechanism");
  cmd->add_option("--scheme", config->scheme, "Subsampling scheme")
      ->check(CLI::IsMember({"poisson", "wor", "wr", "epoch"}));
  cmd->add_option("--rate", config->rate, "Poisson inclusion probability");
  cmd->add_option("--dataset-size", config->dataset_size, "Dataset size N");
  cmd->add_option("--batch-size", config->batch_size, "Batch size q");
  cmd->add_option("--group", config->group_size, "Group size K");
  cmd->add_option("--split", opts->specs.split,
                  "Explicit relation split \"K+,K-\" (overrides --group sweep)");
  cmd->add_option("--methods", opts->specs.methods,
                  "Comma-separated method list");
  cmd->add_option("--eps-grid", opts->specs.eps,
                  "Epsilon grid (lo:hi:n, log:lo:hi:n, or comma list)");
  cmd->add_option("--alpha-grid", opts->specs.alpha,
                  "Order grid (int:lo:hi, log:lo:hi:n, or comma list)");
  cmd->add_option("--grid-step", config->grid_step,
                  "PLD discretization interval");
  cmd->add_option("--delta-target", config->delta_target,
                  "Delta target for epsilon readouts");
  cmd->add_option("--epsilon", config->fixed_epsilon,
                  "Fixed epsilon for delta readouts");
  cmd->add_flag("--optimistic", config->optimistic,
                "Use optimistic instead of pessimistic estimates");
  cmd->add_option("--bisection-tol", config->bisection_tol,
                  "Privacy-loss bisection tolerance");
  cmd->add_option("--format", config->format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", config->out_path, "Output path (default stdout)");
  cmd->add_option("--workers", config->workers, "Worker thread count");
  cmd->add_option("--seed", config->seed, "Seed for randomized checks");
  cmd->add_option("--config", opts->config_path,
                  "Declarative key=value config file; flags win");
}

// Config-file values fill in everything the command line left untouched.
void MergeConfigFile(CLI::App* cmd, Options* opts) {
  if (opts->config_path.empty()) return;
  for (const auto& [key, value] :
       dpamp::cli::read_config_file(opts->config_path)) {
    const std::string flag = "--" + key;
    if (cmd->get_option_no_throw(flag) != nullptr && cmd->count(flag) > 0) {
      continue;  // explicit flags win
    }
    dpamp::cli::apply_config_entry(opts->config, opts->specs, key, value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dpamp: privacy amplification accounting for subsampled mechanisms"};
  app.require_subcommand(1);

  Options opts;

  CLI::App* profile = app.add_subcommand(
      "profile", "delta(epsilon) curves for group privacy methods");
  AddCommonOptions(profile, &opts);

  CLI::App* rdp =
      app.add_subcommand("rdp", "rho(alpha) curves for RDP methods");
  AddCommonOptions(rdp, &opts);

  CLI::App* compose = app.add_subcommand(
      "compose", "privacy under T-fold self-composition (PLD or RDP)");
  AddCommonOptions(compose, &opts);
  compose->add_option("--iterations", opts.specs.iterations,
                      "Iteration counts (comma list or log:lo:hi:n)");
  compose->add_option("--accountant", opts.config.accountant,
                      "Accounting backend")
      ->check(CLI::IsMember({"pld", "rdp"}));
  compose->add_option("--conversion", opts.config.conversion,
                      "RDP-to-ADP conversion formula")
      ->check(CLI::IsMember({"standard", "improved"}));

  CLI::App* verify = app.add_subcommand(
      "oracle-verify", "brute-force verification of transport bounds");
  verify->add_option("--fixture", opts.config.fixture_paths,
                     "Instance fixture JSON paths");
  verify->add_option("--random", opts.config.random_count,
                     "Number of random instances to verify");
  verify->add_option("--seed", opts.config.seed, "Random seed");
  verify->add_option("--out", opts.config.out_path,
                     "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dpamp::cli::kExitOk : dpamp::cli::kExitUsage;
  }

  try {
    for (CLI::App* cmd : {profile, rdp, compose}) {
      if (cmd->parsed()) MergeConfigFile(cmd, &opts);
    }
    dpamp::cli::finalize_config(opts.config, opts.specs);
    if (profile->parsed()) return dpamp::cli::cmd_profile(opts.config);
    if (rdp->parsed()) return dpamp::cli::cmd_rdp(opts.config);
    if (compose->parsed()) return dpamp::cli::cmd_compose(opts.config);
    if (verify->parsed()) return dpamp::cli::cmd_oracle_verify(opts.config);
  } catch (const dpamp::InvalidArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return dpamp::cli::kExitUsage;
  } catch (const dpamp::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return dpamp::cli::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return dpamp::cli::kExitUsage;
  }
  return dpamp::cli::kExitUsage;
}

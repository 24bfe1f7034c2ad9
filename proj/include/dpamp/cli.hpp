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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dpamp/amplification.hpp"

namespace dpamp::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct ExperimentConfig {
  // Mechanism.
  std::string mechanism = "gaussian";  // gaussian | laplace | rr
  double sigma = 1.0;
  double lambda = 1.0;
  double theta = 0.75;
  double sensitivity = 1.0;

  // Subsampling scheme.
  std::string scheme = "poisson";  // poisson | wor | wr | epoch
  double rate = 0.1;
  int dataset_size = 0;
  int batch_size = 0;

  // Group privacy.
  int group_size = 1;
  bool has_split = false;
  int split_k_plus = 0;
  int split_k_minus = 0;

  // Grids (ascending).
  std::vector<double> eps_grid;
  std::vector<double> alpha_grid;
  std::vector<std::int64_t> iteration_grid;

  // Methods to evaluate.
  std::vector<std::string> methods;

  // Accounting.
  std::string accountant = "pld";      // pld | rdp
  std::string conversion = "improved"; // standard | improved
  double grid_step = 1e-3;
  double tail_mass_cutoff = 1.928749847963918e-22;  // exp(-50)
  double compose_truncation = 1e-15;
  double fixed_epsilon = 2.0;
  double delta_target = 1e-6;
  bool optimistic = false;

  // Numerics.
  double bisection_tol = 1e-6;
  double quadrature_tol = 1e-10;

  // Output.
  std::string out_path;       // empty = stdout
  std::string format = "csv"; // csv | json
  int workers = 1;
  std::uint64_t seed = 0;

  // oracle-verify inputs.
  std::vector<std::string> fixture_paths;
  int random_count = 0;

  amplification::BaseMechanismSpec base_mechanism() const;
  amplification::SubsamplingScheme subsampling_scheme() const;
};

struct CurveRow {
  double x = 0;
  double value = 0;
  std::string method;
  int group_size = 1;
  bool clipped = false;
};

struct CurveRecord {
  std::string x_name;      // "epsilon" | "alpha" | "iterations"
  std::string value_name;  // "delta" | "rho" | "epsilon"
  std::vector<CurveRow> rows;
};

// Default grids: 121 equidistant epsilons in [0, 4]; integer orders 2..1000.
std::vector<double> default_epsilon_grid();
std::vector<double> default_alpha_grid();

// Grid specs: "lo:hi:n" (linear), "log:lo:hi:n", "int:lo:hi", or a comma
// list of values.
std::vector<double> parse_grid(const std::string& spec);
std::vector<std::int64_t> parse_iteration_grid(const std::string& spec);

// Deferred string-valued options that need post-parse interpretation.
struct GridSpecs {
  std::string eps;
  std::string alpha;
  std::string methods;
  std::string split;
  std::string iterations;
};

// Reads a declarative key=value config file ('#' comments, blank lines and
// surrounding quotes allowed). Keys are the long flag names without dashes.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies one config entry; throws InvalidArgumentError on unknown keys.
void apply_config_entry(ExperimentConfig& config, GridSpecs& specs,
                        const std::string& key, const std::string& value);

// Resolves grid/method/split specs into the config (empty specs keep the
// current values).
void finalize_config(ExperimentConfig& config, const GridSpecs& specs);

CurveRecord run_profile(const ExperimentConfig& config);
CurveRecord run_rdp(const ExperimentConfig& config);
CurveRecord run_compose(const ExperimentConfig& config);
nlohmann::json run_oracle_verify(const ExperimentConfig& config);

void write_csv(const CurveRecord& record, std::ostream& out);
void write_json(const CurveRecord& record, std::ostream& out);

// Full subcommands: run, serialize to config.out_path (or stdout), map
// errors to exit codes.
int cmd_profile(const ExperimentConfig& config);
int cmd_rdp(const ExperimentConfig& config);
int cmd_compose(const ExperimentConfig& config);
int cmd_oracle_verify(const ExperimentConfig& config);

}  // namespace dpamp::cli

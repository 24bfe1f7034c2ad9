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
#include "dpamp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dpamp/accounting.hpp"
#include "dpamp/errors.hpp"
#include "dpamp/oracle.hpp"

namespace dpamp::cli {

namespace {

using amplification::BaseMechanismSpec;
using amplification::SubsamplingScheme;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Deterministic double formatting for byte-identical outputs.
std::string FormatDouble(double v) {
  if (std::isnan(v)) throw NumericalError("refusing to serialize NaN");
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::vector<std::string> SplitCommaList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Runs f(i) for i in [0, count) on config.workers threads; results are
// gathered by index, so output order is deterministic.
void ParallelFor(int workers, std::size_t count,
                 const std::function<void(std::size_t)>& f) {
  workers = std::max(1, workers);
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int spawn = std::min<int>(workers, static_cast<int>(count));
  threads.reserve(spawn);
  for (int t = 0; t < spawn; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

void ValidateMethods(const ExperimentConfig& config,
                     const std::set<std::string>& allowed) {
  if (config.methods.empty()) {
    throw InvalidArgumentError("methods list must be nonempty");
  }
  for (const auto& m : config.methods) {
    if (allowed.count(m) == 0) {
      throw InvalidArgumentError("unknown method: " + m);
    }
  }
}

std::vector<amplification::GroupRelation> RelationSplits(
    const ExperimentConfig& config) {
  if (config.has_split) {
    return {{config.split_k_plus, config.split_k_minus}};
  }
  std::vector<amplification::GroupRelation> splits;
  for (int k_minus = 0; k_minus <= config.group_size; ++k_minus) {
    splits.push_back({config.group_size - k_minus, k_minus});
  }
  return splits;
}

double SpecificGroupDelta(const ExperimentConfig& config, double epsilon) {
  const BaseMechanismSpec mech = config.base_mechanism();
  std::vector<divergence::CandidatePair> candidates;
  for (const auto& split : RelationSplits(config)) {
    auto set = amplification::poisson_group_pair(mech, config.rate, split);
    for (auto& pair : set.pairs) candidates.push_back(std::move(pair));
  }
  divergence::EvalOptions eval;
  eval.method = divergence::Method::kLossBisection;
  eval.bisection_tol = config.bisection_tol;
  eval.direction = config.optimistic ? divergence::Direction::kOptimistic
                                     : divergence::Direction::kPessimistic;
  return divergence::divergence_of_candidates(candidates, std::exp(epsilon),
                                              divergence::Kind::kHockeyStick,
                                              eval)
      .value;
}

// Specific single-iteration RDP rho at any order > 1.
double SpecificGroupRho(const ExperimentConfig& config, double alpha) {
  const BaseMechanismSpec mech = config.base_mechanism();
  std::vector<divergence::CandidatePair> candidates;
  for (const auto& split : RelationSplits(config)) {
    auto set = amplification::poisson_group_pair(mech, config.rate, split);
    for (auto& pair : set.pairs) candidates.push_back(std::move(pair));
  }
  divergence::EvalOptions eval;
  eval.quadrature_tol = config.quadrature_tol;
  const auto v = divergence::divergence_of_candidates(
      candidates, alpha, divergence::Kind::kRenyiMoment, eval);
  return std::max(0.0, v.log_value / (alpha - 1.0));
}

bool IsIntegerOrder(double alpha) {
  return std::abs(alpha - std::round(alpha)) < 1e-9 && alpha >= 2;
}

// Orders needed to evaluate the post-hoc RDP transform at `alpha` for a
// power-of-two group size.
void CollectPosthocOrders(double alpha, int group_size,
                          std::set<double>& orders) {
  orders.insert(alpha);
  if (group_size <= 1) return;
  CollectPosthocOrders(2.0 * alpha, group_size / 2, orders);
  CollectPosthocOrders(2.0 * alpha - 1.0, group_size / 2, orders);
}

curves::RdpCurve SpecificCurveAtOrders(const ExperimentConfig& config,
                                       const std::set<double>& orders) {
  const std::vector<double> order_list(orders.begin(), orders.end());
  curves::RdpCurve curve;
  curve.points.resize(order_list.size());
  ParallelFor(config.workers, order_list.size(), [&](std::size_t i) {
    curve.points[i] = {order_list[i], SpecificGroupRho(config, order_list[i])};
  });
  return curve;
}

}  // namespace

BaseMechanismSpec ExperimentConfig::base_mechanism() const {
  if (mechanism == "gaussian") {
    return BaseMechanismSpec::Gaussian(sigma, sensitivity);
  }
  if (mechanism == "laplace") {
    return BaseMechanismSpec::Laplace(lambda, sensitivity);
  }
  if (mechanism == "rr") return BaseMechanismSpec::RandomizedResponse(theta);
  throw InvalidArgumentError("unknown mechanism: " + mechanism);
}

SubsamplingScheme ExperimentConfig::subsampling_scheme() const {
  if (scheme == "poisson") return SubsamplingScheme::Poisson(rate);
  if (scheme == "wor") {
    return SubsamplingScheme::WithoutReplacement(dataset_size, batch_size);
  }
  if (scheme == "wr") {
    return SubsamplingScheme::WithReplacement(dataset_size, batch_size);
  }
  if (scheme == "epoch") {
    return SubsamplingScheme::PermutePartition(dataset_size);
  }
  throw InvalidArgumentError("unknown scheme: " + scheme);
}

std::vector<double> default_epsilon_grid() {
  std::vector<double> grid;
  grid.reserve(121);
  for (int i = 0; i <= 120; ++i) grid.push_back(4.0 * i / 120.0);
  return grid;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  grid.reserve(999);
  for (int a = 2; a <= 1000; ++a) grid.push_back(a);
  return grid;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  if (spec.rfind("int:", 0) == 0) {
    std::stringstream ss(spec.substr(4));
    std::string lo_s, hi_s;
    std::getline(ss, lo_s, ':');
    std::getline(ss, hi_s, ':');
    const int lo = std::stoi(lo_s);
    const int hi = std::stoi(hi_s);
    for (int a = lo; a <= hi; ++a) grid.push_back(a);
  } else if (spec.rfind("log:", 0) == 0) {
    std::stringstream ss(spec.substr(4));
    std::string lo_s, hi_s, n_s;
    std::getline(ss, lo_s, ':');
    std::getline(ss, hi_s, ':');
    std::getline(ss, n_s, ':');
    const double lo = std::stod(lo_s);
    const double hi = std::stod(hi_s);
    const int n = std::stoi(n_s);
    if (!(lo > 0) || !(hi > lo) || n < 2) {
      throw InvalidArgumentError("bad log grid spec: " + spec);
    }
    for (int i = 0; i < n; ++i) {
      grid.push_back(
          std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
    }
  } else if (spec.find(':') != std::string::npos) {
    std::stringstream ss(spec);
    std::string lo_s, hi_s, n_s;
    std::getline(ss, lo_s, ':');
    std::getline(ss, hi_s, ':');
    std::getline(ss, n_s, ':');
    const double lo = std::stod(lo_s);
    const double hi = std::stod(hi_s);
    const int n = std::stoi(n_s);
    if (n < 1 || (n > 1 && !(hi >= lo))) {
      throw InvalidArgumentError("bad grid spec: " + spec);
    }
    for (int i = 0; i < n; ++i) {
      grid.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    }
  } else {
    for (const auto& item : SplitCommaList(spec)) {
      grid.push_back(std::stod(item));
    }
  }
  if (grid.empty()) throw InvalidArgumentError("empty grid spec: " + spec);
  std::sort(grid.begin(), grid.end());
  return grid;
}

std::vector<std::int64_t> parse_iteration_grid(const std::string& spec) {
  std::vector<std::int64_t> grid;
  if (spec.rfind("log:", 0) == 0 || spec.find(':') != std::string::npos) {
    for (double v : parse_grid(spec)) {
      grid.push_back(static_cast<std::int64_t>(std::llround(v)));
    }
  } else {
    for (const auto& item : SplitCommaList(spec)) grid.push_back(std::stoll(item));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || grid.front() < 1) {
    throw InvalidArgumentError("iteration grid must contain integers >= 1");
  }
  return grid;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open config file: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
      s = s.substr(1, s.size() - 2);
    }
    return s;
  };
  while (std::getline(in, line)) {
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    const auto equals = line.find('=');
    if (equals == std::string::npos) continue;
    const std::string key = trim(line.substr(0, equals));
    if (key.empty()) continue;
    entries[key] = trim(line.substr(equals + 1));
  }
  return entries;
}

void apply_config_entry(ExperimentConfig& config, GridSpecs& specs,
                        const std::string& key, const std::string& value) {
  auto as_bool = [&] {
    return value == "1" || value == "true" || value == "yes";
  };
  if (key == "mech") {
    config.mechanism = value;
  } else if (key == "sigma") {
    config.sigma = std::stod(value);
  } else if (key == "lambda") {
    config.lambda = std::stod(value);
  } else if (key == "theta") {
    config.theta = std::stod(value);
  } else if (key == "sensitivity") {
    config.sensitivity = std::stod(value);
  } else if (key == "scheme") {
    config.scheme = value;
  } else if (key == "rate") {
    config.rate = std::stod(value);
  } else if (key == "dataset-size") {
    config.dataset_size = std::stoi(value);
  } else if (key == "batch-size") {
    config.batch_size = std::stoi(value);
  } else if (key == "group") {
    config.group_size = std::stoi(value);
  } else if (key == "split") {
    specs.split = value;
  } else if (key == "methods") {
    specs.methods = value;
  } else if (key == "eps-grid") {
    specs.eps = value;
  } else if (key == "alpha-grid") {
    specs.alpha = value;
  } else if (key == "iterations") {
    specs.iterations = value;
  } else if (key == "accountant") {
    config.accountant = value;
  } else if (key == "conversion") {
    config.conversion = value;
  } else if (key == "grid-step") {
    config.grid_step = std::stod(value);
  } else if (key == "epsilon") {
    config.fixed_epsilon = std::stod(value);
  } else if (key == "delta-target") {
    config.delta_target = std::stod(value);
  } else if (key == "optimistic") {
    config.optimistic = as_bool();
  } else if (key == "bisection-tol") {
    config.bisection_tol = std::stod(value);
  } else if (key == "format") {
    config.format = value;
  } else if (key == "out") {
    config.out_path = value;
  } else if (key == "workers") {
    config.workers = std::stoi(value);
  } else if (key == "seed") {
    config.seed = std::stoull(value);
  } else {
    throw InvalidArgumentError("unknown config key: " + key);
  }
}

void finalize_config(ExperimentConfig& config, const GridSpecs& specs) {
  if (!specs.eps.empty()) config.eps_grid = parse_grid(specs.eps);
  if (!specs.alpha.empty()) config.alpha_grid = parse_grid(specs.alpha);
  if (!specs.iterations.empty()) {
    config.iteration_grid = parse_iteration_grid(specs.iterations);
  }
  if (!specs.methods.empty()) {
    config.methods.clear();
    for (const auto& item : SplitCommaList(specs.methods)) {
      config.methods.push_back(item);
    }
  }
  if (!specs.split.empty()) {
    const auto comma = specs.split.find(',');
    if (comma == std::string::npos) {
      throw InvalidArgumentError("split expects \"K+,K-\"");
    }
    config.has_split = true;
    config.split_k_plus = std::stoi(specs.split.substr(0, comma));
    config.split_k_minus = std::stoi(specs.split.substr(comma + 1));
  }
}

CurveRecord run_profile(const ExperimentConfig& config) {
  ValidateMethods(config, {"specific", "agnostic", "posthoc", "wor-profile"});
  const auto eps_grid =
      config.eps_grid.empty() ? default_epsilon_grid() : config.eps_grid;

  CurveRecord record;
  record.x_name = "epsilon";
  record.value_name = "delta";
  record.rows.resize(eps_grid.size() * config.methods.size());

  accounting::ProfileOptions profile_options;
  profile_options.bisection_tol = config.bisection_tol;
  profile_options.direction = config.optimistic
                                  ? divergence::Direction::kOptimistic
                                  : divergence::Direction::kPessimistic;

  ParallelFor(config.workers, record.rows.size(), [&](std::size_t idx) {
    const std::size_t m = idx / eps_grid.size();
    const std::size_t g = idx % eps_grid.size();
    const std::string& method = config.methods[m];
    const double eps = eps_grid[g];
    double delta;
    if (method == "wor-profile") {
      divergence::EvalOptions eval;
      eval.quadrature_tol = config.quadrature_tol;
      delta = amplification::wor_substitution_profile(
          config.base_mechanism(), config.dataset_size, config.batch_size, eps,
          eval);
    } else if (method == "specific" && config.has_split) {
      delta = SpecificGroupDelta(config, eps);
    } else {
      const accounting::GroupMethod gm =
          method == "specific"  ? accounting::GroupMethod::kSpecific
          : method == "agnostic" ? accounting::GroupMethod::kAgnostic
                                 : accounting::GroupMethod::kPosthoc;
      amplification::AmplificationSetting setting{config.base_mechanism(),
                                                  config.subsampling_scheme()};
      const double grid_point[1] = {eps};
      delta = accounting::group_profile(setting, config.group_size, gm,
                                        std::span<const double>(grid_point, 1),
                                        profile_options)
                  .points.front()
                  .delta;
    }
    CurveRow& row = record.rows[idx];
    row.x = eps;
    row.clipped = delta > 1.0;
    row.value = std::min(delta, 1.0);
    row.method = method;
    row.group_size = config.group_size;
  });

  // Running-minimum repair per method (delta nonincreasing in epsilon).
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    double running = 1.0;
    for (std::size_t g = 0; g < eps_grid.size(); ++g) {
      CurveRow& row = record.rows[m * eps_grid.size() + g];
      running = std::min(running, row.value);
      row.value = running;
    }
  }
  return record;
}

CurveRecord run_rdp(const ExperimentConfig& config) {
  ValidateMethods(config, {"specific", "agnostic", "posthoc", "wang", "zhu",
                           "rr-tight", "wr", "epoch"});
  const auto alpha_grid =
      config.alpha_grid.empty() ? default_alpha_grid() : config.alpha_grid;
  const BaseMechanismSpec mech = config.base_mechanism();

  struct Task {
    double alpha;
    std::string method;
  };
  std::vector<Task> tasks;
  for (const auto& method : config.methods) {
    for (double alpha : alpha_grid) {
      if (!(alpha > 1)) continue;
      const bool integer_route =
          method == "agnostic" || method == "zhu" || method == "wang";
      if (integer_route && !IsIntegerOrder(alpha)) continue;
      tasks.push_back({alpha, method});
    }
  }

  // Post-hoc needs the base curve at doubled orders; precompute it.
  curves::RdpCurve posthoc_curve;
  if (std::count(config.methods.begin(), config.methods.end(), "posthoc") > 0) {
    if (config.group_size < 1 ||
        (config.group_size & (config.group_size - 1)) != 0) {
      throw InvalidArgumentError("posthoc RDP needs a power-of-two group size");
    }
    std::set<double> orders;
    for (double alpha : alpha_grid) {
      if (alpha > 1) CollectPosthocOrders(alpha, config.group_size, orders);
    }
    ExperimentConfig base = config;
    base.group_size = 1;
    base.has_split = false;
    posthoc_curve = amplification::posthoc_group_rdp(
        SpecificCurveAtOrders(base, orders), config.group_size);
  }

  CurveRecord record;
  record.x_name = "alpha";
  record.value_name = "rho";
  record.rows.resize(tasks.size());

  ParallelFor(config.workers, tasks.size(), [&](std::size_t idx) {
    const auto& task = tasks[idx];
    const double alpha = task.alpha;
    double rho = 0;
    if (task.method == "specific") {
      rho = SpecificGroupRho(config, alpha);
    } else if (task.method == "agnostic") {
      rho = amplification::agnostic_group_rdp(mech, config.rate,
                                              config.group_size,
                                              static_cast<int>(alpha))
                .rdp_rho(alpha);
    } else if (task.method == "zhu") {
      rho = amplification::zhu_poisson_rdp(mech, config.rate,
                                           static_cast<int>(alpha))
                .rdp_rho(alpha);
    } else if (task.method == "wang") {
      rho = amplification::wang_wor_rdp(mech, config.dataset_size,
                                        config.batch_size,
                                        static_cast<int>(alpha))
                .rdp_rho(alpha);
    } else if (task.method == "rr-tight") {
      rho = amplification::rr_wor_tight_rdp(config.theta, config.dataset_size,
                                            config.batch_size, alpha)
                .rdp_rho(alpha);
    } else if (task.method == "wr") {
      auto set = amplification::wr_substitution_pair(mech, config.dataset_size,
                                                     config.batch_size);
      divergence::EvalOptions eval;
      eval.quadrature_tol = config.quadrature_tol;
      const auto v = divergence::divergence_of_candidates(
          set.pairs, alpha, divergence::Kind::kRenyiMoment, eval);
      rho = std::max(0.0, v.log_value / (alpha - 1.0));
    } else if (task.method == "epoch") {
      rho = amplification::epoch_permute_partition_rdp(mech, alpha, true,
                                                       config.quadrature_tol)
                .rdp_rho(alpha);
    } else {  // posthoc
      rho = kInf;
      for (const auto& pt : posthoc_curve.points) {
        if (std::abs(pt.alpha - alpha) <= 1e-9 * std::max(1.0, alpha)) {
          rho = pt.rho;
          break;
        }
      }
    }
    CurveRow& row = record.rows[idx];
    row.x = alpha;
    row.value = rho;
    row.method = task.method;
    row.group_size = config.group_size;
  });

  // Drop post-hoc rows whose doubled orders were unavailable.
  std::vector<CurveRow> kept;
  kept.reserve(record.rows.size());
  for (auto& row : record.rows) {
    if (!std::isinf(row.value)) kept.push_back(std::move(row));
  }
  record.rows = std::move(kept);
  return record;
}

CurveRecord run_compose(const ExperimentConfig& config) {
  ValidateMethods(config, {"specific", "posthoc"});
  if (config.accountant != "pld" && config.accountant != "rdp") {
    throw InvalidArgumentError("compose needs an accounting spec (pld or rdp)");
  }
  const auto iterations = config.iteration_grid.empty()
                              ? std::vector<std::int64_t>{1, 10, 100, 1000}
                              : config.iteration_grid;
  const BaseMechanismSpec mech = config.base_mechanism();

  CurveRecord record;
  record.x_name = "iterations";
  record.value_name = config.accountant == "pld" ? "delta" : "epsilon";

  if (config.accountant == "pld") {
    accounting::PldOptions pld_options;
    pld_options.grid_step = config.grid_step;
    pld_options.tail_mass_cutoff = config.tail_mass_cutoff;
    pld_options.pessimistic = !config.optimistic;
    accounting::ComposeOptions compose_options;
    compose_options.truncation = config.compose_truncation;

    for (const auto& method : config.methods) {
      const int group = method == "posthoc" ? 1 : config.group_size;
      std::vector<accounting::PrivacyLossDistribution> plds;
      ExperimentConfig split_config = config;
      split_config.group_size = group;
      if (method == "posthoc") split_config.has_split = false;
      for (const auto& split : RelationSplits(split_config)) {
        auto set = amplification::poisson_group_pair(mech, config.rate, split);
        for (const auto& pair : set.pairs) {
          plds.push_back(accounting::pld_from_pair(pair, pld_options));
        }
      }
      for (const std::int64_t t : iterations) {
        double delta = 0;
        for (const auto& pld : plds) {
          const auto composed = accounting::pld_compose(pld, t, compose_options);
          if (method == "posthoc") {
            const double base_eps = config.fixed_epsilon / config.group_size;
            const double base_delta = accounting::pld_delta(composed, base_eps);
            delta = std::max(delta,
                             amplification::posthoc_group_adp(
                                 base_eps, base_delta, config.group_size)
                                 .delta);
          } else {
            delta = std::max(delta,
                             accounting::pld_delta(composed,
                                                   config.fixed_epsilon));
          }
        }
        CurveRow row;
        row.x = static_cast<double>(t);
        row.clipped = delta > 1.0;
        row.value = std::min(delta, 1.0);
        row.method = method;
        row.group_size = config.group_size;
        record.rows.push_back(row);
      }
    }
    return record;
  }

  // RDP accounting: compose rho linearly, then convert at the delta target.
  const auto alpha_grid =
      config.alpha_grid.empty() ? default_alpha_grid() : config.alpha_grid;
  const accounting::RdpToAdpFormula formula =
      config.conversion == "standard" ? accounting::RdpToAdpFormula::kStandard
                                      : accounting::RdpToAdpFormula::kImproved;
  for (const auto& method : config.methods) {
    curves::RdpCurve curve;
    if (method == "posthoc") {
      if ((config.group_size & (config.group_size - 1)) != 0) {
        throw InvalidArgumentError(
            "posthoc RDP needs a power-of-two group size");
      }
      std::set<double> orders;
      for (double alpha : alpha_grid) {
        if (alpha > 1) CollectPosthocOrders(alpha, config.group_size, orders);
      }
      ExperimentConfig base = config;
      base.group_size = 1;
      base.has_split = false;
      curve = amplification::posthoc_group_rdp(
          SpecificCurveAtOrders(base, orders), config.group_size);
    } else {
      for (double alpha : alpha_grid) {
        if (alpha > 1) {
          curve.points.push_back({alpha, SpecificGroupRho(config, alpha)});
        }
      }
    }
    for (const std::int64_t t : iterations) {
      const auto composed = accounting::rdp_compose(curve, t);
      CurveRow row;
      row.x = static_cast<double>(t);
      row.value = accounting::rdp_to_adp(composed, config.delta_target, formula);
      row.method = method;
      row.group_size = config.group_size;
      record.rows.push_back(row);
    }
  }
  return record;
}

namespace {

nlohmann::json CheckResult(const std::string& name, bool passed,
                           const std::string& details = "") {
  nlohmann::json r;
  r["name"] = name;
  r["passed"] = passed;
  if (!details.empty()) r["details"] = details;
  return r;
}

// The full verification battery for one Poisson group instance.
void VerifyGroupInstance(const oracle::DiscreteInstance& inst,
                         const std::string& label, nlohmann::json& results,
                         bool& all_passed, numeric::SplitMix64& rng) {
  const oracle::BatchSpace space = oracle::BatchSpace::AllSubsets(
      static_cast<int>(inst.universe.size()), inst.relation);
  const auto canonical = oracle::canonical_group_coupling(inst);

  const auto validity =
      oracle::check_coupling_valid(canonical, canonical.marginals);
  results.push_back(CheckResult(label + ": canonical coupling valid",
                                validity.ok,
                                validity.ok ? "" : validity.violations[0]));
  all_passed &= validity.ok;

  const auto compat = oracle::check_distance_compatible(canonical, space);
  results.push_back(CheckResult(label + ": canonical coupling compatible",
                                compat.ok,
                                compat.ok ? "" : compat.violations[0]));
  all_passed &= compat.ok;

  const double kHockeyAlphas[] = {1.0, std::exp(1.0), 2.0, 4.0};
  for (double alpha : kHockeyAlphas) {
    const double exact =
        oracle::exact_divergence(inst, alpha, divergence::Kind::kHockeyStick);
    const double bound = oracle::transport_bound_value(
        canonical, inst, alpha, divergence::Kind::kHockeyStick);
    const bool ok = exact <= bound + 1e-12;
    all_passed &= ok;
    if (!ok) {
      results.push_back(CheckResult(
          label + ": transport soundness", false,
          "H at alpha=" + FormatDouble(alpha) + ": exact " +
              FormatDouble(exact) + " > bound " + FormatDouble(bound)));
    }
  }
  for (double alpha : {2.0, 4.0}) {
    const double exact =
        oracle::exact_divergence(inst, alpha, divergence::Kind::kRenyiMoment);
    const double bound = oracle::transport_bound_value(
        canonical, inst, alpha, divergence::Kind::kRenyiMoment);
    const bool ok = exact <= bound + 1e-12;
    all_passed &= ok;
    if (!ok) {
      results.push_back(CheckResult(
          label + ": transport soundness", false,
          "Lambda at alpha=" + FormatDouble(alpha) + ": exact " +
              FormatDouble(exact) + " > bound " + FormatDouble(bound)));
    }
  }

  // Randomized valid couplings stay sound.
  const auto randomized = oracle::randomized_group_coupling(inst, rng);
  const auto random_validity =
      oracle::check_coupling_valid(randomized, randomized.marginals);
  all_passed &= random_validity.ok;
  if (!random_validity.ok) {
    results.push_back(CheckResult(label + ": randomized coupling valid", false,
                                  random_validity.violations[0]));
  }
  for (double alpha : kHockeyAlphas) {
    const double exact =
        oracle::exact_divergence(inst, alpha, divergence::Kind::kHockeyStick);
    const double bound = oracle::transport_bound_value(
        randomized, inst, alpha, divergence::Kind::kHockeyStick);
    const bool ok = exact <= bound + 1e-12;
    all_passed &= ok;
    if (!ok) {
      results.push_back(CheckResult(label + ": randomized coupling soundness",
                                    false,
                                    "H at alpha=" + FormatDouble(alpha)));
    }
  }

  // Per-batch-event conditioning reproduces the divergence exactly.
  const auto per_batch = oracle::per_batch_coupling(inst);
  for (double alpha : kHockeyAlphas) {
    const double exact =
        oracle::exact_divergence(inst, alpha, divergence::Kind::kHockeyStick);
    const double bound = oracle::transport_bound_value(
        per_batch, inst, alpha, divergence::Kind::kHockeyStick);
    const bool ok = std::abs(exact - bound) <= 1e-12;
    all_passed &= ok;
    if (!ok) {
      results.push_back(CheckResult(label + ": per-batch equality", false,
                                    "H at alpha=" + FormatDouble(alpha)));
    }
  }
}

}  // namespace

nlohmann::json run_oracle_verify(const ExperimentConfig& config) {
  nlohmann::json report;
  report["schema_version"] = 1;
  nlohmann::json results = nlohmann::json::array();
  bool all_passed = true;
  numeric::SplitMix64 rng(config.seed);

  for (const auto& path : config.fixture_paths) {
    std::ifstream in(path);
    if (!in) throw InvalidArgumentError("cannot open fixture: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    const auto inst = oracle::instance_from_json(doc.at("instance"));
    const std::string label = doc.value("name", path);

    bool tampered = doc.value("tamper", "") == "shuffle-coupling";
    if (doc.contains("expect")) {
      const auto& expect = doc.at("expect");
      if (expect.contains("rr_group_bound")) {
        // Exact divergence must match the closed-form candidate bound.
        const auto& e = expect.at("rr_group_bound");
        auto set = amplification::poisson_group_pair(
            amplification::BaseMechanismSpec::RandomizedResponse(
                e.at("theta").get<double>()),
            e.at("rate").get<double>(),
            {e.at("k_plus").get<int>(), e.at("k_minus").get<int>()});
        bool ok = true;
        std::string details;
        for (double alpha : {1.0, std::exp(1.0), 2.0, 4.0}) {
          const double exact = oracle::exact_divergence(
              inst, alpha, divergence::Kind::kHockeyStick);
          const double bound =
              divergence::divergence_of_candidates(
                  set.pairs, alpha, divergence::Kind::kHockeyStick)
                  .value;
          if (std::abs(exact - bound) > 1e-12) {
            ok = false;
            details = "H mismatch at alpha=" + FormatDouble(alpha);
          }
        }
        for (double alpha : {2.0, 4.0}) {
          const double exact = oracle::exact_divergence(
              inst, alpha, divergence::Kind::kRenyiMoment);
          const double bound =
              divergence::divergence_of_candidates(
                  set.pairs, alpha, divergence::Kind::kRenyiMoment)
                  .value;
          if (std::abs(exact - bound) > 1e-12) {
            ok = false;
            details = "Lambda mismatch at alpha=" + FormatDouble(alpha);
          }
        }
        results.push_back(CheckResult(label + ": tightness", ok, details));
        all_passed &= ok;
      }
    }
    if (inst.scheme.tag == SubsamplingScheme::Tag::kPoisson &&
        inst.relation == oracle::BatchRelation::kInsertionRemoval) {
      if (tampered) {
        // The fixture deliberately ships a broken coupling; verification is
        // expected to fail with exit code 1.
        auto coupling = oracle::shuffled_coupling(
            oracle::canonical_group_coupling(inst), rng);
        const auto validity =
            oracle::check_coupling_valid(coupling, coupling.marginals);
        results.push_back(CheckResult(
            label + ": coupling valid", validity.ok,
            validity.ok ? "" : validity.violations[0]));
        if (!validity.ok) all_passed = false;
      } else {
        VerifyGroupInstance(inst, label, results, all_passed, rng);
      }
    }
    if (!all_passed) {
      report["offending_instance"] = oracle::instance_to_json(inst);
    }
  }

  for (int i = 0; i < config.random_count; ++i) {
    const auto inst = oracle::random_group_instance(rng);
    const std::string label = "random[" + std::to_string(i) + "]";
    const bool before = all_passed;
    VerifyGroupInstance(inst, label, results, all_passed, rng);
    if (before && !all_passed) {
      report["offending_instance"] = oracle::instance_to_json(inst);
    }
  }

  report["results"] = results;
  report["passed"] = all_passed;
  return report;
}

void write_csv(const CurveRecord& record, std::ostream& out) {
  // RFC 4180: CRLF line endings; no field here ever needs quoting.
  out << record.x_name << "," << record.value_name
      << ",method,group_size,clipped\r\n";
  for (const auto& row : record.rows) {
    out << FormatDouble(row.x) << "," << FormatDouble(row.value) << ","
        << row.method << "," << row.group_size << ","
        << (row.clipped ? "1" : "0") << "\r\n";
  }
}

void write_json(const CurveRecord& record, std::ostream& out) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "curve_record";
  doc["columns"] = {record.x_name, record.value_name, "method", "group_size",
                    "clipped"};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : record.rows) {
    // Serialize numbers as strings where infinity markers are possible, and
    // as JSON numbers otherwise; infinity is never emitted as a bare token.
    nlohmann::json r;
    r[record.x_name] = row.x;
    if (std::isinf(row.value)) {
      r[record.value_name] = row.value > 0 ? "inf" : "-inf";
    } else {
      r[record.value_name] = row.value;
    }
    r["method"] = row.method;
    r["group_size"] = row.group_size;
    r["clipped"] = row.clipped;
    rows.push_back(r);
  }
  doc["rows"] = rows;
  out << doc.dump(2) << "\n";
}

namespace {

int RunCommand(const ExperimentConfig& config,
               const std::function<CurveRecord()>& runner) {
  try {
    const CurveRecord record = runner();
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!config.out_path.empty()) {
      file.open(config.out_path, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot open output path " << config.out_path
                  << "\n";
        return kExitUsage;
      }
      out = &file;
    }
    if (config.format == "json") {
      write_json(record, *out);
    } else if (config.format == "csv") {
      write_csv(record, *out);
    } else {
      std::cerr << "error: unknown format " << config.format << "\n";
      return kExitUsage;
    }
    return kExitOk;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int cmd_profile(const ExperimentConfig& config) {
  return RunCommand(config, [&] { return run_profile(config); });
}

int cmd_rdp(const ExperimentConfig& config) {
  return RunCommand(config, [&] { return run_rdp(config); });
}

int cmd_compose(const ExperimentConfig& config) {
  return RunCommand(config, [&] { return run_compose(config); });
}

int cmd_oracle_verify(const ExperimentConfig& config) {
  try {
    const nlohmann::json report = run_oracle_verify(config);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!config.out_path.empty()) {
      file.open(config.out_path, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot open output path " << config.out_path
                  << "\n";
        return kExitUsage;
      }
      out = &file;
    }
    *out << report.dump(2) << "\n";
    return report.at("passed").get<bool>() ? kExitOk
                                           : kExitVerificationFailure;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace dpamp::cli

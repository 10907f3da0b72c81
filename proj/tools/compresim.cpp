// Copyright 2026 The compresim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

// compresim: run experiments, property suites, hard instances and gradient checks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "compresim/config.hpp"
#include "compresim/core.hpp"
#include "compresim/experiment.hpp"
#include "compresim/hard_instance.hpp"
#include "compresim/verify.hpp"

namespace {

using namespace compresim;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> parallel;

  void apply(ExperimentConfig& cfg) const {
    if (seed) cfg.base_seed = *seed;
    if (trials) {
      if (*trials < 1) throw Error("--trials must be positive");
      cfg.n_trials = *trials;
    }
    if (parallel) {
      if (*parallel < 1) throw Error("--parallel must be positive");
      cfg.parallel = *parallel;
    }
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "base seed (trial t uses seed + t)");
  cmd->add_option("--trials", o.trials, "number of trials");
  cmd->add_option("--parallel", o.parallel, "trials run concurrently");
}

int cmd_run(const std::string& path, const std::string& out, const Overrides& o) {
  ExperimentConfig cfg = load_config(path);
  o.apply(cfg);
  const ExperimentResult res = run_experiment(cfg, out);
  fmt::print("{:<28} {:>4} {:>8} {:>6} {:>13} {:>11} {:>10}\n", "algorithm", "R", "gamma0", "trials",
             "final |g|^2", "std", "crossing");
  for (const auto& s : res.summaries) {
    fmt::print("{:<28} {:>4} {:>8.4g} {:>6} {:>13.5g} {:>11.3g} {:>10}\n", s.label, s.params.R,
               s.params.gamma0, s.trials, s.final_grad_norm_sq_mean, s.final_grad_norm_sq_std,
               s.transient_crossing ? std::to_string(*s.transient_crossing) : "none");
    if (s.diverged > 0) fmt::print("  {} diverged trial(s)\n", s.diverged);
  }
  fmt::print("wrote {}\n", out);
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = verify_suite_names();
  } else {
    names.push_back(suite);
  }
  bool ok = true;
  for (const auto& name : names) {
    const VerifyReport r = verify_suite(name, seed);
    print_report(std::cout, r);
    ok = ok && r.passed();
  }
  return ok ? 0 : 1;
}

int cmd_hard_instance(const std::string& path, const std::string& out, const Overrides& o) {
  ExperimentConfig cfg = load_config(path);
  o.apply(cfg);
  const auto results = run_hard_instance_experiment(cfg);
  bool ok = true;
  for (std::size_t a = 0; a < results.size(); ++a) {
    const auto& trials = results[a];
    int bound_fail = 0, floor_fail = 0, below = 0;
    double prog_sum = 0.0, span_sum = 0.0, bound_sum = 0.0, grad_min = 0.0;
    bool first = true;
    for (const auto& r : trials) {
      bound_fail += r.bound_holds ? 0 : 1;
      floor_fail += r.floor_holds ? 0 : 1;
      prog_sum += r.prog_x_hat;
      span_sum += r.prog_span;
      bound_sum += static_cast<double>(r.bound);
      if (r.below_d) {
        ++below;
        grad_min = first ? r.chain_grad_inf_x_hat : std::min(grad_min, r.chain_grad_inf_x_hat);
        first = false;
      }
    }
    const double n = static_cast<double>(trials.size());
    fmt::print(
        "{}: {} seeds, mean prog(x_hat) {:.3f}, mean prog span {:.3f}, mean bound {:.3f}, "
        "bound violations {}\n",
        cfg.algorithms[a].display_name(), trials.size(), prog_sum / n, span_sum / n, bound_sum / n,
        bound_fail);
    fmt::print("  prog(x_hat) < d on {} seeds, min ||grad h(x_hat)||_inf {}, floor violations {}\n",
               below, first ? std::string("n/a") : fmt::format("{:.4g}", grad_min), floor_fail);
    ok = ok && bound_fail == 0 && floor_fail == 0;
  }
  if (!out.empty()) {
    const auto parent = std::filesystem::path(out).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(out);
    f << hard_instance_json(cfg, results) << '\n';
    fmt::print("wrote {}\n", out);
  }
  return ok ? 0 : 1;
}

int cmd_gradcheck(const std::string& problem, std::uint64_t seed) {
  const VerifyReport r = verify_gradients(seed, problem);
  print_report(std::cout, r);
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed distributed SGD simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite, problem, hard_out;
  Overrides run_o, hard_o, verify_o, grad_o;

  auto* run = app.add_subcommand("run", "run every algorithm of a config over its trials");
  run->add_option("config", config_path, "TOML run file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  add_overrides(run, run_o);

  auto* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", suite, "compressors, fcc, zero_chain, gradients, recursion or all")
      ->required();
  verify->add_option("--seed", verify_o.seed, "seed");

  auto* hard = app.add_subcommand("hard-instance", "certify progress bounds on a chain instance");
  hard->add_option("config", config_path, "TOML run file with an [adversary] table")
      ->required()
      ->check(CLI::ExistingFile);
  hard->add_option("--out", hard_out, "write per-seed results as JSON");
  add_overrides(hard, hard_o);

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of analytic gradients");
  grad->add_option("problem", problem, "least_squares, logistic, zero_chain or all")->required();
  grad->add_option("--seed", grad_o.seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir, run_o);
    if (*verify) return cmd_verify(suite, verify_o.seed.value_or(0));
    if (*hard) return cmd_hard_instance(config_path, hard_out, hard_o);
    if (*grad) return cmd_gradcheck(problem, grad_o.seed.value_or(0));
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}

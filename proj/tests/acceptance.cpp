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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "compresim/algorithms.hpp"
#include "compresim/config.hpp"
#include "compresim/experiment.hpp"
#include "compresim/verify.hpp"

using namespace compresim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string config_path(const char* name) { return std::string(COMPRESIM_CONFIG_DIR) + "/" + name; }

Outcome from_report(const VerifyReport& r, double time_limit) {
  Outcome o;
  o.pass = r.passed() && r.seconds < time_limit;
  int failed = 0;
  for (const auto& c : r.checks) {
    if (!c.passed) {
      ++failed;
      o.detail += fmt::format("\n      failed: {}: {}", c.name, c.detail);
    }
  }
  o.detail = fmt::format("{}/{} checks, {:.1f} s (limit {:.0f} s)", r.checks.size() - failed, r.checks.size(),
                         r.seconds, time_limit) +
             o.detail;
  return o;
}

Outcome criterion_collapse() {
  LeastSquaresOptions lo;
  lo.d = 12;
  lo.n = 4;
  lo.M = 60;
  const auto problem = gen_least_squares(5, lo);
  const OracleSpec oracle = OracleSpec::minibatch(1);
  AlgorithmConfig base;
  base.budget_T = 300;
  base.log_every = 1;
  base.gamma.value = 1.0 / 64.0;
  base.worker_compressor = CompressorSpec::identity();
  base.server_compressor = CompressorSpec::identity();

  Outcome o{true, {}};
  std::vector<std::string> bad;
  for (std::uint64_t seed : {0, 1, 2}) {
    AlgorithmConfig ref_cfg = base;
    ref_cfg.name = AlgorithmName::psgd;
    const RunRecord ref = run_algorithm(*problem, oracle, ref_cfg, seed);
    for (AlgorithmName name : {AlgorithmName::neolithic, AlgorithmName::mem_sgd, AlgorithmName::double_squeeze,
                               AlgorithmName::ef21_sgd, AlgorithmName::qsgd}) {
      AlgorithmConfig cfg = base;
      cfg.name = name;
      cfg.R.value = 1;
      const RunRecord rec = run_algorithm(*problem, oracle, cfg, seed);
      bool same = rec.series.size() == ref.series.size() && rec.final_x == ref.final_x;
      for (std::size_t j = 0; same && j < rec.series.size(); ++j) {
        same = rec.series[j].f == ref.series[j].f && rec.series[j].grad_norm_sq == ref.series[j].grad_norm_sq;
      }
      if (!same) bad.push_back(fmt::format("{}@seed{}", to_string(name), seed));
    }
  }
  o.pass = bad.empty();
  o.detail = bad.empty() ? "5 algorithms x 3 seeds bit-identical to psgd over 300 rounds"
                         : fmt::format("differs: {}", fmt::join(bad, ", "));
  return o;
}

Outcome criterion_comparison(const char* file, double time_limit) {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = load_config(config_path(file));
  cfg.parallel = 4;
  const ExperimentResult res = run_experiment(cfg);
  const double secs = seconds_since(t0);
  auto final_of = [&](const std::string& label) {
    for (const auto& s : res.summaries)
      if (s.label == label) return s.final_grad_norm_sq_mean;
    throw Error("missing algorithm " + label);
  };
  const double neo = final_of("neolithic");
  const double mem = final_of("mem_sgd");
  const double ds = final_of("double_squeeze");
  const double ps = final_of("psgd");
  int diverged = 0;
  for (const auto& s : res.summaries) diverged += s.diverged;
  Outcome o;
  o.pass = mem >= 1.5 * neo && ds >= 1.5 * neo && neo <= 3.0 * ps && diverged == 0 && secs < time_limit;
  o.detail = fmt::format(
      "final |g|^2 psgd {:.4g}, neolithic {:.4g}, mem_sgd {:.4g} ({:.2f}x), double_squeeze {:.4g} ({:.2f}x), "
      "neolithic/psgd {:.2f}, diverged {}, {:.0f} s",
      ps, neo, mem, mem / neo, ds, ds / neo, neo / ps, diverged, secs);
  return o;
}

Outcome criterion_hard_instance() {
  const auto t0 = Clock::now();
  Outcome o{true, {}};

  ExperimentConfig masked = load_config(config_path("hard_masked.toml"));
  masked.parallel = 4;
  const auto& zc = masked.problem.zero_chain;
  const double limit = 2.0 * zc.n * masked.adversary->p * static_cast<double>(masked.algorithms[0].budget_T) + 5.0;
  const auto ra = run_hard_instance_experiment(masked);
  std::string a_detail;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    int violations = 0;
    double mean = 0.0;
    for (const auto& r : ra[k]) {
      violations += !r.bound_holds;
      mean += r.prog_x_hat;
    }
    mean /= static_cast<double>(ra[k].size());
    o.pass = o.pass && violations == 0 && mean <= limit && ra[k].size() == 200;
    a_detail += fmt::format(" {}: mean prog {:.2f}, {} bound violations;", masked.algorithms[k].display_name(), mean,
                            violations);
  }

  ExperimentConfig shared = load_config(config_path("hard_shared_rand.toml"));
  shared.parallel = 4;
  const auto rb = run_hard_instance_experiment(shared);
  int below = 0, floor_bad = 0, bound_bad = 0;
  double min_grad = INFINITY;
  for (const auto& trials : rb) {
    for (const auto& r : trials) {
      bound_bad += !r.bound_holds;
      if (!r.below_d) continue;
      ++below;
      floor_bad += !(r.chain_grad_inf_x_hat >= 1.0);
      min_grad = std::min(min_grad, r.chain_grad_inf_x_hat);
    }
  }
  o.pass = o.pass && floor_bad == 0 && bound_bad == 0 && below > 0;
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 120.0;
  o.detail = fmt::format("(a) limit {:.0f};{} (b) {} seeds below d, min |grad h|_inf {:.3f}, {} floor violations; {:.1f} s",
                         limit, a_detail, below, min_grad, floor_bad, secs);
  return o;
}

// Label noise dominates the oracle variance so sigma^2 does not grow with n
// through worker heterogeneity.
Outcome criterion_speedup() {
  const char* text = R"(
[problem]
name = "least_squares"
seed = 11
d = 20
M = 200
noise_variance = 100.0
[oracle]
kind = "minibatch"
batch = 1
[budget]
T = 3000
n_trials = 20
base_seed = 500
log_every = 100
[[algorithm]]
name = "psgd"
gamma = 0.01
[[algorithm]]
name = "neolithic"
R = 4
gamma = 0.01
worker = { kind = "rand_k", k = 2 }
server = { kind = "rand_k", k = 2 }
)";
  ExperimentConfig cfg = parse_config(text);
  cfg.parallel = 4;
  Outcome o{true, {}};
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    std::vector<double> mean, sd;
    for (int n : {1, 4, 16}) {
      ExperimentConfig c = cfg;
      c.problem.least_squares.n = n;
      c.algorithms = {cfg.algorithms[a]};
      const ExperimentResult r = run_experiment(c);
      mean.push_back(r.summaries[0].final_grad_norm_sq_mean);
      sd.push_back(r.summaries[0].final_grad_norm_sq_std);
      o.pass = o.pass && r.summaries[0].diverged == 0;
    }
    for (int k = 0; k + 1 < 3; ++k) o.pass = o.pass && mean[k] - sd[k] > mean[k + 1] + sd[k + 1];
    o.detail += fmt::format("{}: n=1 {:.3g}+-{:.2g}, n=4 {:.3g}+-{:.2g}, n=16 {:.3g}+-{:.2g}; ",
                            cfg.algorithms[a].display_name(), mean[0], sd[0], mean[1], sd[1], mean[2], sd[2]);
  }
  return o;
}

Outcome criterion_formulas() {
  // ln term: delta T max(b2, sigma2 delta) / (Delta L) = 0.1 * 10 * 1 / 1 = 1 <= 8.
  const int r21 = select_R(0.1, 10, 1.0, 0.0, 1.0, 1.0);
  // Independent recomputation of the worked example.
  constexpr double kGammaExample = 0.06945408159544593;
  const double gamma = select_gamma_neolithic(1.0, 1.0, 99, 4, 10, 1.0, 0.1, 0.0);
  double worst_theta = 0.0;
  for (double delta : {1.0, 0.5, 0.25, 0.1, 1.0 / 30, 1.0 / 64, 0.01}) {
    for (long T : {10L, 1000L, 100000L}) {
      for (double s : {0.0, 0.01, 1.0, 100.0}) {
        const int R = select_R(delta, T, s, s, 1.0, 1.0);
        worst_theta = std::max(worst_theta, theta_of(delta, R));
      }
    }
  }
  Outcome o;
  o.pass = r21 == 21 && std::abs(gamma - kGammaExample) <= 1e-3 && worst_theta < 0.5;
  o.detail = fmt::format("select_R = {}, gamma example = {:.7f} (reference {:.7f}), max theta over auto R = {:.4f}",
                         r21, gamma, kGammaExample, worst_theta);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "compressor contracts", [] { return from_report(verify_compressors(0), 30.0); }},
      {2, "scaled wrapper closure", [] { return from_report(verify_wrapper_closure(0), 30.0); }},
      {3, "FCC decay", [] { return from_report(verify_fcc(0), 60.0); }},
      {4, "gradient correctness", [] { return from_report(verify_gradients(0), 60.0); }},
      {5, "zero-chain properties", [] { return from_report(verify_zero_chain(0), 60.0); }},
      {6, "NEOLITHIC recursion identity", [] { return from_report(verify_recursion(0), 60.0); }},
      {7, "identity-compressor collapse", criterion_collapse},
      {8, "least-squares comparison", [] { return criterion_comparison("ls_fig2.toml", 300.0); }},
      {9, "logistic comparison", [] { return criterion_comparison("logistic_fig2.toml", 300.0); }},
      {10, "hard-instance certification", criterion_hard_instance},
      {11, "linear-speedup trend", criterion_speedup},
      {12, "parameter formulas", criterion_formulas},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << fmt::format("criterion {:>2} {}  {}\n    {}\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail)
              << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "compresim/config.hpp"
#include "compresim/experiment.hpp"
#include "compresim/hard_instance.hpp"
#include "compresim/verify.hpp"

using namespace compresim;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
[problem]
name = "least_squares"
seed = 3
d = 6
n = 4
M = 40

[compressors]
worker = { kind = "rand_k", k = 1 }

[budget]
T = 200
n_trials = 3
base_seed = 10
log_every = 20

[[algorithm]]
name = "psgd"
gamma = { mode = "manual", value = 0.02 }

[[algorithm]]
name = "neolithic"
R = { mode = "manual", value = 2 }
gamma = { mode = "manual", value = 0.02, decay_every = 100, decay_factor = 2.0 }
server = { kind = "top_k", k = 2 }

[[algorithm]]
name = "mem_sgd"
label = "mem_sgd_fast"
gamma = 0.04
)";

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("compresim_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config parses algorithms and inherited settings") {
  const ExperimentConfig c = parse_config(kSmall);
  REQUIRE(c.algorithms.size() == 3);
  CHECK(c.n_trials == 3);
  CHECK(c.base_seed == 10);
  CHECK(c.oracle.kind == OracleKind::minibatch);
  CHECK(c.algorithms[0].worker_compressor.kind == CompressorKind::identity);
  CHECK(c.algorithms[1].R.value == 2);
  CHECK(c.algorithms[1].gamma.decay_every == 100);
  CHECK(c.algorithms[1].server_compressor.kind == CompressorKind::top_k);
  CHECK(c.algorithms[2].display_name() == "mem_sgd_fast");
  CHECK(c.algorithms[2].gamma.value == 0.04);
  CHECK(c.algorithms[2].worker_compressor.kind == CompressorKind::rand_k);
  CHECK(c.algorithms[2].server_compressor.kind == CompressorKind::identity);
  CHECK(c.algorithms[2].budget_T == 200);
  CHECK(c.algorithms[2].log_every == 20);
}

TEST_CASE("config errors name the field") {
  CHECK(error_of("[budget]\nT = -5\n[[algorithm]]\nname = \"psgd\"\n").find("T") != std::string::npos);
  CHECK(error_of("[problem]\nname = \"least_squares\"\nd = 0\n[[algorithm]]\nname = \"psgd\"\n")
            .find("d") != std::string::npos);
  CHECK(error_of("[[algorithm]]\nname = \"sgd_plus\"\n").find("name") != std::string::npos);
  CHECK(error_of("[[algorithm]]\nname = \"psgd\"\ncolour = 3\n").find("colour") != std::string::npos);
  CHECK(error_of("[[algorithm]]\nname = \"psgd\"\ngamma = { mode = \"manual\" }\n").find("gamma.value") !=
        std::string::npos);
  CHECK(error_of("[[algorithm]]\nname = \"psgd\"\n[oracle]\nkind = \"psychic\"\n").find("kind") !=
        std::string::npos);
  CHECK(error_of("not toml = = 1").find("config") != std::string::npos);
  CHECK_FALSE(error_of("[[algorithm]]\nname = \"psgd\"\n[adversary]\nkind = \"masked\"\n").empty());
}

TEST_CASE("bundled configs load") {
  for (const char* name : {"ls_fig2.toml", "logistic_fig2.toml", "hard_masked.toml", "hard_shared_rand.toml"}) {
    CAPTURE(name);
    const ExperimentConfig c = load_config(std::string(COMPRESIM_CONFIG_DIR) + "/" + name);
    CHECK_FALSE(c.algorithms.empty());
  }
}

TEST_CASE("summary statistics") {
  const ExperimentConfig c = parse_config(kSmall);
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.summaries.size() == 3);
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& s = r.summaries[a];
    const auto& recs = r.records[a];
    CHECK(s.trials == 3);
    for (std::size_t j = 0; j < s.rounds.size(); ++j) {
      double m = 0.0;
      for (const auto& rec : recs) m += rec.series[j].grad_norm_sq;
      m /= 3.0;
      CHECK(std::abs(s.grad_norm_sq_mean[j] - m) <= 1e-12 * std::max(1.0, std::abs(m)));
    }
    CHECK(s.final_grad_norm_sq_mean == s.grad_norm_sq_mean.back());
  }
  CHECK(r.summaries[0].transient_crossing == 0L);
}

TEST_CASE("one trial has zero spread") {
  ExperimentConfig c = parse_config(kSmall);
  c.n_trials = 1;
  const ExperimentResult r = run_experiment(c);
  for (std::size_t a = 0; a < r.summaries.size(); ++a) {
    const auto& s = r.summaries[a];
    for (double v : s.grad_norm_sq_std) CHECK(v == 0.0);
    CHECK(s.final_f_mean == r.records[a][0].series.back().f);
  }
}

TEST_CASE("crossing") {
  TrialSummary ref, algo;
  ref.rounds = {0, 10, 20, 30};
  ref.grad_norm_sq_mean = {4.0, 2.0, 1.0, 1.0};
  CHECK(estimate_transient_crossing(ref, ref) == 0L);
  algo.rounds = {0, 10, 20, 30};
  algo.grad_norm_sq_mean = {4.0, 4.0, 1.2, 1.4};
  CHECK(estimate_transient_crossing(algo, ref, 0.5) == 20L);
  // Leaving the band again resets the crossing.
  algo.grad_norm_sq_mean = {4.0, 2.0, 1.6, 1.4};
  CHECK(estimate_transient_crossing(algo, ref, 0.5) == 30L);
  algo.grad_norm_sq_mean = {9.0, 9.0, 9.0, 9.0};
  CHECK_FALSE(estimate_transient_crossing(algo, ref, 0.5).has_value());
  // Reference read at its latest round not after the algorithm's round.
  algo.rounds = {0, 15, 25};
  algo.grad_norm_sq_mean = {7.0, 2.9, 1.5};
  CHECK(estimate_transient_crossing(algo, ref, 0.5) == 15L);
}

TEST_CASE("identity NEOLITHIC crosses P-SGD at round 0") {
  ExperimentConfig c = parse_config(R"(
[problem]
name = "least_squares"
d = 5
n = 2
M = 30
[budget]
T = 100
n_trials = 2
log_every = 10
[[algorithm]]
name = "psgd"
gamma = 0.015625
[[algorithm]]
name = "neolithic"
gamma = 0.015625
R = 1
)");
  const ExperimentResult r = run_experiment(c);
  CHECK(r.summaries[1].transient_crossing == 0L);
  CHECK(r.summaries[1].grad_norm_sq_mean == r.summaries[0].grad_norm_sq_mean);
}

TEST_CASE("artifacts are written and reproducible") {
  ExperimentConfig c = parse_config(kSmall);
  c.parallel = 2;
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  run_experiment(c, a.string());
  c.parallel = 1;
  run_experiment(c, b.string());
  for (const char* label : {"psgd", "neolithic", "mem_sgd_fast"}) {
    for (int seed = 10; seed < 13; ++seed) {
      const auto rel = fs::path(label) / ("trial_" + std::to_string(seed) + ".csv");
      REQUIRE(fs::exists(a / rel));
      const std::string text = read_file(a / rel);
      CHECK(text == read_file(b / rel));
      CHECK(text.substr(0, text.find('\n')) == kTrialCsvHeader);
    }
    CHECK(fs::exists(a / (std::string(label) + "_aggregate.csv")));
  }
  const auto js = nlohmann::json::parse(read_file(a / "summary.json"));
  CHECK(js["algorithms"].size() == 3);
  CHECK(js["algorithms"][0]["diverged_trials"] == 0);
  CHECK(js["algorithms"][1]["params"]["R"] == 2);
  CHECK(js["config"]["n_trials"] == 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("diverged trials are counted and excluded") {
  ExperimentConfig c = parse_config(kSmall);
  c.algorithms.resize(1);
  c.algorithms[0].gamma.value = 80.0;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.summaries[0].diverged == 3);
  CHECK(r.summaries[0].trials == 0);
}

TEST_CASE("masked oracle with p = 1 advances at most one coordinate per round") {
  ZeroChainOptions o;
  o.d = 12;
  o.n = 2;
  const ZeroChainProblem p(o);
  AlgorithmConfig a;
  a.name = AlgorithmName::psgd;
  a.gamma.value = 1.0;
  a.budget_T = 40;
  const HardInstanceResult r = run_hard_instance_trial(p, AdversaryKind::masked, 1.0, a, 0);
  for (std::size_t t = 1; t < r.prog_trajectory.size(); ++t) {
    CHECK(r.prog_trajectory[t] <= r.prog_trajectory[t - 1] + 1);
  }
  CHECK(r.bound == 40);
  CHECK(r.bound_holds);
}

TEST_CASE("hard instance pairings are enforced") {
  ZeroChainOptions o;
  o.d = 10;
  o.n = 2;
  const ZeroChainProblem homo(o);
  o.assignment = ChainAssignment::split_h1_h2;
  const ZeroChainProblem split(o);
  AlgorithmConfig a;
  a.name = AlgorithmName::mem_sgd;
  a.worker_compressor = CompressorSpec::rand_k(1, RandomnessMode::shared_broadcast);
  CHECK_THROWS_AS(hard_instance_oracle(split, AdversaryKind::masked, 0.1, a), Error);
  CHECK_THROWS_AS(hard_instance_oracle(homo, AdversaryKind::shared_rand, 1.0, a), Error);
  CHECK(hard_instance_oracle(split, AdversaryKind::shared_rand, 1.0, a).kind == OracleKind::exact);
  a.worker_compressor = CompressorSpec::rand_k(1);
  CHECK_THROWS_AS(hard_instance_oracle(split, AdversaryKind::shared_rand, 1.0, a), Error);
}

TEST_CASE("shared-rand bound replays the logged draws") {
  ZeroChainOptions o;
  o.d = 20;
  o.n = 2;
  o.assignment = ChainAssignment::split_h1_h2;
  const ZeroChainProblem p(o);
  AlgorithmConfig a;
  a.name = AlgorithmName::ef21_sgd;
  a.gamma.value = 1.0;
  a.budget_T = 40;
  a.worker_compressor = CompressorSpec::rand_k(1, RandomnessMode::shared_broadcast);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const HardInstanceResult r = run_hard_instance_trial(p, AdversaryKind::shared_rand, 1.0, a, seed);
    CHECK(r.bound_holds);
    CHECK(r.prog_x_hat <= r.prog_span);
    if (r.below_d) CHECK(r.chain_grad_inf_x_hat >= 1.0);
  }
}

TEST_CASE("verify suites are addressable") {
  CHECK(verify_suite_names().size() == 5);
  CHECK_THROWS_AS(verify_suite("astrology"), Error);
  const VerifyReport r = verify_suite("gradients", 1);
  CHECK(r.passed());
  CHECK_THROWS_AS(verify_gradients(0, "rosenbrock"), Error);
}

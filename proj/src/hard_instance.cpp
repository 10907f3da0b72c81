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

#include "compresim/hard_instance.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace compresim {

AdversaryKind parse_adversary_kind(const std::string& name) {
  if (name == "masked") return AdversaryKind::masked;
  if (name == "shared_rand") return AdversaryKind::shared_rand;
  throw Error("unknown adversary kind '" + name + "'");
}

std::string to_string(AdversaryKind kind) {
  return kind == AdversaryKind::masked ? "masked" : "shared_rand";
}

OracleSpec hard_instance_oracle(const ZeroChainProblem& problem, AdversaryKind adversary,
                                double p, const AlgorithmConfig& config) {
  const auto assignment = problem.options().assignment;
  if (adversary == AdversaryKind::masked) {
    if (assignment != ChainAssignment::homogeneous_h) {
      throw Error("masked adversary pairs with the homogeneous chain");
    }
    return OracleSpec::masked(p);
  }
  if (assignment != ChainAssignment::split_h1_h2) {
    throw Error("shared_rand adversary pairs with the split h1/h2 chain");
  }
  const auto& w = config.worker_compressor;
  const bool rand_kind = w.base_kind() == CompressorKind::rand_k ||
                         w.base_kind() == CompressorKind::rand_k_scaled;
  if (!rand_kind || w.mode != RandomnessMode::shared_broadcast) {
    throw Error("shared_rand adversary needs a shared_broadcast rand_k worker compressor");
  }
  return OracleSpec::exact();
}

namespace {

class Tracker : public RunObserver {
 public:
  Tracker(const ZeroChainProblem& problem) : problem_(problem) { visit(problem.x0()); }

  void on_oracle_query(long query_round, int, const RealVector&, const OracleTrace& trace) override {
    if (trace.zeta && *trace.zeta) zeta_hit_[query_round] = true;
    else zeta_hit_.try_emplace(query_round, false);
  }

  void on_uplink(long comm_round, int, const RealVector& pre,
                 const std::vector<int>& selection) override {
    auto& r = rounds_[comm_round];
    r.frontier = std::max(r.frontier, prog(pre));
    r.selected.insert(selection.begin(), selection.end());
  }

  void on_iterate(long, const RealVector& x) override { visit(x); }

  long zeta_bound() const {
    long s = 0;
    for (const auto& [t, hit] : zeta_hit_) s += hit ? 1 : 0;
    return s;
  }

  long frontier_bound() const {
    long events = 0;
    for (const auto& [t, r] : rounds_) {
      if (r.frontier > 0 && r.selected.count(r.frontier - 1)) ++events;
    }
    return 1 + events;
  }

  HardInstanceResult result;

 private:
  struct RoundInfo {
    int frontier = 0;
    std::set<int> selected;
  };

  void visit(const RealVector& x) {
    result.prog_span = std::max(result.prog_span, prog(x));
    result.prog_trajectory.push_back(result.prog_span);
    const double g = problem_.global_grad(x).norm();
    if (result.x_hat.size() == 0 || g < result.grad_norm_x_hat) {
      result.x_hat = x;
      result.grad_norm_x_hat = g;
    }
  }

  const ZeroChainProblem& problem_;
  std::map<long, bool> zeta_hit_;
  std::map<long, RoundInfo> rounds_;
};

}  // namespace

HardInstanceResult run_hard_instance_trial(const ZeroChainProblem& problem,
                                           AdversaryKind adversary, double p,
                                           const AlgorithmConfig& config, std::uint64_t seed) {
  const OracleSpec oracle = hard_instance_oracle(problem, adversary, p, config);
  Tracker tracker(problem);
  const RunRecord rec = run_algorithm(problem, oracle, config, seed, &tracker);
  if (rec.diverged) throw Error("hard-instance run diverged; lower gamma");

  HardInstanceResult out = std::move(tracker.result);
  out.seed = seed;
  out.prog_x_hat = prog(out.x_hat);
  const auto& o = problem.options();
  out.chain_grad_inf_x_hat =
      chain::gradient(chain::Component::full, out.x_hat / o.lambda).cwiseAbs().maxCoeff();
  out.bound = adversary == AdversaryKind::masked ? tracker.zeta_bound() : tracker.frontier_bound();
  out.bound_holds = out.prog_span <= out.bound;
  out.below_d = out.prog_x_hat < o.d;
  out.floor_holds = !out.below_d || out.grad_norm_x_hat >= problem.gradient_floor();
  return out;
}

}  // namespace compresim

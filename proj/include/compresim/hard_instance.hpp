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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compresim/algorithms.hpp"
#include "compresim/problems.hpp"

namespace compresim {

/// masked: Bernoulli-masked exact gradients on the homogeneous chain.
/// shared_rand: exact gradients on the split chain, uplink rand-k with one
/// shared random stream.
enum class AdversaryKind { masked, shared_rand };

AdversaryKind parse_adversary_kind(const std::string& name);
std::string to_string(AdversaryKind kind);

struct HardInstanceResult {
  std::uint64_t seed = 0;
  /// prog_set of all iterates seen so far, one entry per iterate (x0 first).
  std::vector<int> prog_trajectory;
  int prog_span = 0;
  /// Iterate with the smallest ||grad f||.
  RealVector x_hat;
  int prog_x_hat = 0;
  double grad_norm_x_hat = 0.0;
  /// ||grad h(x_hat / lambda)||_inf for the unscaled full chain.
  double chain_grad_inf_x_hat = 0.0;
  /// masked: sum over query rounds of max_i 1{zeta_i = 1}.
  /// shared_rand: 1 + number of uplink rounds whose shared selection hit the
  /// frontier coordinate.
  long bound = 0;
  bool bound_holds = false;
  /// prog(x_hat) < d, in which case ||grad f(x_hat)|| >= L lambda / L0.
  bool below_d = false;
  bool floor_holds = true;
};

/// Checks the pairing (masked <-> homogeneous chain + masked oracle,
/// shared_rand <-> split chain + shared rand-k uplink) and returns the oracle
/// to use.
OracleSpec hard_instance_oracle(const ZeroChainProblem& problem, AdversaryKind adversary,
                                double p, const AlgorithmConfig& config);

HardInstanceResult run_hard_instance_trial(const ZeroChainProblem& problem,
                                           AdversaryKind adversary, double p,
                                           const AlgorithmConfig& config, std::uint64_t seed);

}  // namespace compresim

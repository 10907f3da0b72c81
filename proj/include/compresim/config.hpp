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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compresim/algorithms.hpp"
#include "compresim/hard_instance.hpp"
#include "compresim/problems.hpp"

namespace compresim {

struct ProblemConfig {
  std::string name = "least_squares";  // least_squares | logistic | zero_chain
  std::uint64_t seed = 0;
  LeastSquaresOptions least_squares;
  LogisticOptions logistic;
  ZeroChainOptions zero_chain;
};

struct AdversaryConfig {
  AdversaryKind kind = AdversaryKind::masked;
  double p = 1.0;
};

/// One run file. Algorithms inherit [compressors], [budget] and
/// [cost_model] unless their own table overrides them.
struct ExperimentConfig {
  ProblemConfig problem;
  OracleSpec oracle;
  std::vector<AlgorithmConfig> algorithms;
  int n_trials = 1;
  std::uint64_t base_seed = 0;
  std::optional<AdversaryConfig> adversary;
  double tau = 0.5;
  std::string reference = "psgd";
  int parallel = 1;
  /// Raw text of the file, echoed into the summary.
  std::string source;
};

/// Parses TOML text. Errors name the offending field, e.g.
/// "config: [budget].T must be a positive integer".
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Builds the problem and fills its oracle-dependent constants.
std::unique_ptr<Problem> build_problem(const ProblemConfig& problem, const OracleSpec& oracle);

}  // namespace compresim

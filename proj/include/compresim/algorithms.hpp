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
#include <optional>
#include <string>
#include <vector>

#include "compresim/compressors.hpp"
#include "compresim/core.hpp"
#include "compresim/problems.hpp"

namespace compresim {

enum class AlgorithmName { neolithic, psgd, mem_sgd, double_squeeze, ef21_sgd, qsgd };

std::string to_string(AlgorithmName name);
AlgorithmName parse_algorithm_name(const std::string& name);

struct GammaConfig {
  enum class Mode { auto_theory, manual };
  Mode mode = Mode::manual;
  double value = 0.01;
  /// Stair decay: divide by decay_factor every decay_every communication
  /// rounds (0 disables).
  long decay_every = 0;
  double decay_factor = 1.0;
};

struct RConfig {
  enum class Mode { auto_theory, manual };
  Mode mode = Mode::manual;
  int value = 1;
};

struct AlgorithmConfig {
  AlgorithmName name = AlgorithmName::psgd;
  /// Display name; defaults to the algorithm name.
  std::string label;
  GammaConfig gamma;
  RConfig R;
  CompressorSpec worker_compressor;
  CompressorSpec server_compressor;
  /// Gradient queries == communication rounds per worker.
  long budget_T = 100;
  long log_every = 1;
  CostModel cost;

  std::string display_name() const { return label.empty() ? to_string(name) : label; }
};

// ---------------------------------------------------------------------------
// Theory-driven parameters
// ---------------------------------------------------------------------------

/// R = ceil(max(ln(delta T max(b2, sigma2 delta) / (Delta L)), ln 8) / delta).
int select_R(double delta, long T, double b2, double sigma2, double Delta, double L);

/// 1 / (11L + sigma ((K+1)L / (2nR Delta))^(1/2)
///        + (32 (K+1) L^2 theta (b2 + sigma^2/R) / (3 (1-theta) Delta))^(1/3)).
/// Throws when theta >= 1 ("R too small for contraction").
double select_gamma_neolithic(double L, double sigma, long K, int n, int R, double Delta,
                              double theta, double b2);

/// 4 (1 - delta)^R.
double theta_of(double delta, int R);

/// Parameters an algorithm actually runs with after auto selection, compressor
/// wrapping and the fair-budget split.
struct ResolvedParams {
  double gamma0 = 0.0;
  int R = 1;
  long K = 0;
  long discarded_rounds = 0;
  double delta = 1.0;
  double theta = 0.0;
  CompressorSpec worker_compressor;
  CompressorSpec server_compressor;
};

ResolvedParams resolve_parameters(const Problem& problem, const AlgorithmConfig& config);

/// gamma0 / decay_factor^floor(round / decay_every).
double step_size(const GammaConfig& gamma, double gamma0, long round);

// ---------------------------------------------------------------------------
// Communication ledger and run records
// ---------------------------------------------------------------------------

/// Cumulative transmission counters. Uplink sums over workers; a broadcast
/// downlink message is counted once.
struct CommLedger {
  std::uint64_t up_scalars = 0;
  std::uint64_t up_indices = 0;
  std::uint64_t up_bits = 0;
  std::uint64_t down_scalars = 0;
  std::uint64_t down_indices = 0;
  std::uint64_t down_bits = 0;
  std::vector<std::uint64_t> grad_queries;  // per worker
  std::vector<std::uint64_t> comm_rounds;   // per worker

  explicit CommLedger(int n = 0) : grad_queries(n, 0), comm_rounds(n, 0) {}
  void add_uplink(const WireCost& c);
  void add_downlink(const WireCost& c);
  /// Queries per worker; every worker queries the same number of times.
  std::uint64_t queries() const { return grad_queries.empty() ? 0 : grad_queries.front(); }
};

struct SeriesPoint {
  long round = 0;  // communication rounds consumed
  double f = 0.0;
  double grad_norm_sq = 0.0;
  CommLedger ledger;
};

struct RunDiagnostics {
  /// NEOLITHIC: max over iterations of the error-compensation recursion residual.
  double recursion_residual_max = 0.0;
  /// Max over rounds of the largest coordinate gap between worker model copies.
  double model_copy_max_diff = 0.0;
  /// MEM-SGD: max gap between er_i and the running sum of its increments.
  double error_identity_max = 0.0;
  /// EF21-SGD: max gap between the incrementally tracked g and mean g_i.
  double aggregate_identity_max = 0.0;
  /// Norms of the error accumulators at the end of the run.
  double worker_error_norm = 0.0;
  double server_error_norm = 0.0;
  /// Shared-randomness lock-step violations (draw indices disagreed).
  long shared_draw_mismatches = 0;
};

struct RunRecord {
  AlgorithmConfig config;
  ResolvedParams params;
  std::uint64_t seed = 0;
  std::vector<SeriesPoint> series;
  RealVector final_x;
  CommLedger ledger;
  RunDiagnostics diagnostics;
  long rounds_executed = 0;
  bool diverged = false;
  double wall_seconds = 0.0;
};

/// Instrumentation hooks. Defaults do nothing.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  /// One oracle call of `worker` at x; query_round counts per-worker queries from 0.
  virtual void on_oracle_query(long /*query_round*/, int /*worker*/, const RealVector& /*x*/,
                               const OracleTrace& /*trace*/) {}
  /// One compressed uplink message: `pre` is the vector handed to the
  /// compressor, `selection` its kept coordinates (0-based, empty if dense).
  virtual void on_uplink(long /*comm_round*/, int /*worker*/, const RealVector& /*pre*/,
                         const std::vector<int>& /*selection*/) {}
  /// A new model iterate after `comm_round` communication rounds.
  virtual void on_iterate(long /*comm_round*/, const RealVector& /*x*/) {}
};

RunRecord run_psgd(const Problem& problem, const OracleSpec& oracle, const AlgorithmConfig& config,
                   std::uint64_t seed, RunObserver* observer = nullptr);
RunRecord run_neolithic(const Problem& problem, const OracleSpec& oracle,
                        const AlgorithmConfig& config, std::uint64_t seed,
                        RunObserver* observer = nullptr);
RunRecord run_mem_sgd(const Problem& problem, const OracleSpec& oracle,
                      const AlgorithmConfig& config, std::uint64_t seed,
                      RunObserver* observer = nullptr);
RunRecord run_double_squeeze(const Problem& problem, const OracleSpec& oracle,
                             const AlgorithmConfig& config, std::uint64_t seed,
                             RunObserver* observer = nullptr);
RunRecord run_ef21_sgd(const Problem& problem, const OracleSpec& oracle,
                       const AlgorithmConfig& config, std::uint64_t seed,
                       RunObserver* observer = nullptr);
RunRecord run_qsgd(const Problem& problem, const OracleSpec& oracle, const AlgorithmConfig& config,
                   std::uint64_t seed, RunObserver* observer = nullptr);

/// Dispatches on config.name.
RunRecord run_algorithm(const Problem& problem, const OracleSpec& oracle,
                        const AlgorithmConfig& config, std::uint64_t seed,
                        RunObserver* observer = nullptr);

}  // namespace compresim

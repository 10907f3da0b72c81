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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "compresim/algorithms.hpp"
#include "compresim/config.hpp"
#include "compresim/hard_instance.hpp"

namespace compresim {

/// Per-round statistics over the non-diverged trials of one algorithm.
struct TrialSummary {
  std::string label;
  AlgorithmConfig config;
  ResolvedParams params;
  std::vector<long> rounds;
  std::vector<double> f_mean, f_std;
  std::vector<double> grad_norm_sq_mean, grad_norm_sq_std;
  /// Running average of grad_norm_sq_mean over the logged rounds so far.
  std::vector<double> grad_norm_sq_avg;
  /// Ledger columns, averaged over trials (in the CSV column order).
  std::vector<std::array<double, 7>> ledger_mean;
  double final_grad_norm_sq_mean = 0.0, final_grad_norm_sq_std = 0.0;
  double final_f_mean = 0.0, final_f_std = 0.0;
  int trials = 0;
  int diverged = 0;
  double wall_seconds_mean = 0.0;
  std::optional<long> transient_crossing;
};

/// Aggregates records of one configuration (distinct seeds). Diverged runs
/// are counted but excluded from every statistic.
TrialSummary summarize(const std::vector<RunRecord>& records);

/// Smallest logged round from which the algorithm's mean ||grad f||^2 stays
/// at or below (1 + tau) times the reference for the rest of the run. The
/// reference is read at its latest logged round not after each algorithm
/// round.
std::optional<long> estimate_transient_crossing(const TrialSummary& algo,
                                                const TrialSummary& reference, double tau = 0.5);

/// Exact per-trial CSV header.
inline constexpr const char* kTrialCsvHeader =
    "round,f,grad_norm_sq,up_scalars,up_idx,down_scalars,down_idx,up_bits,down_bits,queries";

void write_trial_csv(std::ostream& out, const RunRecord& record);
void write_aggregate_csv(std::ostream& out, const TrialSummary& summary);

struct ExperimentResult {
  std::vector<TrialSummary> summaries;
  std::vector<std::vector<RunRecord>> records;  // [algorithm][trial]
};

/// Runs n_trials seeds (base_seed, base_seed+1, ...) of every algorithm,
/// up to `parallel` at a time. When out_dir is non-empty writes
/// <label>/trial_<seed>.csv, <label>_aggregate.csv and summary.json there.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir = {});

/// Runs n_trials seeds of every algorithm against the configured adversary.
/// Result is indexed [algorithm][trial].
std::vector<std::vector<HardInstanceResult>> run_hard_instance_experiment(
    const ExperimentConfig& config);

/// JSON report of a hard-instance experiment.
std::string hard_instance_json(const ExperimentConfig& config,
                               const std::vector<std::vector<HardInstanceResult>>& results);

/// JSON summary text (config echo, per-algorithm finals, crossing, diverged count).
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace compresim
